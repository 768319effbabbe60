"""Problem files for the reference systems: the worked examples and a few extras."""

from __future__ import annotations

from importlib import resources

from ..parser import ProblemFile, parse_problem

NAMES = ("sys3", "sys4", "sys5", "sys6", "sys7", "sys8", "sys1")
EXTRA = ("sys8_lifted", "sys8_scalar", "conjugate", "free")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.ode")


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str) -> ProblemFile:
    return parse_problem(text(name))


def available() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".ode"))
