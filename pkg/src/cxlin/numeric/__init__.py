"""Numerical backbone: integration, residuals, Taylor continuation, curve tracing."""

from .curves import CriticalPoint, Curve, LostCurve, trace_implicit
from .gamma import airy_seeds, lanczos_gamma
from .ode import PoleEncounter, StepUnderflow, Trajectory, integrate
from .residual import GridSingular, residual, residual_complex
from .taylor import AnalyticFunction, continue_analytic

__all__ = [
    "AnalyticFunction",
    "CriticalPoint",
    "Curve",
    "GridSingular",
    "LostCurve",
    "PoleEncounter",
    "StepUnderflow",
    "Trajectory",
    "airy_seeds",
    "continue_analytic",
    "integrate",
    "lanczos_gamma",
    "residual",
    "residual_complex",
    "trace_implicit",
]
