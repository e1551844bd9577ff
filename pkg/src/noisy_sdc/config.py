"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    trace: float = 1e-10
    positivity: float = 1e-9
    # trace drift below this is left alone by the integrator
    renormalize: float = 1e-12
    jacobi_offdiag: float = 1e-13
    jacobi_max_sweeps: int = 50
    kraus_completeness: float = 1e-12
    default_steps: int = 2000
    esd_grid: int = 200
    rotation_grid: int = 2000
    # relative to the horizon
    esd_bisect: float = 1e-9
    root_xtol: float = 1e-10
    maximum_xtol: float = 1e-9


TOL = Tolerances()
