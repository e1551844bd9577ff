"""Negativity dynamics, entanglement sudden death times and noisy rotations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .channels import ChannelKind, EvolutionSpec, LindbladTerm, analytic_apply, evolve, trajectory
from .config import TOL
from .qstate import Subsystem, bell_state, min_pt_eigenvalue, negativity, on_qubit, pauli, sigma_minus
from .sweep import SweepResult, parallel_map

# Amplitude+phase noise on B followed by the same on A. Times passed with
# this source are the total over both legs, each leg taking half.
AZ_AFTER_BZ = (ChannelKind.BZ, ChannelKind.AZ)


class UnsupportedKindError(ValueError):
    pass


class Noise(enum.Enum):
    """Noise acting on the rotated qubit during a gate."""

    PHASE = "phase"
    BIT_FLIP = "bitflip"
    BIT_PHASE_FLIP = "bitphase"
    AMPLITUDE = "amplitude"

    def operator(self) -> np.ndarray:
        if self is Noise.AMPLITUDE:
            return sigma_minus()
        return pauli({Noise.PHASE: 3, Noise.BIT_FLIP: 1, Noise.BIT_PHASE_FLIP: 2}[self])


@dataclass(frozen=True)
class RotationSpec:
    """Rotation of qubit A about ``axis`` at rate ``omega0`` under ``noise``."""

    axis: int
    omega0: float
    noise: Noise = Noise.PHASE
    gamma: float = 0.0

    def __post_init__(self):
        if self.axis not in (1, 2, 3):
            raise ValueError(f"rotation axis must be 1, 2 or 3, got {self.axis}")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        object.__setattr__(self, "noise", Noise(self.noise))

    @property
    def omega_squared(self) -> float:
        """omega0^2 - gamma^2; the oscillation frequency is its root when positive."""
        return self.omega0**2 - self.gamma**2

    def evolution_spec(self) -> EvolutionSpec:
        h = 0.5 * self.omega0 * on_qubit(pauli(self.axis), Subsystem.A)
        term = LindbladTerm(on_qubit(self.noise.operator(), Subsystem.A), self.gamma)
        return EvolutionSpec(h, (term,))

    def default_step(self) -> float:
        return 0.01 / max(self.omega0, self.gamma)


def noisy_rotation(rho0: np.ndarray, spec: RotationSpec, t: float, step: float | None = None) -> np.ndarray:
    if step is None:
        # "or t" guards underflow for subnormal t
        step = (min(spec.default_step(), t / TOL.default_steps) or t) if t > 0 else 1.0
    return evolve(rho0, spec.evolution_spec(), t, step)


def _margin_closed(source, gamma: float) -> Callable[[np.ndarray], np.ndarray]:
    """Signed negativity expression (before the max with 0), vectorized in t."""
    if source == AZ_AFTER_BZ:
        def f(t):
            e = np.exp(-gamma * np.asarray(t, dtype=float) / 2)
            return e * (e + e**4 - 1.0)
        return f
    if not isinstance(source, ChannelKind):
        raise UnsupportedKindError(f"no closed negativity for {source!r}")
    fam = source.family
    if fam in ("Z", "X"):
        return lambda t: np.exp(-2 * gamma * t)
    if fam == "amp":
        return lambda t: np.exp(-gamma * t)
    if fam == "XZ":
        return lambda t: 0.5 * ((1 + np.exp(-2 * gamma * t)) ** 2 - 2)
    if fam == "DEPOL":
        return lambda t: (3 * np.exp(-4 * gamma * t) - 1) / 2
    if fam == "amp+X":
        def f(t):
            x = gamma * np.asarray(t, dtype=float)
            root = np.sqrt(8 + 9 * np.cosh(2 * x) + np.cosh(3 * x))
            return (3 * np.exp(-3 * x) + math.sqrt(2) * np.exp(-1.5 * x) * root - 3) / 6
        return f
    if fam == "amp+Z":
        def f(t):
            x = gamma * np.asarray(t, dtype=float)
            d = -np.expm1(-x)
            q = 4 * np.exp(-5 * x)
            # (sqrt(d^2 + q) - d) / 2 without cancellation at large x
            return q / (2 * (np.sqrt(d * d + q) + d))
        return f
    raise UnsupportedKindError(f"no closed negativity for {source!r}")


def closed_negativity(kind, gamma: float, t):
    """Closed-form negativity of the Bell state after channel ``kind``.

    ``kind`` is a :class:`ChannelKind` or :data:`AZ_AFTER_BZ` (``t`` then
    being the total time of both legs). Pauli kinds and the amplitude
    families give the same value on either qubit.
    """
    if gamma < 0 or np.any(np.asarray(t) < 0):
        raise ValueError("gamma and t must be >= 0")
    out = np.maximum(0.0, _margin_closed(kind, gamma)(np.asarray(t, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def bell_after(kind, gamma: float, t: float) -> np.ndarray:
    """Bell state after ``kind`` (or the two-leg composite) via Kraus maps."""
    if kind == AZ_AFTER_BZ:
        rho = analytic_apply(ChannelKind.BZ, gamma, t / 2, bell_state())
        return analytic_apply(ChannelKind.AZ, gamma, t / 2, rho)
    return analytic_apply(kind, gamma, t, bell_state())


@dataclass
class NegativityCurve:
    source: object
    gamma: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be non-decreasing")


def negativity_curve(source, times: Sequence[float], gamma: float | None = None) -> NegativityCurve:
    """Negativity of the evolved Bell state on a time grid.

    Channel kinds use their Kraus maps; rotations are integrated.
    """
    times = np.asarray(times, dtype=float)
    if isinstance(source, RotationSpec):
        states = trajectory(bell_state(), source.evolution_spec(), times, _rotation_step(source, times[-1]))
        return NegativityCurve(source, source.gamma, times, np.asarray(negativity(states)))
    states = np.array([bell_after(source, gamma, t) for t in times])
    return NegativityCurve(source, gamma, times, np.asarray(negativity(states)))


@dataclass(frozen=True)
class EsdResult:
    """First time the negativity reaches zero, or ``None`` within the horizon."""

    tau_d: float | None
    bracket: tuple[float, float] | None
    residual: float
    horizon: float

    @property
    def died(self) -> bool:
        return self.tau_d is not None


def _rotation_step(spec: RotationSpec, horizon: float) -> float:
    return min(spec.default_step(), horizon / TOL.default_steps) or spec.default_step()


def _default_horizon(gamma: float) -> float:
    if not gamma > 0:
        raise ValueError("a horizon is required when gamma is 0")
    return 20.0 / gamma


def esd_time(source, gamma: float | None = None, horizon: float | None = None) -> EsdResult:
    """Entanglement sudden death time of the Bell state.

    ``source`` is a :class:`ChannelKind`, :data:`AZ_AFTER_BZ` (closed
    forms, 200-point bracketing grid) or a :class:`RotationSpec`
    (integrated, 2000-point grid). The first grid point with zero
    negativity brackets the root, which is then refined to
    ``1e-9 * horizon``. Later revivals are ignored.
    """
    if isinstance(source, RotationSpec):
        gamma = source.gamma
    if gamma is None:
        raise ValueError("gamma is required for channel kinds")
    horizon = _default_horizon(gamma) if horizon is None else horizon
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    xtol = TOL.esd_bisect * horizon

    if isinstance(source, RotationSpec):
        return _esd_rotation(source, horizon, xtol)

    margin = _margin_closed(source, gamma)
    grid = np.linspace(0.0, horizon, TOL.esd_grid + 1)
    vals = margin(grid)
    dead = np.nonzero(vals <= 0.0)[0]
    if len(dead) == 0:
        return EsdResult(None, None, float(max(vals[-1], 0.0)), horizon)
    i = int(dead[0])
    if i == 0:
        return EsdResult(0.0, (0.0, 0.0), float(max(vals[0], 0.0)), horizon)
    lo, hi = grid[i - 1], grid[i]
    tau = brentq(lambda t: float(margin(t)), lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    return EsdResult(tau, (lo, hi), float(max(margin(tau), 0.0)), horizon)


def _esd_rotation(spec: RotationSpec, horizon: float, xtol: float, chunk: int = 250) -> EsdResult:
    evo = spec.evolution_spec()
    step = _rotation_step(spec, horizon)
    grid = np.linspace(0.0, horizon, TOL.rotation_grid + 1)
    rho, t_prev = bell_state(), 0.0
    if -min_pt_eigenvalue(rho) <= 0:
        return EsdResult(0.0, (0.0, 0.0), 0.0, horizon)
    for start in range(1, len(grid), chunk):
        times = grid[start : start + chunk]
        states = trajectory(rho, evo, times, step, t0=t_prev)
        margins = -np.asarray(min_pt_eigenvalue(states))
        dead = np.nonzero(margins <= 0.0)[0]
        if len(dead):
            j = int(dead[0])
            lo = grid[start + j - 1]
            hi = times[j]
            rho_lo = states[j - 1] if j > 0 else rho

            def f(t):
                return -min_pt_eigenvalue(evolve(rho_lo, evo, t - lo, step)) if t > lo else -min_pt_eigenvalue(rho_lo)

            tau = brentq(f, lo, hi, xtol=xtol)
            return EsdResult(tau, (lo, hi), float(negativity(evolve(rho_lo, evo, tau - lo, step))), horizon)
        rho, t_prev = states[-1], times[-1]
    return EsdResult(None, None, float(negativity(rho)), horizon)


def phase_x_margin(gamma: float, omega0: float) -> Callable[[np.ndarray], np.ndarray]:
    """Left-hand side of the closed ESD condition for the phase-noise X rotation.

    With omega^2 = omega0^2 - gamma^2 it reads
    ``exp(-2 g t) + 2 exp(-g t) sqrt(1 + g^2 s(t)^2) - 1`` where
    ``s = sin(omega t)/omega``; this equals the printed form
    ``exp(-2 g t) + (2 exp(-g t)/omega) sqrt(omega0^2 - g^2 cos^2 omega t) - 1``
    for real omega and continues it to omega -> 0 (``s = t``) and to
    imaginary omega (``s = sinh(kappa t)/kappa``).
    """
    w2 = omega0**2 - gamma**2
    scale = max(omega0**2, gamma**2)

    def s(t):
        t = np.asarray(t, dtype=float)
        if abs(w2) <= 1e-14 * scale:
            return t
        if w2 > 0:
            w = math.sqrt(w2)
            return np.sin(w * t) / w
        k = math.sqrt(-w2)
        return np.sinh(k * t) / k

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-2 * gamma * t) + 2 * np.exp(-gamma * t) * np.sqrt(1 + (gamma * s(t)) ** 2) - 1

    return f


def rotation_esd_root_phase_x(gamma: float, omega0: float, horizon: float | None = None) -> float | None:
    """Smallest positive root of the closed ESD condition, or None."""
    if not gamma > 0 or not omega0 > 0:
        raise ValueError("gamma and omega0 must be positive")
    horizon = _default_horizon(gamma) if horizon is None else horizon
    f = phase_x_margin(gamma, omega0)
    w = math.sqrt(abs(omega0**2 - gamma**2))
    n = TOL.rotation_grid
    if w > 0:
        n = max(n, min(int(math.ceil(horizon * 8 * w / math.pi)), 4_000_000))
    grid = np.linspace(0.0, horizon, n + 1)
    vals = f(grid)
    dead = np.nonzero(vals <= 0.0)[0]
    if len(dead) == 0:
        return None
    i = int(dead[0])
    return float(brentq(lambda t: float(f(t)), grid[i - 1], grid[i], xtol=TOL.root_xtol))


def _tau_cell(args) -> float | None:
    noise, gamma, omega0 = args
    if Noise(noise) is Noise.PHASE:
        return rotation_esd_root_phase_x(gamma, omega0)
    return esd_time(RotationSpec(1, omega0, Noise(noise), gamma)).tau_d


def table_tau_d(noise: Noise | str, gamma: float, omega0_list: Sequence[float], jobs: int = 1) -> SweepResult:
    """ESD times of the X rotation for each omega0.

    Phase noise uses the closed root condition; amplitude noise has no
    closed form and is integrated.
    """
    noise = Noise(noise)
    if noise not in (Noise.PHASE, Noise.AMPLITUDE):
        raise ValueError("tables exist for phase and amplitude noise only")
    taus = parallel_map(_tau_cell, [(noise.value, gamma, w) for w in omega0_list], jobs)
    result = SweepResult(("gamma", "omega0", "tau_d"), meta={"noise": noise.value})
    for w, tau in zip(omega0_list, taus):
        result.append((gamma, w, tau))
    return result


