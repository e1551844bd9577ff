"""Lindblad dynamics for a qubit pair and the equivalent Kraus maps.

Two routes to the same channel live here and are meant to check each
other: :func:`evolve` integrates the master equation with classical RK4,
while :func:`kraus_for` / :func:`analytic_apply` use closed-form Kraus
operators of the single-qubit noise families.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import TOL
from .qstate import (
    Subsystem,
    check_states,
    InvalidStateError,
    is_hermitian,
    jacobi_eigh,
    on_qubit,
    pauli,
    sigma_minus,
)

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """The integrated state violated a density-matrix invariant."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


@dataclass(frozen=True, eq=False)
class LindbladTerm:
    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0 or not math.isfinite(self.rate):
            raise ValueError(f"Lindblad rate must be finite and >= 0, got {self.rate}")
        if not np.all(np.isfinite(self.operator)):
            raise ValueError("Lindblad operator has non-finite entries")


@dataclass(frozen=True, eq=False)
class EvolutionSpec:
    hamiltonian: np.ndarray | None = None
    terms: tuple[LindbladTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.hamiltonian is not None and not is_hermitian(self.hamiltonian):
            raise ValueError("Hamiltonian must be Hermitian")

    def __add__(self, other: "EvolutionSpec") -> "EvolutionSpec":
        if self.hamiltonian is None:
            h = other.hamiltonian
        elif other.hamiltonian is None:
            h = self.hamiltonian
        else:
            h = self.hamiltonian + other.hamiltonian
        return EvolutionSpec(h, self.terms + other.terms)


def lindblad_rhs(rho: np.ndarray, spec: EvolutionSpec) -> np.ndarray:
    """Right-hand side of the master equation in matrix form."""
    out = np.zeros_like(rho, dtype=complex)
    if spec.hamiltonian is not None:
        if not is_hermitian(spec.hamiltonian):
            raise ValueError("Hamiltonian must be Hermitian")
        h = spec.hamiltonian
        out += -1j * (h @ rho - rho @ h)
    for term in spec.terms:
        l = term.operator
        ld = l.conj().T
        ldl = ld @ l
        out += 0.5 * term.rate * (2.0 * l @ rho @ ld - ldl @ rho - rho @ ldl)
    return out


def superoperator(spec: EvolutionSpec, dim: int = 4) -> np.ndarray:
    """Generator acting on row-major ``rho.reshape(-1)``.

    Uses vec(A X B) = kron(A, B.T) vec(X) for row-major flattening.
    """
    eye = np.eye(dim)
    gen = np.zeros((dim * dim, dim * dim), dtype=complex)
    if spec.hamiltonian is not None:
        h = spec.hamiltonian
        gen += -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for term in spec.terms:
        l = term.operator
        ldl = l.conj().T @ l
        gen += term.rate * (np.kron(l, l.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T))
    return gen


def rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step for an autonomous system y' = f(y)."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(gen: np.ndarray, h: float) -> np.ndarray:
    """Matrix of one RK4 step for the linear system v' = gen v.

    For a linear autonomous system the four RK4 stages collapse exactly
    to the degree-4 Taylor polynomial of exp(h gen).
    """
    x = h * gen
    eye = np.eye(gen.shape[0], dtype=complex)
    x2 = x @ x
    return eye + x + x2 / 2.0 + (x2 @ x) / 6.0 + (x2 @ x2) / 24.0


def _tidy(rho: np.ndarray, t: float) -> np.ndarray:
    rho = 0.5 * (rho + np.swapaxes(rho, -1, -2).conj())
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    # a blown-up trace is left alone for validation to reject
    drift = (np.abs(tr - 1.0) > TOL.renormalize) & np.isfinite(tr) & (tr > 0)
    if np.any(drift):
        log.debug("renormalizing trace (max drift %.3e) up to t=%g", np.max(np.abs(tr - 1.0)), t)
        rho = rho / np.where(drift, tr, 1.0)[..., None, None]
    return rho


def _validated(rho: np.ndarray, t: float) -> np.ndarray:
    try:
        check_states(rho, what=f"integrated state up to t={t:g}")
    except InvalidStateError as exc:
        raise IntegrationError(str(exc), {"t": t, "state": np.asarray(rho).tolist()}) from exc
    return rho


def _n_steps(duration: float, step: float | None) -> int:
    if step is None:
        return TOL.default_steps
    if step <= 0:
        raise ValueError("step must be positive")
    return max(1, math.ceil(duration / step - 1e-9))


def evolve(rho0: np.ndarray, spec: EvolutionSpec, t: float, step: float | None = None) -> np.ndarray:
    """Integrate the master equation from 0 to ``t`` with fixed-step RK4.

    Args:
        rho0: initial 4x4 density matrix.
        spec: Hamiltonian and Lindblad terms.
        t: duration, >= 0.
        step: largest allowed step; defaults to ``t / 2000``. The actual
            step is ``t / ceil(t / step)`` so the grid lands on ``t``.

    Raises:
        IntegrationError: if the result is not a valid state.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    n = _n_steps(t, step)
    prop = rk4_propagator(superoperator(spec, rho0.shape[0]), t / n)
    v = np.linalg.matrix_power(prop, n) @ rho0.reshape(-1)
    return _validated(_tidy(v.reshape(rho0.shape), t), t)


def trajectory(
    rho0: np.ndarray,
    spec: EvolutionSpec,
    times: Sequence[float],
    step: float | None = None,
    t0: float = 0.0,
) -> np.ndarray:
    """States at each of the increasing ``times``, from one RK4 pass.

    ``rho0`` is the state at ``t0``. Each interval between consecutive
    sample times is split into equal steps no longer than ``step``
    (default: the whole span over 2000). Equal intervals share one
    propagator, so a uniform grid costs one matrix power.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0:
        return np.zeros((0, 4, 4), dtype=complex)
    if step is None:
        span = times[-1] - t0
        step = span / TOL.default_steps if span > 0 else 1.0
    gen = superoperator(spec, 4)
    cache: dict[tuple[float, int], np.ndarray] = {}
    v = np.asarray(rho0, dtype=complex).reshape(-1)
    out = np.empty((len(times), 16), dtype=complex)
    t_prev = t0
    for i, t in enumerate(times):
        dt = t - t_prev
        if dt < 0:
            raise ValueError("times must be non-decreasing and not before t0")
        if dt > 0:
            n = _n_steps(dt, step)
            key = (round(dt, 12), n)
            if key not in cache:
                cache[key] = np.linalg.matrix_power(rk4_propagator(gen, dt / n), n)
            v = cache[key] @ v
        out[i] = v
        t_prev = t
    return _validated(_tidy(out.reshape(-1, 4, 4), float(times[-1])), float(times[-1]))


class ChannelKind(enum.Enum):
    """Named single-qubit noise families.

    Pauli families (Z, X, XZ, DEPOL) act on a qubit chosen per call;
    amplitude families carry their qubit in the name.
    """

    Z = "Z"
    X = "X"
    XZ = "XZ"
    DEPOL = "DEPOL"
    B = "B"
    A = "A"
    BZ = "BZ"
    AZ = "AZ"
    BX = "BX"
    AX = "AX"

    @property
    def is_pauli(self) -> bool:
        return self in _PAULI_KINDS

    @property
    def fixed_qubit(self) -> Subsystem | None:
        if self.is_pauli:
            return None
        return Subsystem(self.value[0])

    def mirrored(self) -> "ChannelKind":
        """Same noise on the other qubit (Pauli kinds are their own mirror)."""
        if self.is_pauli:
            return self
        other = "A" if self.value[0] == "B" else "B"
        return ChannelKind(other + self.value[1:])

    def generators(self) -> list[np.ndarray]:
        """Single-qubit Lindblad operators, all at the common rate."""
        sm = sigma_minus()
        return {
            "Z": [pauli(3)],
            "X": [pauli(1)],
            "XZ": [pauli(1), pauli(3)],
            "DEPOL": [pauli(1), pauli(2), pauli(3)],
            "amp": [sm],
            "amp+Z": [sm, pauli(3)],
            "amp+X": [sm, pauli(1)],
        }[self.family]

    @property
    def family(self) -> str:
        """Noise family name, independent of which qubit it hits."""
        if self.is_pauli:
            return self.value
        return "amp" + ("+" + self.value[1:] if len(self.value) > 1 else "")


_PAULI_KINDS = frozenset({ChannelKind.Z, ChannelKind.X, ChannelKind.XZ, ChannelKind.DEPOL})


def resolve_qubit(kind: ChannelKind, qubit: Subsystem | None) -> Subsystem:
    fixed = kind.fixed_qubit
    if fixed is None:
        return Subsystem.B if qubit is None else qubit
    if qubit is not None and qubit is not fixed:
        raise ValueError(f"channel {kind.value} acts on qubit {fixed.value}, not {qubit.value}")
    return fixed


def lindblad_terms(kind: ChannelKind, gamma: float, qubit: Subsystem | None = None) -> list[LindbladTerm]:
    q = resolve_qubit(kind, qubit)
    return [LindbladTerm(on_qubit(op, q), gamma) for op in kind.generators()]


def spec_for(kind: ChannelKind, gamma: float, qubit: Subsystem | None = None) -> EvolutionSpec:
    return EvolutionSpec(None, lindblad_terms(kind, gamma, qubit))


def bloch_map(kind: ChannelKind, gamma: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Affine action r -> diag(scale) r + shift on the Bloch vector."""
    x = gamma * t
    e = math.exp
    fam = kind.family
    if fam == "Z":
        scale = (e(-2 * x), e(-2 * x), 1.0)
    elif fam == "X":
        scale = (1.0, e(-2 * x), e(-2 * x))
    elif fam == "XZ":
        scale = (e(-2 * x), e(-4 * x), e(-2 * x))
    elif fam == "DEPOL":
        scale = (e(-4 * x),) * 3
    elif fam == "amp":
        scale = (e(-x / 2), e(-x / 2), e(-x))
    elif fam == "amp+Z":
        scale = (e(-5 * x / 2), e(-5 * x / 2), e(-x))
    else:
        scale = (e(-x / 2), e(-5 * x / 2), e(-3 * x))
    shift = np.zeros(3)
    if fam in ("amp", "amp+Z"):
        shift[2] = -math.expm1(-x)
    elif fam == "amp+X":
        shift[2] = -math.expm1(-3 * x) / 3.0
    return np.array(scale), shift


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple[np.ndarray, ...]
    kind: ChannelKind
    gamma: float
    t: float
    qubit: Subsystem

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def completeness_defect(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def _pauli_kraus(scale: np.ndarray) -> list[np.ndarray]:
    lx, ly, lz = scale
    weights = (
        (1 + lx + ly + lz) / 4,
        (1 + lx - ly - lz) / 4,
        (1 - lx + ly - lz) / 4,
        (1 - lx - ly + lz) / 4,
    )
    return [math.sqrt(max(w, 0.0)) * pauli(m) for m, w in enumerate(weights) if w > 0]


def _amplitude_kraus(x: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, math.exp(-x / 2)]], dtype=complex),
        np.array([[0, math.sqrt(-math.expm1(-x))], [0, 0]], dtype=complex),
    ]


def _choi_kraus(scale: np.ndarray, shift: np.ndarray) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of the Choi matrix."""
    paulis = [pauli(m) for m in range(4)]

    def channel(op):
        c = [np.trace(p @ op) / 2 for p in paulis]
        out = c[0] * (paulis[0] + sum(shift[k] * paulis[k + 1] for k in range(3)))
        return out + sum(c[k + 1] * scale[k] * paulis[k + 1] for k in range(3))

    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            eij = np.zeros((2, 2), dtype=complex)
            eij[i, j] = 1.0
            choi += np.kron(eij, channel(eij))
    w, v = jacobi_eigh(choi)
    return [math.sqrt(wk) * v[:, k].reshape(2, 2).T for k, wk in enumerate(w) if wk > 1e-15]


def single_qubit_kraus(kind: ChannelKind, gamma: float, t: float) -> list[np.ndarray]:
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be >= 0")
    x = gamma * t
    fam = kind.family
    if kind.is_pauli:
        return _pauli_kraus(bloch_map(kind, gamma, t)[0])
    if fam == "amp":
        return _amplitude_kraus(x)
    if fam == "amp+Z":
        # amplitude damping and dephasing generators commute
        phase = _pauli_kraus(bloch_map(ChannelKind.Z, gamma, t)[0])
        return [p @ a for p in phase for a in _amplitude_kraus(x)]
    return _choi_kraus(*bloch_map(kind, gamma, t))


def kraus_for(kind: ChannelKind, gamma: float, t: float, qubit: Subsystem | None = None) -> KrausSet:
    q = resolve_qubit(kind, qubit)
    ops = tuple(on_qubit(k, q) for k in single_qubit_kraus(kind, gamma, t))
    return KrausSet(ops, kind, gamma, t, q)


@dataclass(frozen=True)
class Channel:
    """A noise family run for duration ``t`` at rate ``gamma`` on one qubit."""

    kind: ChannelKind
    gamma: float
    t: float
    qubit: Subsystem | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "qubit", resolve_qubit(self.kind, self.qubit))

    def kraus(self) -> KrausSet:
        return kraus_for(self.kind, self.gamma, self.t, self.qubit)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.kraus().apply(rho)

    def spec(self) -> EvolutionSpec:
        return spec_for(self.kind, self.gamma, self.qubit)


def analytic_apply(
    kind: ChannelKind, gamma: float, t: float, rho: np.ndarray, qubit: Subsystem | None = None
) -> np.ndarray:
    return kraus_for(kind, gamma, t, qubit).apply(np.asarray(rho, dtype=complex))


def compose(first: Channel, second: Channel, rho: np.ndarray) -> np.ndarray:
    """Apply ``first`` and then ``second``."""
    return second.apply(first.apply(np.asarray(rho, dtype=complex)))
