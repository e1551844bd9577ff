"""Special dense coding under noisy transmission and noisy encoding.

Alice holds qubit A, Bob qubit B. A protocol run is:

1. leg one: qubit B travels to Bob through a channel for ``t0``;
2. encoding: Alice applies sigma_m (ideal) or a noisy rotation about
   axis m for the encoding time (letter 0 is left untouched);
3. leg two: qubit A travels to Bob through the mirrored channel for ``t0``.

The four resulting letters are sent with probability 1/4 each and scored
with the Holevo function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .channels import Channel, ChannelKind, trajectory
from .config import TOL
from .entanglement import AZ_AFTER_BZ, Noise, RotationSpec, esd_time, noisy_rotation
from .qstate import (
    Subsystem,
    bell_state,
    check_state,
    conjugate,
    negativity,
    on_qubit,
    partial_trace,
    pauli,
    von_neumann_entropy,
)


class ConsistencyError(RuntimeError):
    """Two routes to the same state disagreed."""


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class AlphabetEnsemble:
    """Four equiprobable letter states."""

    letters: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        letters = tuple(np.asarray(x, dtype=complex) for x in self.letters)
        if len(letters) != 4:
            raise ValueError("an alphabet has exactly four letters")
        object.__setattr__(self, "letters", letters)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return (0.25,) * 4

    def average(self) -> np.ndarray:
        return sum(self.letters) / 4.0

    def validate(self) -> "AlphabetEnsemble":
        for m, x in enumerate(self.letters):
            check_state(x, what=f"letter {m}")
        check_state(self.average(), what="average letter")
        return self


def holevo(e: AlphabetEnsemble) -> float:
    """S[average] - mean letter entropy, in bits."""
    stack = np.array((e.average(),) + e.letters)
    s = von_neumann_entropy(stack)
    return float(s[0] - s[1:].mean())


def capacity_bowen(rho: np.ndarray) -> float:
    """1 + S[rho_B] - S[rho_AB]."""
    return 1.0 + von_neumann_entropy(partial_trace(rho, Subsystem.A)) - von_neumann_entropy(rho)


def _encode_ideal(rho: np.ndarray, m: int) -> np.ndarray:
    return conjugate(rho, on_qubit(pauli(m), Subsystem.A))


@dataclass(frozen=True)
class Transmission:
    """Same noise on both legs: ``kind`` on B going out, its mirror on A coming back."""

    kind: ChannelKind
    gamma: float
    t0: float

    def __post_init__(self):
        if self.kind.fixed_qubit is Subsystem.A:
            raise ValueError("leg one carries qubit B; pass the B-side kind")
        if self.gamma < 0 or self.t0 < 0:
            raise ValueError("gamma and t0 must be >= 0")

    @property
    def leg_one(self) -> Channel:
        return Channel(self.kind, self.gamma, self.t0, Subsystem.B)

    @property
    def leg_two(self) -> Channel:
        return Channel(self.kind.mirrored(), self.gamma, self.t0, Subsystem.A)


@dataclass(frozen=True)
class NoisyEncoding:
    noise: Noise
    gamma: float
    omega0: float

    def rotation(self, axis: int) -> RotationSpec:
        return RotationSpec(axis, self.omega0, Noise(self.noise), self.gamma)


@dataclass(frozen=True)
class ProtocolSpec:
    transmission: Transmission | None = None
    encoding: NoisyEncoding | None = None
    t_encode: float = 0.0


def build_alphabet(protocol: ProtocolSpec) -> AlphabetEnsemble:
    chi = bell_state()
    tx = protocol.transmission
    if tx is not None:
        chi = tx.leg_one.apply(chi)
    letters = [chi]
    for m in (1, 2, 3):
        if protocol.encoding is None:
            letters.append(_encode_ideal(chi, m))
        else:
            letters.append(noisy_rotation(chi, protocol.encoding.rotation(m), protocol.t_encode))
    if tx is not None:
        back = tx.leg_two.kraus()
        letters = [back.apply(x) for x in letters]
    return AlphabetEnsemble(tuple(letters))


def alphabet_pauli(kind: ChannelKind, gamma: float, t0: float, check: bool = True) -> AlphabetEnsemble:
    """Ideal encoding over a Pauli channel used for both legs.

    With ``check`` the letters are compared against the collapsed form
    ``sigma_m kind(bell, 2 t0) sigma_m``.
    """
    if not kind.is_pauli:
        raise ValueError(f"{kind.value} is not a Pauli channel")
    ens = build_alphabet(ProtocolSpec(Transmission(kind, gamma, t0)))
    if check:
        collapsed = Channel(kind, gamma, 2 * t0, Subsystem.B).apply(bell_state())
        for m, x in enumerate(ens.letters):
            dev = float(np.max(np.abs(x - _encode_ideal(collapsed, m))))
            if dev > 1e-10:
                raise ConsistencyError(f"letter {m} differs from collapsed form by {dev:.3e}")
    return ens


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def capacity_closed(kind: ChannelKind, gamma: float, t0: float) -> float:
    """Printed closed-form capacity for per-leg time ``t0`` (Z/X or XZ)."""
    e4 = math.exp(-4 * gamma * t0)
    if kind in (ChannelKind.Z, ChannelKind.X):
        return 2.0 + _xlog2x((1 - e4) / 2) + _xlog2x((1 + e4) / 2)
    if kind is ChannelKind.XZ:
        e8 = math.exp(-8 * gamma * t0)
        # (1/2)(1-e)^2 log2[(1-e)/2] = (1-e) * [(1-e)/2] log2[(1-e)/2]
        return (
            2.0
            + 2 * _xlog2x((1 - e8) / 4)
            + (1 - e4) * _xlog2x((1 - e4) / 2)
            + (1 + e4) * _xlog2x((1 + e4) / 2)
        )
    raise ValueError(f"no closed capacity for {kind.value}")


def alphabet_amp_phase(gamma: float, t0: float) -> AlphabetEnsemble:
    """Amplitude+phase noise: BZ out on qubit B, AZ back on qubit A."""
    return build_alphabet(ProtocolSpec(Transmission(ChannelKind.BZ, gamma, t0)))


def alphabet_noisy_encoding(
    noise: Noise | str,
    gamma: float,
    omega0: float,
    t_encode: float,
    transmission: Transmission | None = None,
) -> AlphabetEnsemble:
    enc = NoisyEncoding(Noise(noise), gamma, omega0)
    return build_alphabet(ProtocolSpec(transmission, enc, t_encode))


class EncodingCurve:
    """Holevo value as a function of the encoding time.

    Calling the curve evaluates one time; :meth:`sample` evaluates a whole
    increasing grid from one integration pass per rotation axis.
    """

    def __init__(
        self,
        noise: Noise | str,
        gamma: float,
        omega0: float,
        transmission: Transmission | None = None,
    ):
        self.encoding = NoisyEncoding(Noise(noise), gamma, omega0)
        self.transmission = transmission

    def _shared(self) -> np.ndarray:
        chi = bell_state()
        if self.transmission is not None:
            chi = self.transmission.leg_one.apply(chi)
        return chi

    def __call__(self, t: float) -> float:
        return holevo(alphabet_noisy_encoding(
            self.encoding.noise, self.encoding.gamma, self.encoding.omega0, t, self.transmission
        ))

    def encoded(self, times: Sequence[float]) -> np.ndarray:
        """Letters before the return leg, shape ``(len(times), 4, 4, 4)``."""
        times = np.asarray(times, dtype=float)
        chi = self._shared()
        out = np.empty((len(times), 4, 4, 4), dtype=complex)
        out[:, 0] = chi
        for m in (1, 2, 3):
            rot = self.encoding.rotation(m)
            step = min(rot.default_step(), (times[-1] / TOL.default_steps) or 1.0)
            out[:, m] = trajectory(chi, rot.evolution_spec(), times, step)
        return out

    def sample(self, times: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Holevo values and the axis-1 letter negativity on a grid."""
        alpha = self.encoded(times)
        neg = np.asarray(negativity(alpha[:, 1]))
        letters = alpha
        if self.transmission is not None:
            ops = np.array(self.transmission.leg_two.kraus().operators)
            letters = np.einsum("kab,tmbc,kdc->tmad", ops, alpha, ops.conj())
        avg = letters.mean(axis=1)
        s_avg = von_neumann_entropy(avg)
        s_letters = von_neumann_entropy(letters.reshape(-1, 4, 4)).reshape(len(letters), 4)
        return s_avg - s_letters.mean(axis=1), neg


@dataclass(frozen=True)
class FirstMaximum:
    t: float | None
    value: float | None
    times: np.ndarray
    values: np.ndarray

    @property
    def found(self) -> bool:
        return self.t is not None


def first_maximum(curve: Callable[[float], float], t_hi: float, samples: int = TOL.rotation_grid) -> FirstMaximum:
    """First interior local maximum of ``curve`` on ``[0, t_hi]``.

    The curve is sampled on a uniform grid (through ``curve.sample`` when
    available) and the first grid maximum is refined by bounded Brent
    search to 1e-9 in t. ``t`` and ``value`` are None for curves without
    an interior maximum.
    """
    times = np.linspace(0.0, t_hi, samples + 1)
    if hasattr(curve, "sample"):
        values = np.asarray(curve.sample(times)[0])
    else:
        values = np.array([curve(t) for t in times])
    rising = values[1:-1] > values[:-2]
    falling = values[1:-1] >= values[2:]
    peaks = np.nonzero(rising & falling)[0]
    if len(peaks) == 0:
        return FirstMaximum(None, None, times, values)
    i = int(peaks[0]) + 1
    res = minimize_scalar(
        lambda t: -curve(t),
        bounds=(times[i - 1], times[i + 1]),
        method="bounded",
        options={"xatol": TOL.maximum_xtol},
    )
    t_star, v_star = float(res.x), float(-res.fun)
    if v_star < values[i]:
        t_star, v_star = float(times[i]), float(values[i])
    return FirstMaximum(t_star, v_star, times, values)


def encoding_horizon(omega0: float) -> float:
    """Encoding window holding the first maximum: two half-turn times."""
    return 2 * math.pi / omega0


@dataclass(frozen=True)
class CriticalOmega:
    omega_c: float
    tau_c: float
    value: float


def critical_omega(
    noise: Noise | str,
    gamma: float,
    transmission: Transmission | None = None,
    scan: Sequence[float] | None = None,
    xtol: float = 1e-6,
) -> CriticalOmega:
    """Rotation rate whose first Holevo maximum is exactly one bit.

    Raises:
        BracketError: if the first maximum never crosses 1 over the scan.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")

    def excess(w):
        fm = first_maximum(EncodingCurve(noise, gamma, w, transmission), encoding_horizon(w))
        return (fm.value if fm.found else 0.0) - 1.0

    omegas = list(scan) if scan is not None else list(gamma * np.geomspace(1.0, 100.0, 9))
    prev_w, prev_v = None, None
    for w in omegas:
        v = excess(w)
        if v >= 0:
            if prev_w is None:
                raise BracketError(f"first maximum already above 1 at omega0={w:g}; scanned {omegas}")
            w_c = brentq(excess, prev_w, w, xtol=xtol)
            fm = first_maximum(EncodingCurve(noise, gamma, w_c, transmission), encoding_horizon(w_c))
            return CriticalOmega(w_c, fm.t, fm.value)
        prev_w, prev_v = w, v
    raise BracketError(f"first maximum stays below 1 for omega0 in [{omegas[0]:g}, {omegas[-1]:g}]")


def transmission_value(family, gamma: float, total: float) -> float:
    """Holevo value for total transmission time ``total`` (each leg half)."""
    t0 = total / 2
    if family == AZ_AFTER_BZ:
        return holevo(alphabet_amp_phase(gamma, t0))
    return holevo(alphabet_pauli(family, gamma, t0, check=False))


@dataclass(frozen=True)
class CriticalTime:
    tau_c: float | None
    tau_d: float | None

    @property
    def ratio(self) -> float | None:
        if self.tau_c is None or self.tau_d is None:
            return None
        return self.tau_d / self.tau_c


def critical_time(family, gamma: float, horizon: float | None = None, samples: int = TOL.esd_grid) -> CriticalTime:
    """Total transmission time at which the Holevo value falls to one bit.

    ``family`` is a Pauli :class:`ChannelKind` or :data:`AZ_AFTER_BZ`.
    The default horizon is ``2/gamma``; ``tau_c`` is None when the value
    stays above 1 there. ``tau_d`` is the death time of the same shared
    state in the same (total) time units.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    horizon = 2.0 / gamma if horizon is None else horizon
    tau_d = esd_time(family, gamma).tau_d

    def excess(total):
        return transmission_value(family, gamma, total) - 1.0

    grid = np.linspace(0.0, horizon, samples + 1)
    prev = grid[0]
    for t in grid[1:]:
        if excess(t) <= 0:
            return CriticalTime(brentq(excess, prev, t, xtol=TOL.root_xtol), tau_d)
        prev = t
    return CriticalTime(None, tau_d)
