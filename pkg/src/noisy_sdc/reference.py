"""Published reference values: printed Bell-state outputs and constants.

Every published number the package reproduces is declared here once and
consumed by the regression commands and the acceptance tests.
"""

from __future__ import annotations

import math

import numpy as np

from .channels import ChannelKind


def printed_bell_output(kind: ChannelKind, gamma: float, t: float, gamma3: float | None = None) -> np.ndarray:
    """Printed closed-form output of a channel acting on the Bell state.

    Pauli kinds act on qubit B. For XZ, ``gamma`` is the bit-flip rate and
    ``gamma3`` the phase rate (defaults to ``gamma``).
    """
    e = math.exp
    x = gamma * t
    if kind is ChannelKind.Z:
        c = e(-2 * x)
        return 0.5 * np.array([[1, 0, 0, c], [0, 0, 0, 0], [0, 0, 0, 0], [c, 0, 0, 1]], dtype=complex)
    if kind in (ChannelKind.X, ChannelKind.XZ):
        p, m = 1 + e(-2 * x), 1 - e(-2 * x)
        d = 1.0 if kind is ChannelKind.X else e(-2 * (gamma if gamma3 is None else gamma3) * t)
        return 0.25 * np.array(
            [[p, 0, 0, d * p], [0, m, d * m, 0], [0, d * m, m, 0], [d * p, 0, 0, p]], dtype=complex
        )
    if kind in (ChannelKind.B, ChannelKind.A):
        c, q = e(-x / 2), 1 - e(-x)
        out = np.array([[1, 0, 0, c], [0, 0, 0, 0], [0, 0, 0, 0], [c, 0, 0, e(-x)]], dtype=complex)
        i = 2 if kind is ChannelKind.B else 1
        out[i, i] = q
        return 0.5 * out
    if kind is ChannelKind.BX:
        e3 = e(-3 * x)
        ch = 3 * e(-1.5 * x) * math.cosh(x)
        sh = 3 * e(-1.5 * x) * math.sinh(x)
        return (
            np.array(
                [[2 + e3, 0, 0, ch], [0, 1 - e3, sh, 0], [0, sh, 2 * (1 - e3), 0], [ch, 0, 0, 1 + 2 * e3]],
                dtype=complex,
            )
            / 6.0
        )
    raise ValueError(f"no printed Bell output for {kind.value}")


def printed_az_after_bz(gamma: float, t0: float) -> np.ndarray:
    """Printed state after amplitude+phase noise on B and then on A, each for t0."""
    e1 = math.exp(-gamma * t0)
    mid = e1 * (1 - e1)
    return 0.5 * np.array(
        [
            [1 + (1 - e1) ** 2, 0, 0, math.exp(-5 * gamma * t0)],
            [0, mid, 0, 0],
            [0, 0, mid, 0],
            [math.exp(-5 * gamma * t0), 0, 0, e1 * e1],
        ],
        dtype=complex,
    )


OMEGA0_GRID = (1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3)

# ESD times of the phase-noise X rotation
TABLE_I = {
    0.1: (27.2453, 12.4897, 8.82654, 8.81375, 8.81374, 8.81374),
    0.2: (16.3894, 8.05990, 4.47185, 4.40687, 4.40687, 4.40687),
}

# ESD times of the amplitude-noise X rotation
TABLE_II = {
    0.1: (93.2803, 29.1270, 16.9282, 16.7860, 16.7847, 16.7847),
    0.2: (60.0374, 21.3006, 8.70814, 8.39552, 8.39239, 8.35235),
}

TABLE_TOLERANCE = {"I": 1e-3, "II": 1e-2}

# Breaks the convergent large-omega0 trend; compared against the
# neighbouring omega0 = 1e2 cell instead of the printed value.
FLAGGED_CELLS = frozenset({("II", 0.2, 1e3)})

# ESD times in units of 1/gamma
ESD_XZ = -math.log(math.sqrt(2) - 1) / 2
ESD_DEPOL = math.log(3) / 4
ESD_BX = 0.747282
ESD_AZ_BZ = 0.644569

# critical total transmission times in units of 1/gamma
CRITICAL_XZ = 0.124266
CRITICAL_AMP_PHASE = 0.172879

# phase-noise encoding, gamma = 0.1, omega0 = 1
ENCODING_GAMMA = 0.1
ENCODING_FIRST_MAX = 1.23928
ENCODING_FIRST_MAX_TIME = 2.75085
CRITICAL_OMEGA = 0.56
CRITICAL_OMEGA_TIME = 4.68027
