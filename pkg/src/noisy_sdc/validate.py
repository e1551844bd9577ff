"""Cross-checks between the integrator and the Kraus maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import Channel, ChannelKind, analytic_apply, compose, evolve, kraus_for, spec_for
from .qstate import (
    Subsystem,
    check_state,
    conjugate,
    negativity,
    on_qubit,
    pauli,
    random_state,
    random_unitary,
)


@dataclass
class SuiteResult:
    name: str
    value: float
    tolerance: float
    # True when value must stay below tolerance, False when it must exceed it
    upper: bool = True
    worst: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.tolerance if self.upper else self.value >= self.tolerance

    def line(self) -> str:
        rel = "<=" if self.upper else ">="
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (required {rel} {self.tolerance:.1e})"


def _random_points(rng: np.random.Generator, n: int, max_gt: float = 3.0):
    for _ in range(n):
        gamma = float(rng.uniform(0.1, 2.0))
        yield gamma, float(rng.uniform(0.0, max_gt)) / gamma


def oracle_suite(rng, points: int = 20, states: int = 10, tol: float = 1e-8) -> SuiteResult:
    """Kraus map against fine-step RK4 for every kind on random inputs."""
    worst, info = 0.0, {}
    rhos = [random_state(rng) for _ in range(states)]
    for kind in ChannelKind:
        for gamma, t in _random_points(rng, points):
            spec = spec_for(kind, gamma)
            for i, rho in enumerate(rhos):
                dev = float(np.max(np.abs(analytic_apply(kind, gamma, t, rho) - evolve(rho, spec, t))))
                if dev > worst:
                    worst, info = dev, {"kind": kind.value, "gamma": gamma, "t": t, "state": i}
    return SuiteResult("analytic vs integrator", worst, tol, worst=info)


def cptp_suite(rng, points: int = 20, tol: float = 1e-12) -> SuiteResult:
    worst, info = 0.0, {}
    for kind in ChannelKind:
        for gamma, t in _random_points(rng, points):
            ks = kraus_for(kind, gamma, t)
            dev = ks.completeness_defect()
            check_state(ks.apply(random_state(rng)), what=f"{kind.value} output")
            if dev > worst:
                worst, info = dev, {"kind": kind.value, "gamma": gamma, "t": t}
    return SuiteResult("Kraus completeness", worst, tol, worst=info)


def semigroup_suite(rng, points: int = 20, tol: float = 1e-10) -> SuiteResult:
    worst, info = 0.0, {}
    for kind in ChannelKind:
        for gamma, t in _random_points(rng, points):
            t1 = float(rng.uniform(0, t))
            rho = random_state(rng)
            whole = analytic_apply(kind, gamma, t, rho)
            split = compose(Channel(kind, gamma, t1), Channel(kind, gamma, t - t1), rho)
            dev = float(np.max(np.abs(whole - split)))
            if dev > worst:
                worst, info = dev, {"kind": kind.value, "gamma": gamma, "t1": t1, "t2": t - t1}
    return SuiteResult("semigroup", worst, tol, worst=info)


def local_unitary_suite(rng, states: int = 100, tol: float = 1e-10) -> SuiteResult:
    """Negativity is unchanged by Pauli and random local unitaries."""
    worst, info = 0.0, {}
    for i in range(states):
        rho = random_state(rng)
        n0 = negativity(rho)
        ops = [on_qubit(pauli(m), Subsystem.A) for m in range(4)]
        ops.append(np.kron(random_unitary(rng), random_unitary(rng)))
        for j, u in enumerate(ops):
            dev = abs(negativity(conjugate(rho, u)) - n0)
            if dev > worst:
                worst, info = dev, {"state": i, "op": j}
    return SuiteResult("local-unitary invariance of negativity", worst, tol, worst=info)


def convergence_order(kind: ChannelKind = ChannelKind.BX, gamma: float = 1.0, t: float = 3.0, n: int = 20) -> float:
    """log2 of the error ratio when the RK4 step is halved."""
    rho0 = random_state(np.random.default_rng(7))
    exact = analytic_apply(kind, gamma, t, rho0)
    spec = spec_for(kind, gamma)
    errs = [float(np.max(np.abs(evolve(rho0, spec, t, step=t / k) - exact))) for k in (n, 2 * n)]
    return math.log2(errs[0] / errs[1])


def order_suite(tol: float = 3.7) -> SuiteResult:
    orders = {kind.value: convergence_order(kind) for kind in (ChannelKind.XZ, ChannelKind.DEPOL, ChannelKind.BX)}
    worst = min(orders, key=orders.get)
    return SuiteResult("RK4 convergence order", orders[worst], tol, upper=False, worst={"kind": worst, **orders})


def run_all(seed: int = 0, tolerance: float | None = None) -> list[SuiteResult]:
    """Every suite; ``tolerance`` replaces the threshold of each deviation suite."""
    rng = np.random.default_rng(seed)
    results = [
        oracle_suite(rng),
        cptp_suite(rng),
        semigroup_suite(rng),
        local_unitary_suite(rng),
        order_suite(),
    ]
    if tolerance is not None:
        for r in results:
            if r.upper:
                r.tolerance = tolerance
    return results
