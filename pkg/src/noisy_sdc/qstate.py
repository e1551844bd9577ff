"""Dense one- and two-qubit linear algebra.

Two-qubit operators are 4x4 complex numpy arrays in the basis
|00>, |01>, |10>, |11> with qubit A as the left tensor factor.
"""

from __future__ import annotations

import enum

import numpy as np

from .config import TOL


class Subsystem(enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Subsystem":
        return Subsystem.B if self is Subsystem.A else Subsystem.A


class InvalidStateError(ValueError):
    """A matrix failed one of the density-matrix checks."""


_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(m: int) -> np.ndarray:
    """Identity (m=0) or Pauli matrix sigma_m."""
    if not isinstance(m, (int, np.integer)) or not 0 <= m <= 3:
        raise ValueError(f"Pauli index must be 0..3, got {m!r}")
    return _PAULIS[m].copy()


def sigma_minus() -> np.ndarray:
    """Lowering operator (sigma_1 + i sigma_2)/2, which maps |1> to |0>."""
    return 0.5 * (_PAULIS[1] + 1j * _PAULIS[2])


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the qubit-A factor first."""
    return np.kron(a, b)


def on_qubit(op: np.ndarray, qubit: Subsystem) -> np.ndarray:
    """Embed a single-qubit operator on one side of the pair."""
    if qubit is Subsystem.A:
        return np.kron(op, _PAULIS[0])
    return np.kron(_PAULIS[0], op)


def bell_state() -> np.ndarray:
    """Projector onto (|00> + |11>)/sqrt(2)."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[0, 3] = rho[3, 0] = rho[3, 3] = 0.5
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def conjugate(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """u rho u^dagger."""
    return u @ rho @ u.conj().T


def partial_transpose(rho: np.ndarray, s: Subsystem = Subsystem.A) -> np.ndarray:
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if s is Subsystem.A:
        r = r.transpose(2, 1, 0, 3)
    else:
        r = r.transpose(0, 3, 2, 1)
    return r.reshape(4, 4)


def partial_trace(rho: np.ndarray, traced: Subsystem) -> np.ndarray:
    """Reduced 2x2 state after tracing out ``traced``."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if traced is Subsystem.A:
        return np.einsum("ijik->jk", r)
    return np.einsum("ijkj->ik", r)


def is_hermitian(m: np.ndarray, tol: float = TOL.hermitian) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()), initial=0.0) <= tol)


def jacobi_eigh(a: np.ndarray, tol: float = TOL.jacobi_offdiag) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``; every
    matrix in the stack is rotated with the same deterministic pair order.
    Each rotation first removes the phase of the pivot element with a
    diagonal unitary, then applies the real symmetric Jacobi rotation.

    Returns:
        Eigenvalues in ascending order and the matching column eigenvectors.

    Raises:
        RuntimeError: if the off-diagonal norm does not drop below ``tol``
            (scaled by the matrix norm) within the sweep limit.
    """
    a = np.array(a, dtype=complex)
    single = a.ndim == 2
    if single:
        a = a[None]
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape(-1, n, n)
    a = 0.5 * (a + a.conj().transpose(0, 2, 1))
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.maximum(np.linalg.norm(a, axis=(1, 2)), 1.0)
    offmask = ~np.eye(n, dtype=bool)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(TOL.jacobi_max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off < tol * scale):
            break
        for p, q in pairs:
            apq = a[:, p, q]
            r = np.abs(apq)
            active = r > 1e-300
            phase = np.where(active, apq / np.where(active, r, 1.0), 1.0)
            app = a[:, p, p].real
            aqq = a[:, q, q].real
            theta = np.where(active, (aqq - app) / (2.0 * np.where(active, r, 1.0)), 0.0)
            sgn = np.where(theta >= 0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # 2x2 block [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
            u = np.empty((a.shape[0], 2, 2), dtype=complex)
            u[:, 0, 0] = c
            u[:, 0, 1] = s
            u[:, 1, 0] = -s * phase.conj()
            u[:, 1, 1] = c * phase.conj()
            idx = [p, q]
            a[:, :, idx] = a[:, :, idx] @ u
            a[:, idx, :] = u.conj().transpose(0, 2, 1) @ a[:, idx, :]
            v[:, :, idx] = v[:, :, idx] @ u
            a[:, p, q] = 0.0
            a[:, q, p] = 0.0
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if not np.all(off < tol * scale):
            raise RuntimeError(f"Jacobi did not converge: off-diagonal norm {off.max():.3e}")

    w = np.diagonal(a, axis1=1, axis2=2).real
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    w = w.reshape(*batch_shape, n)
    v = v.reshape(*batch_shape, n, n)
    if single:
        return w[0], v[0]
    return w, v


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (or stack of them)."""
    m = np.asarray(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian to tolerance")
    return jacobi_eigh(m)[0]


def check_state(rho: np.ndarray, what: str = "state") -> np.ndarray:
    """Raise InvalidStateError unless rho is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.shape not in ((2, 2), (4, 4)):
        raise InvalidStateError(f"{what}: bad shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError(f"{what}: non-finite entries")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > TOL.hermitian:
        raise InvalidStateError(f"{what}: Hermiticity defect {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TOL.trace:
        raise InvalidStateError(f"{what}: trace {tr:.15g}")
    lam = hermitian_eigenvalues(rho)[0]
    if lam < -TOL.positivity:
        raise InvalidStateError(f"{what}: negative eigenvalue {lam:.3e}")
    return rho


def check_states(stack: np.ndarray, what: str = "state") -> np.ndarray:
    """Batched :func:`check_state` over a ``(k, d, d)`` stack."""
    stack = np.asarray(stack)
    if stack.ndim == 2:
        return check_state(stack, what)
    if not np.all(np.isfinite(stack)):
        raise InvalidStateError(f"{what}: non-finite entries")
    herm = np.max(np.abs(stack - stack.conj().transpose(0, 2, 1)), axis=(1, 2))
    tr = np.trace(stack, axis1=1, axis2=2)
    lam = jacobi_eigh(stack)[0][:, 0]
    bad = (herm > TOL.hermitian) | (np.abs(tr - 1.0) > TOL.trace) | (lam < -TOL.positivity)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvalidStateError(
            f"{what} #{i}: Hermiticity defect {herm[i]:.3e}, trace {tr[i]:.15g}, min eigenvalue {lam[i]:.3e}"
        )
    return stack


def _entropy_from_spectrum(w: np.ndarray) -> np.ndarray:
    p = np.clip(w, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def von_neumann_entropy(rho: np.ndarray) -> float | np.ndarray:
    """Entropy in bits; a stack of matrices gives an array of entropies."""
    rho = np.asarray(rho)
    s = _entropy_from_spectrum(hermitian_eigenvalues(rho))
    return float(s) if rho.ndim == 2 else s


def min_pt_eigenvalue(rho: np.ndarray) -> float | np.ndarray:
    """Smallest eigenvalue of the partial transpose; negative iff entangled."""
    rho = np.asarray(rho)
    pt = _stack_pt(rho)
    w = jacobi_eigh(pt)[0]
    out = w[..., 0]
    return float(out) if rho.ndim == 2 else out


def negativity(rho: np.ndarray) -> float | np.ndarray:
    """max{0, -2 * sum of negative eigenvalues of rho^{T_A}}."""
    rho = np.asarray(rho)
    w = jacobi_eigh(_stack_pt(rho))[0]
    n = np.maximum(0.0, -2.0 * np.where(w < 0.0, w, 0.0).sum(axis=-1))
    return float(n) if rho.ndim == 2 else n


def _stack_pt(rho: np.ndarray) -> np.ndarray:
    shape = rho.shape[:-2]
    r = rho.reshape(*shape, 2, 2, 2, 2)
    r = np.swapaxes(r, -4, -2)
    return r.reshape(*shape, 4, 4)


def random_state(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
