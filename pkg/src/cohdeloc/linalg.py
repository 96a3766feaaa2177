"""Dense complex linear algebra for small density matrices.

Matrices are plain ``numpy`` arrays of shape ``(dim, dim)`` with complex
dtype. Everything here is sized for ``dim <= 16``; the eigensolver is a
cyclic Jacobi method so results are reproducible bit for bit.

Two-qubit ordering is ``|00>, |01>, |10>, |11>`` with the first factor as the
most significant index.
"""

from __future__ import annotations

import math
from typing import Literal, NamedTuple, Tuple

import numpy as np

DEFAULT_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
MAX_DIM = 16

Subsystem = Literal["first", "second"]


class LinalgError(ValueError):
    """Raised when a matrix does not satisfy an operation's preconditions."""


class NotHermitianError(LinalgError):
    pass


class NotPSDError(LinalgError):
    pass


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a square complex array, rejecting anything else."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise LinalgError(f"expected a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise LinalgError(f"dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
    return a


def from_entries(dim: int, entries) -> np.ndarray:
    """Build a matrix from a row-major flat sequence of ``dim**2`` entries."""
    flat = np.asarray(entries, dtype=complex).ravel()
    if dim <= 0 or flat.size != dim * dim:
        raise LinalgError(f"need {dim * dim} entries for dim={dim}, got {flat.size}")
    return flat.reshape(dim, dim).copy()


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def trace_is_one(m, tol: float = DEFAULT_TOL) -> bool:
    return bool(abs(np.trace(np.asarray(m)) - 1.0) <= tol)


def is_psd(m, tol: float = DEFAULT_TOL) -> bool:
    """True if ``m`` is Hermitian with no eigenvalue below ``-tol``."""
    if not is_hermitian(m, tol):
        return False
    return bool(hermitian_eigenvalues(m, tol)[0] >= -tol)


def is_density_matrix(m, tol: float = DEFAULT_TOL) -> bool:
    return is_hermitian(m, tol) and trace_is_one(m, tol) and is_psd(m, tol)


def off_diagonal_norm(m) -> float:
    a = np.asarray(m)
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; ``a`` carries the most significant index."""
    return np.kron(as_matrix(a), as_matrix(b))


def _check_bipartite(rho, dims: Tuple[int, int]) -> np.ndarray:
    r = as_matrix(rho)
    d1, d2 = dims
    if d1 <= 0 or d2 <= 0 or r.shape[0] != d1 * d2:
        raise LinalgError(f"matrix of dim {r.shape[0]} does not match dims {dims}")
    return r


def partial_trace(rho, subsystem: Subsystem = "second", dims: Tuple[int, int] = (2, 2)) -> np.ndarray:
    """Trace out ``subsystem`` of a bipartite operator."""
    d1, d2 = dims
    r = _check_bipartite(rho, dims).reshape(d1, d2, d1, d2)
    if subsystem == "second":
        return np.einsum("ikjk->ij", r)
    if subsystem == "first":
        return np.einsum("kikj->ij", r)
    raise LinalgError(f"unknown subsystem {subsystem!r}")


def partial_transpose(rho, subsystem: Subsystem = "second", dims: Tuple[int, int] = (2, 2)) -> np.ndarray:
    """Transpose the indices of one subsystem only."""
    d1, d2 = dims
    r = _check_bipartite(rho, dims).reshape(d1, d2, d1, d2)
    if subsystem == "second":
        out = r.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        out = r.transpose(2, 1, 0, 3)
    else:
        raise LinalgError(f"unknown subsystem {subsystem!r}")
    return out.reshape(d1 * d2, d1 * d2).copy()


def _off_norm(a) -> float:
    n = len(a)
    return math.sqrt(sum(abs(a[i][k]) ** 2 for i in range(n) for k in range(n) if i != k))


def _jacobi(m: np.ndarray, tol: float, max_sweeps: int) -> Tuple[np.ndarray, np.ndarray, int]:
    """Cyclic complex Jacobi. Returns (diagonalized copy, unitary V, sweeps).

    Works on nested lists of Python complex numbers: at dim <= 16 the
    per-call overhead of numpy slicing costs more than the arithmetic.
    """
    n = m.shape[0]
    a = [[complex(x) for x in row] for row in m.tolist()]
    v = [[1.0 + 0j if i == k else 0j for k in range(n)] for i in range(n)]
    off0 = _off_norm(a)
    sweeps = 0
    while sweeps < max_sweeps:
        off = _off_norm(a)
        if off == 0.0 or off <= tol * off0:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r == 0.0:
                    continue
                # phase-rotate the pair to a real symmetric 2x2, then a real rotation.
                # Scale before normalizing: for subnormal a_pq, |a_pq| is too coarse
                # to give a unit-modulus phase directly
                big = max(abs(apq.real), abs(apq.imag))
                u = complex(apq.real / big, apq.imag / big)
                u /= abs(u)
                gap = a[q][q].real - a[p][p].real
                if abs(gap) + r == abs(gap):
                    # tiny angle; theta = gap / 2r would overflow
                    t = r / gap
                else:
                    theta = gap / (2.0 * r)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                uc = u.conjugate()
                su, cu, suc, cuc = s * u, c * u, s * uc, c * uc
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x - suc * y
                    row[q] = s * x + cuc * y
                rp, rq = a[p], a[q]
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x - su * y
                    rq[k] = s * x + cu * y
                rp[q] = rq[p] = 0j
                rp[p] = complex(rp[p].real)
                rq[q] = complex(rq[q].real)
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x - suc * y
                    row[q] = s * x + cuc * y
    return np.array(a, dtype=complex), np.array(v, dtype=complex), sweeps


class JacobiResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    initial_off_norm: float
    final_off_norm: float


def jacobi_diagonalize(m, tol: float = DEFAULT_TOL) -> JacobiResult:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back ascending with matching eigenvector columns.
    Sweeping stops once the off-diagonal Frobenius norm has dropped below
    ``JACOBI_TOL`` times its starting value, or after ``JACOBI_MAX_SWEEPS``.

    Raises
    ------
    NotHermitianError
        If ``m`` deviates from its adjoint by more than ``tol``.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise NotHermitianError("eigensolver requires a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    off0 = off_diagonal_norm(a)
    d, v, sweeps = _jacobi(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    w = d.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return JacobiResult(w[order], v[:, order], sweeps, off0, off_diagonal_norm(d))


def hermitian_eigh(m, tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, np.ndarray]:
    r = jacobi_diagonalize(m, tol)
    return r.eigenvalues, r.eigenvectors


def hermitian_eigenvalues(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    return jacobi_diagonalize(m, tol).eigenvalues


def clamp_eigenvalues(w: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Zero out roundoff negatives in ``(-tol, 0)``; reject anything lower."""
    if w.size and w.min() < -tol:
        raise NotPSDError(f"eigenvalue {w.min():.3e} below -{tol:g}; matrix is not PSD")
    return np.where(w < 0.0, 0.0, w)


def sqrt_psd(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    w, v = hermitian_eigh(m, tol)
    w = clamp_eigenvalues(w, tol)
    return (v * np.sqrt(w)) @ v.conj().T
