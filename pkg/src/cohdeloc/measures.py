"""Coherence, delocalization and entanglement measures for the dimer family.

All two-qubit measures take a 4 x 4 density matrix and validate it first.
Concurrence, CHSH and negativity are computed with general-purpose
formulas, so for single-excitation states they act as independent checks
of the closed forms ``C = 2 eps sqrt(p1 p2)`` and ``D = 2 sqrt(p1 p2)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from . import linalg
from .linalg import DEFAULT_TOL, PAULIS
from .optimize import nelder_mead
from .states import ScenarioBasis, SingleExcitationState, embed_two_qubit

SIGMA_YY = linalg.tensor_product(linalg.PAULI_Y, linalg.PAULI_Y)
TSIRELSON = 2.0 * math.sqrt(2.0)


class MeasureError(ValueError):
    """Inputs outside the domain of a measure."""


class NonPhysicalError(MeasureError):
    """Matrix is not a valid density matrix."""


def check_density_matrix(rho, dim: int | None = 4, tol: float = DEFAULT_TOL) -> np.ndarray:
    try:
        r = linalg.as_matrix(rho)
    except linalg.LinalgError as exc:
        raise NonPhysicalError(str(exc)) from None
    if dim is not None and r.shape[0] != dim:
        raise NonPhysicalError(f"expected a {dim}x{dim} matrix, got {r.shape[0]}x{r.shape[0]}")
    if not linalg.is_hermitian(r, tol):
        raise NonPhysicalError("density matrix is not Hermitian")
    if not linalg.trace_is_one(r, tol):
        raise NonPhysicalError(f"density matrix trace is {np.trace(r).real!r}, not 1")
    if not linalg.is_psd(r, tol):
        raise NonPhysicalError("density matrix has a negative eigenvalue")
    return r


def _check_probability(name: str, p: float, tol: float = DEFAULT_TOL) -> float:
    p = float(p)
    if not math.isfinite(p) or p < -tol or p > 1.0 + tol:
        raise MeasureError(f"{name} out of [0,1]: {p!r}")
    return min(max(p, 0.0), 1.0)


def coherence_from_matrix(rho, i: int, j: int) -> complex:
    """Normalized first-order coherence ``rho_ji / sqrt(rho_ii rho_jj)``.

    Within the single-excitation manifold ``tr(rho s_i^+ s_j)`` is the matrix
    element ``rho_ji``, so no ladder operators are built.
    """
    r = np.asarray(rho)
    if i == j:
        raise MeasureError("coherence needs two distinct sites")
    pi, pj = r[i, i].real, r[j, j].real
    if pi <= 0.0 or pj <= 0.0:
        raise MeasureError("coherence undefined for unpopulated site")
    return complex(r[j, i] / math.sqrt(pi * pj))


def degree_of_coherence(state: SingleExcitationState, i: int, j: int) -> complex:
    """Degree of first-order coherence between sites ``i`` and ``j`` (0-based)."""
    n = state.n_sites
    if not (0 <= i < n and 0 <= j < n):
        raise MeasureError(f"site index out of range for {n} sites: ({i}, {j})")
    return coherence_from_matrix(state.density_matrix(), i, j)


def delocalization(p1: float, p2: float) -> float:
    """``D = 2 sqrt(p1 p2)``; 1 for an evenly shared excitation, 0 if localized."""
    p1 = _check_probability("p1", p1)
    p2 = _check_probability("p2", p2)
    if p1 + p2 > 1.0 + DEFAULT_TOL:
        raise MeasureError(f"p1 + p2 exceeds 1: {p1 + p2!r}")
    return min(1.0, 2.0 * math.sqrt(p1 * p2))


def concurrence_closed(p1: float, p2: float, epsilon: float) -> float:
    """``C = 2 max(0, eps sqrt(p1 p2))`` for the single-excitation family."""
    eps = _check_probability("eps", epsilon)
    c = 2.0 * max(0.0, eps * math.sqrt(_check_probability("p1", p1) * _check_probability("p2", p2)))
    return min(1.0, c)


def singular_values(x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Singular values of a square matrix, descending.

    Read off the Hermitian block matrix ``[[0, X], [X^H, 0]]`` whose spectrum
    is ``+-sigma``. Unlike eigenvalues of ``X X^H`` this keeps small singular
    values accurate to roundoff instead of its square root.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, n:] = x
    big[n:, :n] = x.conj().T
    w = linalg.hermitian_eigenvalues(big, tol)
    return np.maximum(w[::-1][:n], 0.0)


def wootters_lambdas(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho rho~``, descending.

    These are the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))`` and
    equally the singular values of ``sqrt(rho) sqrt(rho~)``, which is how they
    are computed here.
    """
    r = check_density_matrix(rho, 4, tol)
    root = linalg.sqrt_psd(r, tol)
    root_tilde = SIGMA_YY @ root.conj() @ SIGMA_YY
    return singular_values(root @ root_tilde, tol)


def concurrence_wootters(rho, tol: float = DEFAULT_TOL) -> float:
    lam = wootters_lambdas(rho, tol)
    return min(1.0, max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3])))


def identity_residual(state: SingleExcitationState) -> float:
    """``|C - eps * D|`` with ``C`` from the general two-qubit formula."""
    if state.n_sites != 2:
        raise MeasureError("identity residual is defined for two sites")
    p1, p2 = state.probabilities
    c = concurrence_wootters(embed_two_qubit(state))
    return abs(c - state.epsilon * delocalization(p1, p2))


def partial_transpose_spectrum(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    r = check_density_matrix(rho, 4, tol)
    return linalg.hermitian_eigenvalues(linalg.partial_transpose(r, "second", (2, 2)), tol)


def log_negativity(rho, tol: float = DEFAULT_TOL) -> float:
    """Base-2 logarithmic negativity ``log2 ||rho^T_B||_1``."""
    w = partial_transpose_spectrum(rho, tol)
    return max(0.0, math.log2(float(np.sum(np.abs(w)))))


def correlation_matrix(rho) -> np.ndarray:
    """``T[a, b] = tr(rho sigma_a (x) sigma_b)`` for a, b in x, y, z."""
    r = np.asarray(rho, dtype=complex)
    t = np.empty((3, 3))
    for a, sa in enumerate(PAULIS):
        for b, sb in enumerate(PAULIS):
            t[a, b] = np.trace(r @ np.kron(sa, sb)).real
    return t


def chsh_horodecki(rho, tol: float = DEFAULT_TOL) -> float:
    """Maximal CHSH value ``2 sqrt(m1 + m2)`` from the two largest eigenvalues of T^T T."""
    r = check_density_matrix(rho, 4, tol)
    t = correlation_matrix(r)
    m = linalg.hermitian_eigenvalues(t.T @ t, tol)
    return 2.0 * math.sqrt(max(0.0, m[-1] + m[-2]))


@dataclass(frozen=True)
class ChshResult:
    value: float
    # (theta, phi) for a, a', b, b' in that order
    angles: Tuple[float, float, float, float, float, float, float, float]

    @property
    def violation(self) -> bool:
        return self.value > 2.0


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def _angles_of(v) -> Tuple[float, float]:
    x, y, z = v
    return math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x)


def correlator(rho, a, b) -> float:
    """``E(a, b) = tr(rho (a.sigma) (x) (b.sigma))`` for Bloch vectors a, b."""
    sa = sum(c * s for c, s in zip(a, PAULIS))
    sb = sum(c * s for c, s in zip(b, PAULIS))
    return float(np.trace(np.asarray(rho) @ np.kron(sa, sb)).real)


def chsh_value(rho, angles) -> float:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b') at the given spherical angles."""
    a, a2, b, b2 = (bloch_vector(angles[2 * k], angles[2 * k + 1]) for k in range(4))
    return correlator(rho, a, b) - correlator(rho, a, b2) + correlator(rho, a2, b) + correlator(rho, a2, b2)


def _fibonacci_sphere(n: int):
    golden = math.pi * (3.0 - math.sqrt(5.0))
    for k in range(n):
        z = 1.0 - (2.0 * k + 1.0) / n
        yield math.acos(z), (golden * k) % (2.0 * math.pi)


_SPHERE = list(_fibonacci_sphere(32))
# b from one Fibonacci point, b' from another; 13k + 7 never equals k mod 32
CHSH_STARTS = tuple((*_SPHERE[k], *_SPHERE[(13 * k + 7) % 32]) for k in range(32))


def _reduced_chsh(x, t) -> float:
    # For fixed b, b' the best a, a' point along T(b - b') and T(b + b').
    sin, cos = math.sin, math.cos
    s0 = sin(x[0])
    s2 = sin(x[2])
    b = (s0 * cos(x[1]), s0 * sin(x[1]), cos(x[0]))
    b2 = (s2 * cos(x[3]), s2 * sin(x[3]), cos(x[2]))
    d = (b[0] - b2[0], b[1] - b2[1], b[2] - b2[2])
    s = (b[0] + b2[0], b[1] + b2[1], b[2] + b2[2])
    n1 = n2 = 0.0
    for row in t:
        u = row[0] * d[0] + row[1] * d[1] + row[2] * d[2]
        w = row[0] * s[0] + row[1] * s[1] + row[2] * s[2]
        n1 += u * u
        n2 += w * w
    return math.sqrt(n1) + math.sqrt(n2)


def chsh_optimize(rho, tol: float = DEFAULT_TOL) -> ChshResult:
    """Maximize the CHSH combination numerically over measurement directions.

    Deterministic multi-start search: a short simplex run from each of the 32
    fixed starting pairs (b, b'), then repeated polishing of the best one.
    Alice's directions are optimal in closed form for given (b, b').
    """
    r = check_density_matrix(rho, 4, tol)
    t = correlation_matrix(r).tolist()

    def neg(x):
        return -_reduced_chsh(x, t)

    best_x, best_f = None, math.inf
    for x0 in CHSH_STARTS:
        x, fx, _ = nelder_mead(neg, x0, step=0.4, xatol=1e-4, fatol=1e-9, maxfev=80)
        if fx < best_f:
            best_x, best_f = x, fx
    for _ in range(10):
        x, fx, _ = nelder_mead(neg, best_x, step=0.05, xatol=1e-10, fatol=1e-14, maxfev=4000)
        improved = best_f - fx
        best_x, best_f = x, min(fx, best_f)
        if improved <= 1e-13:
            break

    tm = np.array(t)
    b = bloch_vector(best_x[0], best_x[1])
    b2 = bloch_vector(best_x[2], best_x[3])
    angles = []
    for v in (tm @ (b - b2), tm @ (b + b2)):
        norm = float(np.linalg.norm(v))
        angles.extend(_angles_of(v / norm) if norm > 0.0 else (0.0, 0.0))
    angles.extend(best_x)
    angles = tuple(float(a) for a in angles)
    return ChshResult(chsh_value(r, angles), angles)


def schmidt_coefficients(pure_state, tol: float = DEFAULT_TOL) -> Tuple[float, float]:
    """Schmidt coefficients of a two-qubit pure state, descending."""
    psi = np.asarray(pure_state, dtype=complex).ravel()
    if psi.size != 4:
        raise MeasureError(f"expected a two-qubit state vector, got length {psi.size}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > tol:
        raise MeasureError(f"state vector not normalized: <psi|psi> = {norm!r}")
    s = singular_values(psi.reshape(2, 2), tol)
    return float(s[0]), float(s[1])


def purity(rho) -> float:
    r = np.asarray(rho)
    return float(np.sum(np.abs(r) ** 2))


@dataclass(frozen=True)
class MeasureReport:
    epsilon_measured: float
    delocalization: float
    concurrence_closed: float
    concurrence_oracle: float
    log_negativity: float
    chsh_horodecki: float
    chsh_optimized: float
    purity: float
    identity_residual: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def full_report(
    state: SingleExcitationState, basis: ScenarioBasis = ScenarioBasis.DIMER, optimize_chsh: bool = True
) -> MeasureReport:
    """Every measure of a two-site state, computed from its embedding in ``basis``.

    ``epsilon_measured`` is the modulus of the degree of coherence read from
    the embedded matrix. It equals ``eps`` for every populated pair, so when a
    site is empty the report uses that limit, the state's ``eps``.
    With ``optimize_chsh=False`` the numerical CHSH search is skipped and
    ``chsh_optimized`` is NaN.
    """
    if state.n_sites != 2:
        raise MeasureError("full report needs a two-site state")
    return report_from_matrix(embed_two_qubit(state, basis), basis, state.epsilon, optimize_chsh)


def report_from_matrix(
    rho,
    basis: ScenarioBasis = ScenarioBasis.DIMER,
    epsilon_if_unpopulated: float = math.nan,
    optimize_chsh: bool = True,
) -> MeasureReport:
    """Measures of a 4 x 4 single-excitation matrix living in ``basis``."""
    rho = check_density_matrix(rho)
    i, j = basis.single_excitation
    p1, p2 = rho[i, i].real, rho[j, j].real
    try:
        eps = abs(coherence_from_matrix(rho, i, j))
    except MeasureError:
        eps = float(epsilon_if_unpopulated)
    d = delocalization(p1, p2)
    c_oracle = concurrence_wootters(rho)
    c_closed = concurrence_closed(p1, p2, eps) if math.isfinite(eps) else 0.0
    return MeasureReport(
        epsilon_measured=eps,
        delocalization=d,
        concurrence_closed=c_closed,
        concurrence_oracle=c_oracle,
        log_negativity=log_negativity(rho),
        chsh_horodecki=chsh_horodecki(rho),
        chsh_optimized=chsh_optimize(rho).value if optimize_chsh else math.nan,
        purity=purity(rho),
        identity_residual=abs(c_oracle - eps * d) if math.isfinite(eps) else c_oracle,
    )
