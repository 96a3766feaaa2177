"""Single-excitation density matrices and their two-qubit embeddings.

A single excitation shared by N sites with amplitudes ``alpha`` and degree of
coherence ``eps`` has the density matrix

    rho_ii = |alpha_i|^2,    rho_ij = eps * conj(alpha_i) * alpha_j   (i != j)

i.e. a mixture ``eps |Psi><Psi| + (1 - eps) diag(p)``. The off-diagonal
convention (upper-right entry ``eps * conj(alpha_1) * alpha_2``) is shared by
every scenario embedding below.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

NORM_TOL = 1e-10


class StateError(ValueError):
    """Invalid parameters for a single-excitation state."""


def _check_epsilon(epsilon: float) -> float:
    eps = float(epsilon)
    if not math.isfinite(eps) or eps < 0.0 or eps > 1.0:
        raise StateError(f"eps out of [0,1]: {epsilon!r}")
    return eps


def _check_amplitudes(amplitudes) -> np.ndarray:
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if amps.size == 0:
        raise StateError("need at least one amplitude")
    if not np.all(np.isfinite(amps)):
        raise StateError("amplitudes must be finite")
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise StateError(f"amplitudes not normalized: sum |alpha|^2 = {norm!r}")
    return amps


@dataclass(frozen=True)
class SingleExcitationState:
    """N site amplitudes plus the degree-of-coherence parameter."""

    amplitudes: np.ndarray
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _check_amplitudes(self.amplitudes))
        object.__setattr__(self, "epsilon", _check_epsilon(self.epsilon))
        self.amplitudes.setflags(write=False)

    @classmethod
    def dimer(cls, p1: float, epsilon: float, phase: float = 0.0) -> "SingleExcitationState":
        p1 = float(p1)
        if not math.isfinite(p1) or p1 < 0.0 or p1 > 1.0:
            raise StateError(f"p1 out of [0,1]: {p1!r}")
        phase = float(phase)
        if not math.isfinite(phase):
            raise StateError(f"phase must be finite: {phase!r}")
        amps = [math.sqrt(p1), cmath.exp(1j * phase) * math.sqrt(1.0 - p1)]
        return cls(np.array(amps, dtype=complex), epsilon)

    @property
    def n_sites(self) -> int:
        return int(self.amplitudes.size)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density_matrix(self) -> np.ndarray:
        a = self.amplitudes
        rho = self.epsilon * np.outer(a.conj(), a)
        # mirror the upper triangle so rho is Hermitian to the last bit
        lower = np.tril_indices(a.size, -1)
        rho[lower] = rho.T[lower].conj()
        np.fill_diagonal(rho, self.probabilities)
        return rho

    def __eq__(self, other):
        if not isinstance(other, SingleExcitationState):
            return NotImplemented
        return self.epsilon == other.epsilon and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash((self.epsilon, self.amplitudes.tobytes()))


def build_nsite(amplitudes: Sequence[complex], epsilon: float) -> np.ndarray:
    """N x N density matrix for amplitudes ``alpha`` and coherence ``eps``."""
    return SingleExcitationState(amplitudes, epsilon).density_matrix()


def build_dimer(p1: float, epsilon: float, phase: float = 0.0) -> np.ndarray:
    """2 x 2 dimer matrix with ``alpha = (sqrt(p1), e^{i phase} sqrt(1 - p1))``."""
    return SingleExcitationState.dimer(p1, epsilon, phase).density_matrix()


@dataclass(frozen=True)
class _BasisInfo:
    labels: Tuple[str, str, str, str]
    # indices in the 4-dim product basis, first factor most significant
    first: int  # hosts alpha_1
    second: int  # hosts alpha_2
    vacuum: int  # both subsystems in their "ground" state
    double: int  # both "excited"; never populated


class ScenarioBasis(Enum):
    """Physical settings whose two-qubit states share one mathematical form.

    ``labels`` lists the product basis in matrix order. ``single_excitation``
    gives the indices carrying ``alpha_1`` and ``alpha_2``.
    """

    # ground = |0>, excited = |1>; site 1 excited is |e,g>
    DIMER = _BasisInfo(("|g,g⟩", "|g,e⟩", "|e,g⟩", "|e,e⟩"), first=2, second=1, vacuum=0, double=3)
    # H excited, V ground on both photons
    TWO_PHOTON_ANTIPARALLEL = _BasisInfo(
        ("|H⟩s|H⟩i", "|H⟩s|V⟩i", "|V⟩s|H⟩i", "|V⟩s|V⟩i"), first=1, second=2, vacuum=3, double=0
    )
    # H and OAM +1 excited, V and -1 ground
    SPIN_ORBIT = _BasisInfo(("|H,+1⟩", "|H,-1⟩", "|V,+1⟩", "|V,-1⟩"), first=1, second=2, vacuum=3, double=0)
    # alpha_1 |V V> + alpha_2 |H H>: the signal photon's roles swap, V excited
    TWO_PHOTON_PARALLEL = _BasisInfo(
        ("|H⟩s|H⟩i", "|H⟩s|V⟩i", "|V⟩s|H⟩i", "|V⟩s|V⟩i"), first=3, second=0, vacuum=1, double=2
    )

    @property
    def tag(self) -> str:
        return self.name.lower()

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.value.labels

    @property
    def single_excitation(self) -> Tuple[int, int]:
        return self.value.first, self.value.second

    @property
    def unpopulated(self) -> Tuple[int, int]:
        return self.value.vacuum, self.value.double

    @classmethod
    def from_tag(cls, tag: str) -> "ScenarioBasis":
        try:
            return cls[tag.upper()]
        except KeyError:
            raise StateError(f"unknown scenario basis {tag!r}") from None


def embed_two_qubit(state: SingleExcitationState, basis: ScenarioBasis = ScenarioBasis.DIMER) -> np.ndarray:
    """Place a two-site state into the 4 x 4 product space of ``basis``.

    The vacuum-like and doubly-excited rows and columns stay exactly zero.
    """
    if state.n_sites != 2:
        raise StateError(f"two-qubit embedding needs 2 sites, got {state.n_sites}")
    small = state.density_matrix()
    idx = list(basis.single_excitation)
    rho = np.zeros((4, 4), dtype=complex)
    rho[np.ix_(idx, idx)] = small
    return rho


def reduce_two_qubit(rho, basis: ScenarioBasis = ScenarioBasis.DIMER) -> np.ndarray:
    """Inverse of :func:`embed_two_qubit`: the 2 x 2 block in site order."""
    idx = list(basis.single_excitation)
    return np.asarray(rho, dtype=complex)[np.ix_(idx, idx)].copy()


def pure_state_vector(state: SingleExcitationState, basis: ScenarioBasis = ScenarioBasis.DIMER) -> np.ndarray:
    """4-vector whose projector is the eps=1 embedding of ``state``.

    The entry order matches the stored convention, so the vector holds
    ``conj(alpha)``.
    """
    if state.n_sites != 2:
        raise StateError(f"two-qubit embedding needs 2 sites, got {state.n_sites}")
    psi = np.zeros(4, dtype=complex)
    i, j = basis.single_excitation
    psi[i], psi[j] = state.amplitudes.conj()
    return psi
