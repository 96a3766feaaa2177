"""Relabelings between the dimer, two-photon and spin-orbit bases.

Each scenario names which product-basis states play "ground" and "excited"
for its two subsystems. A :class:`ScenarioMap` is the permutation matching
those roles, so a state built in one basis is carried to the same state
built directly in another.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .measures import MeasureReport, full_report
from .states import ScenarioBasis, SingleExcitationState, embed_two_qubit


class ScenarioMapError(ValueError):
    pass


def _roles(basis: ScenarioBasis) -> Tuple[int, int, int, int]:
    info = basis.value
    return info.vacuum, info.first, info.second, info.double


@dataclass(frozen=True)
class ScenarioMap:
    source: ScenarioBasis
    target: ScenarioBasis
    # permutation[k] is the target index of source basis state k
    permutation: Tuple[int, int, int, int] = field(default=None)

    def __post_init__(self):
        if self.permutation is None:
            perm = [0] * 4
            for s, t in zip(_roles(self.source), _roles(self.target)):
                perm[s] = t
            object.__setattr__(self, "permutation", tuple(perm))
        perm = tuple(int(k) for k in self.permutation)
        if sorted(perm) != [0, 1, 2, 3]:
            raise ScenarioMapError(f"not a bijection on 0..3: {self.permutation}")
        src = set(self.source.single_excitation)
        if {perm[k] for k in src} != set(self.target.single_excitation):
            raise ScenarioMapError("map must send single-excitation states to single-excitation states")
        object.__setattr__(self, "permutation", perm)

    def matrix(self) -> np.ndarray:
        p = np.zeros((4, 4))
        for k, t in enumerate(self.permutation):
            p[t, k] = 1.0
        return p

    def inverse(self) -> "ScenarioMap":
        inv = [0] * 4
        for k, t in enumerate(self.permutation):
            inv[t] = k
        return ScenarioMap(self.target, self.source, tuple(inv))

    def then(self, other: "ScenarioMap") -> "ScenarioMap":
        """Apply ``self`` first, then ``other``."""
        if other.source is not self.target:
            raise ScenarioMapError(f"cannot compose {self.target.tag} with a map from {other.source.tag}")
        return ScenarioMap(self.source, other.target, tuple(other.permutation[t] for t in self.permutation))

    @classmethod
    def identity(cls, basis: ScenarioBasis) -> "ScenarioMap":
        return cls(basis, basis, (0, 1, 2, 3))


def map_scenario(rho, scenario_map: ScenarioMap) -> np.ndarray:
    """Conjugate ``rho`` by the permutation matrix of ``scenario_map``."""
    r = np.asarray(rho, dtype=complex)
    if r.shape != (4, 4):
        raise ScenarioMapError(f"expected a 4x4 matrix, got shape {r.shape}")
    p = scenario_map.matrix()
    return p @ r @ p.T


@dataclass
class InvarianceReport:
    reports: Dict[str, MeasureReport]
    # largest |difference| over all pairs of bases, per measure
    discrepancy: Dict[str, float]

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancy.values())

    def ok(self, tol: float = 1e-12) -> bool:
        return self.max_discrepancy <= tol


def verify_invariance(state: SingleExcitationState, optimize_chsh: bool = True) -> InvarianceReport:
    """Build ``state`` in every scenario basis and compare the measure reports."""
    reports = {b.tag: full_report(state, b, optimize_chsh=optimize_chsh) for b in ScenarioBasis}
    rows = [r.as_dict() for r in reports.values()]
    discrepancy = {}
    for name in rows[0]:
        vals = [row[name] for row in rows]
        if all(np.isnan(v) for v in vals):
            discrepancy[name] = 0.0
            continue
        discrepancy[name] = max(abs(a - b) for a, b in itertools.combinations(vals, 2))
    return InvarianceReport(reports, discrepancy)


def all_maps() -> List[ScenarioMap]:
    return [ScenarioMap(a, b) for a in ScenarioBasis for b in ScenarioBasis]


