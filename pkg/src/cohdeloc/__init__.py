"""Entanglement as coherent delocalization of a single excitation.

Builds single-excitation density matrices for an N-site network, a
two-photon polarization state and a single-photon spin-orbit state, and
computes coherence, delocalization, concurrence, negativity and CHSH values
for them with independent cross-checks.
"""

__version__ = "0.1.0"

from .measures import (  # noqa: E402
    MeasureReport,
    chsh_horodecki,
    chsh_optimize,
    concurrence_closed,
    concurrence_wootters,
    degree_of_coherence,
    delocalization,
    full_report,
    identity_residual,
    log_negativity,
    purity,
    schmidt_coefficients,
)
from .scenarios import ScenarioMap, map_scenario, verify_invariance  # noqa: E402
from .speclang import StateSpec, evaluate, format_spec, parse  # noqa: E402
from .states import (  # noqa: E402
    ScenarioBasis,
    SingleExcitationState,
    build_dimer,
    build_nsite,
    embed_two_qubit,
)
