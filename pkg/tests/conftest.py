import numpy as np
import pytest
from hypothesis import settings

from cohdeloc import cli, linalg, measures, scenarios, states

settings.register_profile("default", max_examples=60, deadline=None)
# pytest --hypothesis-profile=thorough for a long property run
settings.register_profile("thorough", max_examples=3000, deadline=None)
settings.load_profile("default")


class PhysicalityAudit:
    """Checks every density matrix materialized while the suite runs."""

    def __init__(self):
        self.count = 0
        self.failures = []

    def check(self, rho):
        self.count += 1
        tol = 1e-10
        if not (linalg.is_hermitian(rho, tol) and linalg.trace_is_one(rho, tol) and linalg.is_psd(rho, tol)):
            self.failures.append(np.array(rho))


AUDIT = PhysicalityAudit()
_original_density_matrix = states.SingleExcitationState.density_matrix


def _audited_density_matrix(self):
    rho = _original_density_matrix(self)
    AUDIT.check(rho)
    return rho


_original_embed = states.embed_two_qubit


def _audited_embed(state, basis=states.ScenarioBasis.DIMER):
    rho = _original_embed(state, basis)
    AUDIT.check(rho)
    return rho


def pytest_configure(config):
    states.SingleExcitationState.density_matrix = _audited_density_matrix
    for module in (states, measures, scenarios, cli):
        module.embed_two_qubit = _audited_embed


def pytest_collection_modifyitems(config, items):
    # the physicality audit must see every state built by the other tests
    last = [item for item in items if "audit_last" in item.keywords]
    items[:] = [item for item in items if "audit_last" not in item.keywords] + last


@pytest.fixture(scope="session")
def physicality_audit():
    return AUDIT


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_amplitudes(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)


def random_density_matrix(rng, dim=4, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


BELL = np.zeros((4, 4), dtype=complex)
BELL[np.ix_([1, 2], [1, 2])] = 0.5
