"""Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (visible even under output capture)
before asserting. Run alone with ``pytest tests/test_acceptance.py -s``.
"""

import csv
import itertools
import math
import time

import numpy as np
import pytest

from cohdeloc import cli, linalg, measures
from cohdeloc.scenarios import verify_invariance
from cohdeloc.speclang import ParseError, SpecError, evaluate, format_spec, parse
from cohdeloc.states import ScenarioBasis, SingleExcitationState, StateError, build_nsite, embed_two_qubit

from conftest import AUDIT, random_amplitudes
from spec_corpus import MALFORMED, VALID

GRID_SIZE = 500


@pytest.fixture(scope="module")
def grid():
    rng = np.random.default_rng(500)
    pts = rng.random((GRID_SIZE, 3))
    return [(float(p), float(e), float(2 * math.pi * f)) for p, e, f in pts]


def verdict(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}: {detail}")
    assert ok, detail


def sweep_rows(capsys, tmp_path, *argv):
    out = tmp_path / "sweep.csv"
    code = cli.main(["sweep", *argv, "--out", str(out)])
    assert code == 0, capsys.readouterr().err
    with open(out, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def test_criterion_01_identity(capsys, grid):
    start = time.perf_counter()
    worst = 0.0
    for p1, eps, phase in grid:
        state = SingleExcitationState.dimer(p1, eps, phase)
        c = measures.concurrence_wootters(embed_two_qubit(state))
        worst = max(worst, abs(c - eps * measures.delocalization(p1, 1 - p1)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 2.0
    verdict(capsys, 1, "C = eps * D", ok, f"max residual {worst:.2e} (tol 1e-10) over {len(grid)} points in {elapsed:.2f} s (limit 2 s)")


def test_criterion_02_coherence_modulus(capsys):
    rng = np.random.default_rng(2)
    worst, pairs = 0.0, 0
    for n in range(2, 9):
        for _ in range(50):
            state = SingleExcitationState(random_amplitudes(rng, n), rng.uniform())
            p = state.probabilities
            for i, j in itertools.combinations(range(n), 2):
                if p[i] > 0 and p[j] > 0:
                    g = measures.degree_of_coherence(state, i, j)
                    worst = max(worst, abs(abs(g) - state.epsilon))
                    pairs += 1
    verdict(capsys, 2, "|g_ij| = eps", worst <= 1e-12, f"max deviation {worst:.2e} (tol 1e-12) over {pairs} pairs, N = 2..8")


def test_criterion_03_closed_vs_oracle(capsys, grid):
    worst = 0.0
    for p1, eps, phase in grid:
        rho = embed_two_qubit(SingleExcitationState.dimer(p1, eps, phase))
        worst = max(worst, abs(measures.concurrence_closed(p1, 1 - p1, eps) - measures.concurrence_wootters(rho)))
    verdict(capsys, 3, "closed-form C vs Wootters", worst <= 1e-10, f"max difference {worst:.2e} (tol 1e-10)")


def test_criterion_04_concurrence_vs_coherence(capsys, tmp_path):
    rows = sweep_rows(capsys, tmp_path, "--var", "eps", "--range", "0:1:0.01", "--fixed", "p1=0.5")
    dev = max(max(abs(r["C_closed"] - r["eps"]), abs(r["C_oracle"] - r["eps"])) for r in rows)
    first, last = rows[0], rows[-1]
    ends = max(abs(first["eps"]), abs(first["C_closed"]), abs(last["eps"] - 1), abs(last["C_closed"] - 1))
    ok = len(rows) == 101 and dev <= 1e-12 and ends <= 1e-12
    verdict(capsys, 4, "C vs eps at D = 1", ok, f"{len(rows)} rows, max |C - eps| {dev:.2e}, endpoint error {ends:.2e} (tol 1e-12)")


def test_criterion_05_concurrence_vs_delocalization(capsys, tmp_path):
    rows = sweep_rows(capsys, tmp_path, "--var", "p1", "--range", "0:1:0.01", "--fixed", "eps=1")
    dev = max(max(abs(r["C_closed"] - r["D"]), abs(r["C_oracle"] - r["D"])) for r in rows)
    peak = max(rows, key=lambda r: r["C_closed"])
    ok = len(rows) == 101 and dev <= 1e-12 and peak["p1"] == 0.5 and abs(peak["C_closed"] - 1) <= 1e-12
    verdict(
        capsys, 5, "C vs D at eps = 1", ok,
        f"max |C - D| {dev:.2e} (tol 1e-12), max C = {peak['C_closed']!r} at p1 = {peak['p1']!r}",
    )


def test_criterion_06_chsh(capsys):
    bell = embed_two_qubit(SingleExcitationState.dimer(0.5, 1.0))
    h = measures.chsh_horodecki(bell)
    o = measures.chsh_optimize(bell).value
    checks = [abs(h - 2 * math.sqrt(2)) <= 1e-12, abs(o - h) <= 1e-6]
    incoherent = embed_two_qubit(SingleExcitationState.dimer(0.5, 0.0))
    h0, o0 = measures.chsh_horodecki(incoherent), measures.chsh_optimize(incoherent).value
    checks += [abs(h0 - 2) <= 1e-6, abs(o0 - 2) <= 1e-6]
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        rho = embed_two_qubit(SingleExcitationState.dimer(rng.uniform(), rng.uniform(), rng.uniform(0, 2 * math.pi)))
        worst = max(worst, abs(measures.chsh_optimize(rho).value - measures.chsh_horodecki(rho)))
    checks.append(worst <= 1e-6)
    detail = (
        f"Bell {h!r} / {o!r}, eps=0 {h0!r} / {o0!r}, "
        f"max |optimized - Horodecki| over 100 states {worst:.2e} (tol 1e-6)"
    )
    verdict(capsys, 6, "CHSH", all(checks), detail)


def test_criterion_07_scenario_equivalence(capsys):
    rng = np.random.default_rng(7)
    worst, where = 0.0, ""
    for _ in range(100):
        rep = verify_invariance(SingleExcitationState.dimer(rng.uniform(), rng.uniform()))
        name, value = max(rep.discrepancy.items(), key=lambda kv: kv[1])
        if value >= worst:
            worst, where = value, name
    verdict(capsys, 7, "scenario equivalence", worst <= 1e-12, f"max per-measure discrepancy {worst:.2e} ({where}) (tol 1e-12)")


def test_criterion_08_negativity(capsys, grid):
    worst_pt, worst_en = 0.0, 0.0
    for p1, eps, phase in grid:
        rho = embed_two_qubit(SingleExcitationState.dimer(p1, eps, phase))
        spectrum = linalg.hermitian_eigenvalues(linalg.partial_transpose(rho))
        worst_pt = max(worst_pt, abs(spectrum[0] + eps * math.sqrt(p1 * (1 - p1))))
        c = measures.concurrence_closed(p1, 1 - p1, eps)
        worst_en = max(worst_en, abs(measures.log_negativity(rho) - math.log2(1 + c)))
    ok = worst_pt <= 1e-10 and worst_en <= 1e-10
    verdict(capsys, 8, "negativity", ok, f"min PT eigenvalue error {worst_pt:.2e}, E_N error {worst_en:.2e} (tol 1e-10)")


@pytest.mark.audit_last
def test_criterion_09_physicality(capsys):
    for n in range(1, 9):
        for eps in np.linspace(0, 1, 11):
            build_nsite(random_amplitudes(np.random.default_rng(n), n), eps)
            for basis in ScenarioBasis:
                embed_two_qubit(SingleExcitationState.dimer(n / 8, eps, n), basis)
    rejected = 0
    bad_inputs = [([1, 0], -1e-9), ([1, 0], 1 + 1e-9), ([1, 0], math.nan), ([0.6, 0.6], 0.5), ([1, 1e-4], 0.5)]
    for amps, eps in bad_inputs:
        try:
            build_nsite(amps, eps)
        except StateError:
            rejected += 1
    ok = AUDIT.count > 0 and not AUDIT.failures and rejected == len(bad_inputs)
    detail = (
        f"{AUDIT.count} matrices built in this session, {len(AUDIT.failures)} non-physical at 1e-10; "
        f"{rejected}/{len(bad_inputs)} invalid inputs rejected"
    )
    verdict(capsys, 9, "physicality", ok, detail)


def test_criterion_10_parser(capsys):
    failures = []
    for text, (kind, params) in VALID:
        try:
            spec = parse(text)
            if spec.kind != kind or dict(spec.params) != params:
                failures.append(f"wrong parse: {text!r}")
            if parse(format_spec(spec)) != spec:
                failures.append(f"round trip: {text!r}")
        except Exception as exc:  # noqa: BLE001
            failures.append(f"{text!r}: {exc!r}")
    for text, location, token in MALFORMED:
        try:
            parse(text)
            failures.append(f"accepted {text!r}")
        except ParseError as err:
            if (err.line, err.column) != location or (token is not None and token not in err.expected):
                failures.append(f"{text!r}: got {err}")
        except Exception as exc:  # noqa: BLE001
            failures.append(f"crash on {text!r}: {exc!r}")
    # every single-character deletion of a valid case must parse or fail cleanly
    crashes = 0
    for text, _ in VALID:
        for i in range(len(text)):
            try:
                evaluate(parse(text[:i] + text[i + 1:]))
            except SpecError:
                pass
            except Exception:  # noqa: BLE001
                crashes += 1
    ok = not failures and crashes == 0
    detail = f"{len(VALID)} valid + {len(MALFORMED)} malformed cases, {len(failures)} failures, {crashes} crashes on mutations"
    verdict(capsys, 10, "parser corpus", ok, detail if ok else detail + ": " + "; ".join(failures))
