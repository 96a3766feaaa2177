import csv
import io
import json
import math
import subprocess
import sys

import pytest

from cohdeloc import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table_values(text):
    rows = {}
    for line in text.splitlines():
        if line and not line.startswith("#"):
            key, value = line.split(None, 1)
            rows[key] = value.strip()
    return rows


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# --- eval ------------------------------------------------------------------


def test_eval_bell_case(capsys):
    code, out, _ = run(capsys, "eval", "dimer(p1=0.5,eps=1)")
    assert code == 0
    rows = table_values(out)
    assert float(rows["concurrence_closed"]) == 1.0
    assert float(rows["chsh_horodecki"]) == pytest.approx(2.828427, abs=1e-6)
    assert float(rows["chsh_optimized"]) == pytest.approx(2.828427, abs=1e-6)


def test_eval_incoherent_json(capsys):
    code, out, _ = run(capsys, "eval", "dimer(p1=0.5,eps=0)", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["concurrence_closed"] == 0.0 and report["delocalization"] == 1.0
    assert set(report) == {
        "epsilon_measured", "delocalization", "concurrence_closed", "concurrence_oracle", "log_negativity",
        "chsh_horodecki", "chsh_optimized", "purity", "identity_residual",
    }


def test_eval_csv(capsys):
    code, out, _ = run(capsys, "eval", "spin_orbit(p1=0.3,eps=0.5)", "--format", "csv")
    assert code == 0
    (row,) = read_csv(out)
    assert float(row["purity"]) == pytest.approx(0.685, abs=1e-15)


def test_eval_nsite_summary(capsys):
    code, out, _ = run(capsys, "eval", "nsite(amps=[0.6, 0.0, 0.8], eps=0.3)", "--format", "json")
    assert code == 0
    summary = json.loads(out)
    assert summary["n_sites"] == 3
    assert summary["coherence_abs_min"] == pytest.approx(0.3, abs=1e-12)


@pytest.mark.parametrize(
    "spec, code, needle",
    [
        ("dimer(p1=2)", 3, "p1 out of [0,1]"),
        ("dimer(p1=0.5, eps=1.5)", 3, "eps out of [0,1]"),
        ("dimer(p1=)", 2, "1:10"),
        ("blob", 2, "unknown kind"),
    ],
)
def test_eval_errors(capsys, spec, code, needle):
    got, out, err = run(capsys, "eval", spec)
    assert got == code
    assert out == ""
    assert needle in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "eval")[0] == 2
    assert run(capsys, "eval", "dimer(p1=0.5,eps=1)", "--format", "xml")[0] == 2


def test_help_shows_grammar(capsys):
    code, out, _ = run(capsys, "eval", "--help")
    assert code == 0
    assert 'complex := number ("+"|"-") number "i"' in out


# --- chsh ------------------------------------------------------------------


@pytest.mark.parametrize(
    "eps, value, violation",
    [(1.0, 2 * math.sqrt(2), True), (0.0, 2.0, False), (0.3, 2 * math.sqrt(1.09), True)],
)
def test_chsh(capsys, eps, value, violation):
    code, out, _ = run(capsys, "chsh", f"dimer(p1=0.5,eps={eps})", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["chsh_horodecki"] == pytest.approx(value, abs=1e-12)
    assert data["chsh_optimized"] == pytest.approx(value, abs=1e-6)
    assert data["violation"] is violation
    assert len(data["angles"]) == 8


def test_chsh_table(capsys):
    code, out, _ = run(capsys, "chsh", "dimer(p1=0.5,eps=0.3)")
    rows = table_values(out)
    assert code == 0 and rows["violation"] == "true"
    assert float(rows["chsh_optimized"]) == pytest.approx(2.08806, abs=1e-5)


def test_chsh_rejects_three_sites(capsys):
    assert run(capsys, "chsh", "nsite(amps=[1,0,0], eps=0.2)")[0] == 3


# --- sweep -----------------------------------------------------------------


def test_sweep_eps(capsys):
    code, out, _ = run(capsys, "sweep", "--var", "eps", "--range", "0:1:0.01", "--fixed", "p1=0.5")
    assert code == 0
    assert out.splitlines()[0] == ",".join(cli.SWEEP_COLUMNS)
    rows = read_csv(out)
    assert len(rows) == 101
    eps = [float(r["eps"]) for r in rows]
    assert eps == sorted(eps) and eps[0] == 0.0 and eps[-1] == 1.0
    for r in rows:
        assert abs(float(r["C_closed"]) - float(r["eps"])) <= 1e-12


def test_sweep_p1_half_coherence(capsys):
    code, out, _ = run(capsys, "sweep", "--var", "p1", "--range", "0:1:0.01", "--fixed", "eps=0.5")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 101
    for r in rows:
        assert abs(float(r["C_closed"]) - 0.5 * float(r["D"])) <= 1e-12
        assert float(r["p1"]) + float(r["p2"]) == pytest.approx(1.0, abs=1e-15)
    peak = max(rows, key=lambda r: float(r["C_closed"]))
    assert float(peak["p1"]) == 0.5
    assert float(peak["C_closed"]) == pytest.approx(0.5, abs=1e-12)


def test_sweep_number_format(capsys):
    _, out, _ = run(capsys, "sweep", "--var", "eps", "--range", "0:0.3:0.1", "--fixed", "p1=0.3")
    for row in read_csv(out):
        for value in row.values():
            assert float(value) == float(repr(float(value)))
            digits = value.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 17


def test_sweep_out_file_and_determinism(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, out, _ = run(capsys, "sweep", "--var", "p1", "--range", "0:1:0.05", "--fixed", "eps=0.7",
                           "--kind", "two_photon", "--out", str(p))
        assert code == 0 and out == ""
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    assert b"\r" not in a


def test_sweep_jobs_same_output(capsys):
    args = ["sweep", "--var", "eps", "--range", "0:1:0.1", "--fixed", "p1=0.2", "--fixed", "phase=1"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--jobs", "2")
    assert serial == parallel


def test_sweep_stamp_and_json(capsys):
    _, out, _ = run(capsys, "sweep", "--var", "eps", "--range", "0:1:0.5", "--fixed", "p1=0.5", "--stamp")
    assert out.startswith("# cohdeloc ")
    assert len(read_csv(out)) == 3
    _, out, _ = run(capsys, "sweep", "--var", "eps", "--range", "0:1:0.5", "--fixed", "p1=0.5", "--format", "json")
    data = json.loads(out)
    assert data["columns"] == list(cli.SWEEP_COLUMNS)
    assert [r["C_closed"] for r in data["rows"]] == pytest.approx([0.0, 0.5, 1.0], abs=1e-12)


@pytest.mark.parametrize(
    "extra",
    [
        ["--range", "0:1:0"],
        ["--range", "1:0:0.1"],
        ["--range", "0:1"],
        ["--range", "0:1:x"],
        ["--range", "0:1:1e-9"],
        ["--range", "0:1:0.1", "--fixed", "eps=0.5"],
        ["--range", "0:1:0.1", "--fixed", "p1=0.5", "--fixed", "q=1"],
        ["--range", "0:1:0.1"],
    ],
)
def test_sweep_config_errors(capsys, extra):
    fixed = [] if "--fixed" in extra else ["--fixed", "p1=0.5"]
    if extra == ["--range", "0:1:0.1"]:
        fixed = []
    code, _, err = run(capsys, "sweep", "--var", "eps", *extra, *fixed)
    assert code == 2
    assert err.startswith("error:")


def test_sweep_domain_error(capsys):
    code, _, err = run(capsys, "sweep", "--var", "eps", "--range", "0:1.5:0.5", "--fixed", "p1=0.5")
    assert code == 3 and "eps out of [0,1]" in err


def test_sweep_unwritable_out(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--var", "eps", "--range", "0:1:0.5", "--fixed", "p1=0.5",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2 and "cannot write" in err


def test_sweep_grid_endpoints():
    cfg = cli.SweepConfig("dimer", "eps", 0.0, 1.0, 0.01, {"p1": 0.5})
    grid = cfg.grid()
    assert len(grid) == 101 and grid[0] == 0.0 and grid[-1] == 1.0
    assert cli.SweepConfig("dimer", "eps", 0.0, 1.0, 0.3, {"p1": 0.5}).grid() == pytest.approx([0, 0.3, 0.6, 0.9])


# --- verify ----------------------------------------------------------------


def test_verify_default_grid(capsys):
    code, out, _ = run(capsys, "verify", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] and data["points"] == 11 * 21
    for inv in data["invariants"]:
        assert inv["max_residual"] <= 1e-10


def test_verify_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--eps-points", "3", "--p1-points", "5", "--tolerance", "1e-16")
    assert code == 1
    assert "verification FAILED" in out


def test_verify_random_grid_deterministic(capsys):
    args = ["verify", "--grid-points", "15", "--format", "csv"]
    first, second = run(capsys, *args), run(capsys, *args)
    assert first == second and first[0] == 0


def test_verify_usage_errors(capsys):
    assert run(capsys, "verify", "--grid-points", "0")[0] == 2
    assert run(capsys, "verify", "--eps-points", "1")[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cohdeloc", "eval", "dimer(p1=0.5,eps=1)", "--format", "json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["delocalization"] == 1.0
