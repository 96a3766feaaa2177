"""Command-line front end: ``eval``, ``sweep``, ``chsh`` and ``verify``.

Exit codes: 0 ok, 1 verification failure, 2 parse or usage error,
3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, linalg, measures
from .measures import MeasureError
from .scenarios import verify_invariance
from .speclang import GRAMMAR, KINDS, NATURAL_BASIS, EvaluationError, ParseError, evaluate, parse
from .states import ScenarioBasis, SingleExcitationState, StateError, embed_two_qubit

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3

SWEEP_COLUMNS = ("eps", "p1", "p2", "D", "C_closed", "C_oracle", "logneg", "chsh", "g_abs", "identity_residual")
MAX_GRID_STEPS = 10**6


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


def fmt(x) -> str:
    """Shortest round-trip text for a float (at most 17 significant digits)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _json_ready(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _json_ready(obj.item())
    return obj


def _dumps(obj) -> str:
    return json.dumps(_json_ready(obj), indent=2, allow_nan=False) + "\n"


def _stamp_lines(argv: Sequence[str]) -> List[str]:
    now = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return [f"cohdeloc {__version__}", "command: " + " ".join(argv), f"generated: {now}"]


def _table(rows: Iterable[Tuple[str, str]]) -> str:
    rows = list(rows)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _csv(header: Sequence[str], rows: Iterable[Sequence[str]], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror or exc}") from None


def _load(spec_text: str):
    state, basis = evaluate(parse(spec_text))
    return state, basis


def _render_report(fields: Dict[str, float], args, argv) -> str:
    comments = _stamp_lines(argv) if args.stamp else []
    if args.format == "json":
        payload = dict(fields)
        if comments:
            payload = {"meta": comments, "report": payload}
        return _dumps(payload)
    if args.format == "csv":
        return _csv(list(fields), [[fmt(v) if isinstance(v, float) else str(v) for v in fields.values()]], comments)
    lines = "".join(f"# {c}\n" for c in comments)
    return lines + _table((k, fmt(v) if isinstance(v, float) else str(v)) for k, v in fields.items())


def nsite_summary(state: SingleExcitationState) -> Dict[str, float]:
    """Coherence summary for states with other than two sites."""
    rho = state.density_matrix()
    mods = [
        abs(measures.coherence_from_matrix(rho, i, j))
        for i in range(state.n_sites)
        for j in range(i + 1, state.n_sites)
        if rho[i, i].real > 0 and rho[j, j].real > 0
    ]
    return {
        "n_sites": state.n_sites,
        "epsilon": state.epsilon,
        "coherence_abs_min": min(mods) if mods else math.nan,
        "coherence_abs_max": max(mods) if mods else math.nan,
        "purity": measures.purity(rho),
    }


def cmd_eval(args, argv) -> int:
    state, basis = _load(args.spec)
    if basis is None:
        fields = nsite_summary(state)
    else:
        fields = measures.full_report(state, basis).as_dict()
    _emit(_render_report(fields, args, argv), args.out)
    return EXIT_OK


def cmd_chsh(args, argv) -> int:
    state, basis = _load(args.spec)
    if basis is None:
        raise MeasureError("CHSH needs a two-site state")
    rho = embed_two_qubit(state, basis)
    horodecki = measures.chsh_horodecki(rho)
    opt = measures.chsh_optimize(rho)
    names = ("theta_a", "phi_a", "theta_a2", "phi_a2", "theta_b", "phi_b", "theta_b2", "phi_b2")
    if args.format == "json":
        payload = {
            "chsh_horodecki": horodecki,
            "chsh_optimized": opt.value,
            "angles": dict(zip(names, opt.angles)),
            "violation": opt.value > 2.0 + args.tolerance,
        }
        if args.stamp:
            payload = {"meta": _stamp_lines(argv), **payload}
        text = _dumps(payload)
    else:
        rows = [("chsh_horodecki", fmt(horodecki)), ("chsh_optimized", fmt(opt.value))]
        rows += [(n, fmt(a)) for n, a in zip(names, opt.angles)]
        rows.append(("violation", str(opt.value > 2.0 + args.tolerance).lower()))
        comments = "".join(f"# {c}\n" for c in _stamp_lines(argv)) if args.stamp else ""
        text = comments + _table(rows)
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- sweep


@dataclass
class SweepConfig:
    kind: str
    var: str
    start: float
    stop: float
    step: float
    fixed: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.kind not in NATURAL_BASIS:
            raise UsageError(f"sweep kind must be one of {', '.join(NATURAL_BASIS)}")
        if self.var not in ("eps", "p1"):
            raise UsageError("sweep variable must be eps or p1")
        for v in (self.start, self.stop, self.step):
            if not math.isfinite(v):
                raise UsageError("range values must be finite")
        if not self.step > 0:
            raise UsageError(f"range step must be > 0, got {self.step!r}")
        if self.start > self.stop:
            raise UsageError("range start must not exceed stop")
        if (self.stop - self.start) / self.step > MAX_GRID_STEPS:
            raise UsageError(f"range has more than {MAX_GRID_STEPS} steps")
        if self.var in self.fixed:
            raise UsageError(f"{self.var} is both swept and fixed")
        unknown = set(self.fixed) - {"eps", "p1", "phase"}
        if unknown:
            raise UsageError(f"unknown fixed parameter(s): {', '.join(sorted(unknown))}")
        other = "p1" if self.var == "eps" else "eps"
        if other not in self.fixed:
            raise UsageError(f"sweeping {self.var} needs --fixed {other}=VALUE")

    def grid(self) -> List[float]:
        span = self.stop - self.start
        n = int(round(span / self.step))
        if abs(n * self.step - span) <= 1e-9 * max(1.0, abs(span)):
            # stop lies on the grid; divide the span exactly
            return [self.start + span * k / n if n else self.start for k in range(n + 1)]
        n = int(math.floor(span / self.step))
        return [self.start + k * self.step for k in range(n + 1)]


def sweep_row(kind: str, params: Dict[str, float]) -> List[float]:
    state = SingleExcitationState.dimer(params["p1"], params["eps"], params.get("phase", 0.0))
    basis = NATURAL_BASIS[kind]
    r = measures.full_report(state, basis, optimize_chsh=False)
    return [
        state.epsilon,
        float(params["p1"]),
        1.0 - float(params["p1"]),
        r.delocalization,
        r.concurrence_closed,
        r.concurrence_oracle,
        r.log_negativity,
        r.chsh_horodecki,
        r.epsilon_measured,
        r.identity_residual,
    ]


def _sweep_task(task):
    return sweep_row(*task)


def run_sweep(config: SweepConfig, jobs: int = 1) -> List[List[float]]:
    """Rows in ascending order of the swept variable."""
    tasks = [(config.kind, {**config.fixed, config.var: v}) for v in config.grid()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [sweep_row(*t) for t in tasks]


def render_sweep(rows: List[List[float]], fmt_name: str, comments: Sequence[str] = ()) -> str:
    if fmt_name == "json":
        payload = {"columns": list(SWEEP_COLUMNS), "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows]}
        if comments:
            payload = {"meta": list(comments), **payload}
        return _dumps(payload)
    if fmt_name == "table":
        widths = [max(len(c), 24) for c in SWEEP_COLUMNS]
        lines = ["".join(c.rjust(w + 1) for c, w in zip(SWEEP_COLUMNS, widths))]
        lines += ["".join(fmt(v).rjust(w + 1) for v, w in zip(r, widths)) for r in rows]
        return "".join(f"# {c}\n" for c in comments) + "\n".join(lines) + "\n"
    return _csv(SWEEP_COLUMNS, [[fmt(v) for v in r] for r in rows], comments)


def _parse_range(text: str) -> Tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--range must be START:STOP:STEP, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise UsageError(f"--range values must be numbers, got {text!r}") from None


def _parse_fixed(items: Sequence[str]) -> Dict[str, float]:
    fixed = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--fixed expects NAME=VALUE, got {item!r}")
        name = name.strip()
        if name in fixed:
            raise UsageError(f"--fixed {name} given twice")
        try:
            fixed[name] = float(value)
        except ValueError:
            raise UsageError(f"--fixed {name}: not a number: {value!r}") from None
    return fixed


def cmd_sweep(args, argv) -> int:
    start, stop, step = _parse_range(args.range)
    fmt_name = args.format or "csv"
    config = SweepConfig(args.kind, args.var, start, stop, step, _parse_fixed(args.fixed), args.out, fmt_name)
    rows = run_sweep(config, jobs=args.jobs)
    comments = _stamp_lines(argv) if args.stamp else []
    _emit(render_sweep(rows, fmt_name, comments), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- verify


@dataclass
class Invariant:
    name: str
    tolerance: float
    max_residual: float = 0.0

    def update(self, value: float):
        value = float(value)
        if not math.isfinite(value):
            self.max_residual = math.inf
        else:
            self.max_residual = max(self.max_residual, value)

    @property
    def ok(self) -> bool:
        return bool(self.max_residual <= self.tolerance)


DEFAULT_TOLERANCES = {
    "physicality": 1e-10,
    "identity_residual": 1e-10,
    "closed_vs_oracle": 1e-10,
    "coherence_modulus": 1e-12,
    "log_negativity": 1e-10,
    "pt_min_eigenvalue": 1e-10,
    "chsh_closed_form": 1e-10,
    "chsh_optimizer": 1e-6,
    "scenario_invariance": 1e-12,
}


def verification_grid(eps_points: int, p1_points: int, grid_points: Optional[int], seed: int):
    """Deterministic (p1, eps, phase) triples."""
    if grid_points is not None:
        rng = np.random.default_rng(seed)
        pts = rng.random((grid_points, 3))
        return [(float(p), float(e), float(2.0 * math.pi * f)) for p, e, f in pts]
    eps = np.linspace(0.0, 1.0, eps_points)
    p1s = np.linspace(0.0, 1.0, p1_points)
    return [(float(p), float(e), 0.0) for e in eps for p in p1s]


def physicality_violation(rho) -> float:
    r = np.asarray(rho)
    herm = float(np.max(np.abs(r - r.conj().T)))
    tr = abs(np.trace(r) - 1.0)
    lam_min = float(linalg.hermitian_eigenvalues(r)[0])
    return max(herm, tr, -lam_min, 0.0)


def run_verification(points, tolerance: Optional[float] = None) -> List[Invariant]:
    inv = {name: Invariant(name, tolerance if tolerance is not None else tol) for name, tol in DEFAULT_TOLERANCES.items()}
    for p1, eps, phase in points:
        state = SingleExcitationState.dimer(p1, eps, phase)
        pa, pb = state.probabilities
        d = 2.0 * math.sqrt(pa * pb)
        c_expected = eps * d
        for basis in ScenarioBasis:
            inv["physicality"].update(physicality_violation(embed_two_qubit(state, basis)))
        inv["physicality"].update(physicality_violation(state.density_matrix()))
        rho = embed_two_qubit(state)
        c_oracle = measures.concurrence_wootters(rho)
        inv["identity_residual"].update(abs(c_oracle - c_expected))
        inv["closed_vs_oracle"].update(abs(measures.concurrence_closed(pa, pb, eps) - c_oracle))
        if pa > 0 and pb > 0:
            inv["coherence_modulus"].update(abs(abs(measures.degree_of_coherence(state, 0, 1)) - eps))
        inv["log_negativity"].update(abs(measures.log_negativity(rho) - math.log2(1.0 + c_oracle)))
        pt_min = measures.partial_transpose_spectrum(rho)[0]
        inv["pt_min_eigenvalue"].update(abs(pt_min + eps * math.sqrt(pa * pb)))
        horodecki = measures.chsh_horodecki(rho)
        inv["chsh_closed_form"].update(abs(horodecki - 2.0 * math.sqrt(1.0 + c_expected**2)))
        inv["chsh_optimizer"].update(abs(measures.chsh_optimize(rho).value - horodecki))
        inv["scenario_invariance"].update(verify_invariance(state, optimize_chsh=False).max_discrepancy)
    return list(inv.values())


def cmd_verify(args, argv) -> int:
    if args.grid_points is not None and args.grid_points <= 0:
        raise UsageError("--grid-points must be positive")
    if args.eps_points < 2 or args.p1_points < 2:
        raise UsageError("grid needs at least 2 points per axis")
    points = verification_grid(args.eps_points, args.p1_points, args.grid_points, args.seed)
    results = run_verification(points, args.tolerance_override)
    passed = all(r.ok for r in results)
    comments = _stamp_lines(argv) if args.stamp else []
    fmt_name = args.format or "table"
    if fmt_name == "json":
        payload = {
            "points": len(points),
            "invariants": [
                {"name": r.name, "max_residual": r.max_residual, "tolerance": r.tolerance, "pass": r.ok}
                for r in results
            ],
            "pass": passed,
        }
        if comments:
            payload = {"meta": comments, **payload}
        text = _dumps(payload)
    elif fmt_name == "csv":
        text = _csv(
            ("invariant", "max_residual", "tolerance", "pass"),
            [(r.name, fmt(r.max_residual), fmt(r.tolerance), str(r.ok).lower()) for r in results],
            comments,
        )
    else:
        width = max(len(r.name) for r in results)
        lines = [f"# {c}" for c in comments]
        lines.append(f"grid points: {len(points)}")
        for r in results:
            status = "PASS" if r.ok else "FAIL"
            lines.append(f"{r.name.ljust(width)}  max={fmt(r.max_residual):<24} tol={fmt(r.tolerance):<8} {status}")
        lines.append("all invariants hold" if passed else "verification FAILED")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohdeloc",
        description="Coherence, delocalization and entanglement of single-excitation states.",
        epilog="State specification grammar:\n\n" + GRAMMAR + "\n\nKinds: " + ", ".join(KINDS),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "table"), default=None)
    common.add_argument("--out", metavar="PATH", help="write output here instead of standard output")
    common.add_argument("--tolerance", type=float, default=None, metavar="REAL")
    common.add_argument("--stamp", action="store_true", help="prepend '#' metadata lines (version, command, time)")

    def add(name, help_text):
        return sub.add_parser(
            name,
            parents=[common],
            help=help_text,
            epilog="State specification grammar:\n\n" + GRAMMAR,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    p = add("eval", "print every measure for one state")
    p.add_argument("spec", help='state spec, e.g. "dimer(p1=0.5, eps=1)"')
    p.set_defaults(func=cmd_eval)

    p = add("chsh", "maximal CHSH value, closed form and optimized")
    p.add_argument("spec")
    p.set_defaults(func=cmd_chsh)

    p = add("sweep", "tabulate measures over a parameter range")
    p.add_argument("--var", choices=("eps", "p1"), required=True)
    p.add_argument("--range", required=True, metavar="START:STOP:STEP")
    p.add_argument("--fixed", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--kind", choices=tuple(NATURAL_BASIS), default="dimer")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output order is unaffected")
    p.set_defaults(func=cmd_sweep)

    p = add("verify", "check every invariant over a deterministic grid")
    p.add_argument("--eps-points", type=int, default=11)
    p.add_argument("--p1-points", type=int, default=21)
    p.add_argument("--grid-points", type=int, default=None, help="use N seeded random points instead of the regular grid")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.tolerance_override = args.tolerance
    if args.tolerance is None:
        args.tolerance = linalg.DEFAULT_TOL
    if args.format is None and args.command in ("eval", "chsh"):
        args.format = "table"
    try:
        return args.func(args, ["cohdeloc", *argv])
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EvaluationError, StateError, MeasureError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
