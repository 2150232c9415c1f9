"""Command line runner: ``qeraser run scenario.scn [--out DIR] [--ascii] [--seed N]``.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 a checked
invariant failed while running.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import histories, nocomm, temporal
from .errors import DomainError, InvariantViolation, QuantumError, ScenarioError
from .experiments import ExperimentReport
from .hilbert import Operator, StateVector, SystemLayout
from .optics import ScreenPattern
from .scenario import Scenario, describe_schemas, parse_scenario

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT = 0, 2, 3


# ---- runners ----

def _run_wheeler(s: Scenario) -> ExperimentReport:
    return ex.run_wheeler(s.settings["choice"], s.screen)


def _run_eraser(s: Scenario) -> ExperimentReport:
    eraser = s.settings["eraser"]
    if isinstance(eraser, tuple):
        return ex.run_double_slit_eraser(s.settings["marker"], "polarizer", eraser[1], s.screen)
    return ex.run_double_slit_eraser(s.settings["marker"], eraser, config=s.screen)


def _run_herzog(s: Scenario) -> ExperimentReport:
    grid = ex.default_phase_grid(s.settings["phase_points"])
    return ex.run_herzog(s.settings["qwp"], s.settings["filter"], grid)


def _run_free_will(s: Scenario) -> ExperimentReport:
    return ex.run_free_will(s.settings["choice"], s.screen)


def _run_swapping(s: Scenario) -> ExperimentReport:
    return ex.run_entanglement_swapping(s.settings["victor"], s.seed, s.shots)


def _run_tradeoff(s: Scenario) -> ExperimentReport:
    rep = ex.run_tradeoff()
    n = s.settings["family_points"]
    grid = np.linspace(0.0, 1.0, n)
    coeffs, corrs = [], []
    for x in grid:
        psi = ex.tradeoff_family_state(float(x))
        coeffs.append(ex.interference_coefficient(psi))
        corrs.append(ex.correlation_measure(psi))
    if np.any(np.diff(coeffs) <= 0) or np.any(np.diff(corrs) >= 0):
        raise InvariantViolation("interference/correlation trade-off is not monotone on the family")
    rep.patterns["family_interference"] = ScreenPattern(grid, np.array(coeffs), label="family_interference")
    rep.patterns["family_correlation"] = ScreenPattern(grid, np.array(corrs), label="family_correlation")
    return rep


def _run_brainwash(s: Scenario) -> ExperimentReport:
    rep = ex.brainwash_roundtrip(s.settings["variant"])
    if abs(rep.scalars["fidelity"] - 1) > 1e-12:
        raise InvariantViolation(f"brainwash round trip fidelity {rep.scalars['fidelity']!r}")
    return rep


def _run_nocomm(s: Scenario) -> ExperimentReport:
    cases, tol = s.settings["cases"], s.settings["tol"]
    res = nocomm.sweep(cases, s.seed)
    rep = ExperimentReport("nocomm", {"cases": cases, "tol": tol, "seed": s.seed})
    rep.add("max_deviation", res.max_deviation)
    for k, v in res.by_kind.items():
        rep.add(f"max_deviation_{k}", v)
    bell = StateVector(SystemLayout([("A", 2), ("B", 2)]), np.array([1, 0, 0, 1]) / np.sqrt(2))
    cnot = Operator(bell.layout, nocomm.cnot(control=1))
    rep.add("negative_control_deviation", nocomm.negative_control(bell, cnot, ["A"]))
    if res.max_deviation > tol:
        raise InvariantViolation(f"no-communication deviation {res.max_deviation:.3e} exceeds {tol:g}")
    return rep


def _evolving(s: Scenario) -> temporal.EvolvingState:
    model = s.settings["model"]
    if model == "decay":
        return temporal.decay_state(s.settings["rate"])
    if model == "cat":
        return temporal.cat_state()
    return temporal.passive_zeno_state(s.settings["period"])


def _closed_forms(s: Scenario, t: float, t0: float):
    model = s.settings["model"]
    if model == "decay":
        lam = s.settings["rate"]
        return lam * math.exp(-lam * t), lam * math.exp(-lam * (t - t0))
    if model == "cat":
        return 0.5 * math.sin(2 * t), math.sin(2 * t) / (1 + math.cos(2 * t0))
    period = s.settings["period"]
    return 1 / (2 * period), 1 / (2 * period - t0)


def _run_temporal(s: Scenario) -> ExperimentReport:
    st = _evolving(s)
    t, t0, h = s.settings["t"], s.settings["t0"], s.settings["step"]
    if not t0 < t:
        raise DomainError("temporal scenario needs t0 < t")
    st.check_time(t)
    rep = ExperimentReport("temporal", {"model": s.settings["model"], "t": t, "t0": t0, "step": h})
    dens = temporal.detection_density(st, t, h)
    cond = temporal.conditional_density(st, t, t0, h)
    exact_dens, exact_cond = _closed_forms(s, t, t0)
    rep.add("cdf", temporal.detection_cdf(st, t))
    rep.add("density", dens)
    rep.add("density_closed_form", exact_dens)
    rep.add("conditional_density", cond)
    rep.add("conditional_closed_form", exact_cond)
    end = st.t_end if math.isfinite(st.t_end) else t0 + 10.0 / s.settings["rate"]
    ts = np.linspace(t0, end, s.settings["samples"])
    rep.patterns["conditional_density"] = ScreenPattern(
        ts, np.array([temporal.conditional_density(st, float(x), t0, h) for x in ts]).clip(0.0, None),
        label="conditional_density")
    return rep


def _run_zeno(s: Scenario) -> ExperimentReport:
    n, total = s.settings["measurements"], s.settings["total_time"]
    ns = np.arange(1, n + 1)
    surv = np.array([temporal.zeno_survival(int(k), total) for k in ns])
    rep = ExperimentReport("zeno", {"measurements": n, "total_time": total})
    rep.add("survival", surv[-1])
    rep.add("closed_form", math.cos(total / n) ** (2 * n))
    rep.patterns["survival"] = ScreenPattern(ns.astype(float), surv, label="survival")
    return rep


def _run_histories(s: Scenario) -> ExperimentReport:
    r = histories.two_slit_report(s.settings["marked"], s.settings["tol"])
    pu, pd = histories.path_marginals(r)
    rep = ExperimentReport("histories", {"marked": s.settings["marked"]})
    rep.add("max_off_diagonal", r.max_off_diagonal)
    rep.add("consistent", 1.0 if r.consistent else 0.0)
    rep.add("P_u", pu)
    rep.add("P_d", pd)
    rep.add("probability_sum", float(r.probabilities.sum()))
    return rep


def time_ordering_sweep(cases: int, seed: int) -> float:
    """Largest time-ordering deviation over seeded random cases."""
    worst = 0.0
    for child in np.random.SeedSequence(seed).spawn(cases):
        rng = np.random.default_rng(child)
        dims = [int(rng.choice([2, 3])) for _ in range(int(rng.integers(2, 4)))]
        layout = SystemLayout([(f"s{k}", d) for k, d in enumerate(dims)])
        psi = nocomm.random_state(layout, rng)
        a, b = (int(k) for k in rng.choice(len(dims), size=2, replace=False))
        proj = []
        for k in (a, b):
            d = dims[k]
            q = nocomm.random_unitary(d, rng)[:, : int(rng.integers(1, d))]
            proj.append(Operator(layout.sub([f"s{k}"]), q @ q.conj().T))
        energies = rng.normal(size=len(dims))
        times = tuple(tuple(rng.uniform(0, 10, size=2)) for _ in range(2))
        try:
            dev = temporal.time_ordering_invariance(psi, energies, proj[0], [f"s{a}"], proj[1], [f"s{b}"], times)
        except DomainError:
            continue
        worst = max(worst, dev)
    return worst


def _run_time_ordering(s: Scenario) -> ExperimentReport:
    cases, tol = s.settings["cases"], s.settings["tol"]
    worst = time_ordering_sweep(cases, s.seed)
    rep = ExperimentReport("time_ordering", {"cases": cases, "tol": tol, "seed": s.seed})
    rep.add("max_deviation", worst)
    if worst > tol:
        raise InvariantViolation(f"time-ordering deviation {worst:.3e} exceeds {tol:g}")
    return rep


RUNNERS = {
    "wheeler": _run_wheeler,
    "double_slit_eraser": _run_eraser,
    "herzog": _run_herzog,
    "free_will": _run_free_will,
    "entanglement_swapping": _run_swapping,
    "tradeoff": _run_tradeoff,
    "brainwash": _run_brainwash,
    "nocomm": _run_nocomm,
    "temporal": _run_temporal,
    "zeno": _run_zeno,
    "histories": _run_histories,
    "time_ordering": _run_time_ordering,
}


def run(scenario: Scenario) -> tuple[ExperimentReport | None, int, str]:
    """Execute a parsed scenario; returns (report, exit code, error message)."""
    try:
        rep = RUNNERS[scenario.experiment](scenario)
    except InvariantViolation as exc:
        return None, EXIT_INVARIANT, f"invariant violation: {exc}"
    except (ScenarioError, DomainError, ValueError) as exc:
        return None, EXIT_INVALID, f"invalid scenario: {exc}"
    except QuantumError as exc:
        return None, EXIT_INVARIANT, f"invariant violation: {exc}"
    return rep, EXIT_OK, ""


# ---- output ----

def format_scalar(v: float) -> str:
    v = float(v)
    if v == 0 or 1e-3 <= abs(v) < 1e6:
        return f"{v:.6f}"
    return f"{v:.6e}"


def _format_setting(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ":".join(_format_setting(x) for x in v)
    return str(v)


def pattern_csv(p: ScreenPattern) -> str:
    rows = ["x,intensity"]
    rows += [f"{float(x)!r},{float(y)!r}" for x, y in zip(p.xs, p.intensity)]
    return "\n".join(rows) + "\n"


def ascii_plot(p: ScreenPattern, width: int = 60, height: int = 12) -> str:
    """Column plot of a pattern resampled to ``width`` bins, scaled to its maximum."""
    ys = np.asarray(p.intensity, dtype=float)
    edges = np.linspace(0, len(ys), width + 1).astype(int)
    cols = np.array([ys[a:max(b, a + 1)].mean() for a, b in zip(edges[:-1], edges[1:])])
    top = cols.max()
    levels = np.zeros(width, dtype=int) if top <= 0 else np.rint(cols / top * height).astype(int)
    lines = []
    for row in range(height, 0, -1):
        lines.append("|" + "".join("#" if lv >= row else " " for lv in levels))
    lines.append("+" + "-" * width)
    return "\n".join(lines) + "\n"


def emit(report: ExperimentReport, scenario: Scenario, out_dir: Path | None = None,
         ascii_art: bool = False, stream=None) -> list[Path]:
    """Write pattern CSVs (when ``out_dir`` is set) and the summary to ``stream``."""
    stream = stream if stream is not None else sys.stdout
    written = []
    lines = [f"experiment={report.experiment}", f"name={scenario.name}", f"seed={scenario.seed}"]
    for k in sorted(report.settings):
        lines.append(f"setting.{k}={_format_setting(report.settings[k])}")
    for k, v in report.scalars.items():
        lines.append(f"{k}={format_scalar(v)}")
    if out_dir is not None and scenario.output == "all":
        out_dir.mkdir(parents=True, exist_ok=True)
        for pname, pat in report.patterns.items():
            path = out_dir / f"{scenario.name}_{pname}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(pattern_csv(pat))
            written.append(path)
            lines.append(f"pattern.{pname}={path.name}")
    lines.append("status=ok")
    stream.write("\n".join(lines) + "\n")
    if ascii_art:
        for pname, pat in report.patterns.items():
            stream.write(f"\n[{pname}]\n")
            stream.write(ascii_plot(pat))
    return written


# ---- entry point ----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qeraser", description="Run quantum eraser scenarios.")
    parser.add_argument("--list", action="store_true", help="print experiment schemas and exit")
    sub = parser.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("file", type=Path)
    r.add_argument("--out", type=Path, default=None, help="directory for pattern CSV files")
    r.add_argument("--ascii", action="store_true", help="append ASCII plots of every pattern")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        sys.stdout.write(describe_schemas())
        return EXIT_OK
    if args.command != "run":
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        text = args.file.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    try:
        scenario = parse_scenario(text)
        if args.seed is not None:
            scenario = scenario.with_seed(args.seed)
    except ScenarioError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report, code, message = run(scenario)
    if report is None:
        print(f"{args.file}: {message}", file=sys.stderr)
        return code
    try:
        emit(report, scenario, args.out, args.ascii)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
