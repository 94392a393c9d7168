"""Command-line front end.

Subcommands::

    sagnac-deutsch gates verify [--self-test wrong-dp]
    sagnac-deutsch run --oracle id --phase pi [--source sagnac] [--json]
    sagnac-deutsch sweep --oracle id --out sweep.csv [--seed 42 --visibility 0.96 ...]
    sagnac-deutsch analyze --in sweep.csv [--json]
    sagnac-deutsch bench run --file deutsch.bench --bind PHI=pi
    sagnac-deutsch plot --in sweep.csv --out sweep.svg

Exit codes: 0 success, 1 runtime or verification failure, 2 usage/parse error.
The default sweep seed is read from ``SAGNAC_DEUTSCH_SEED`` (fallback 42).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import benchdsl, labsim
from .deutsch import (
    DEFAULT_CLASSIFY_TOL,
    DeutschOutcome,
    FunctionClass,
    classical_evaluations,
    classify,
    run_deutsch,
)
from .optics import (
    HADAMARD,
    DoveAngle,
    OracleKind,
    SagnacConfig,
    config_for,
    hwp_unitary,
    kind_for_config,
    oracle_unitary,
    phase_shifter_unitary,
    sagnac_unitary,
    zcnot_by_conjugation,
)
from .qcore import ALGEBRA_TOL, compose, tensor_lift

SEED_ENV = "SAGNAC_DEUTSCH_SEED"
CSV_HEADER = ["voltage_V", "phase_rad", "counts_d1", "counts_d2"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_PHASE_RE = re.compile(r"\s*([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*", re.IGNORECASE)


class UsageError(Exception):
    pass


class CsvFormatError(ValueError):
    pass


def parse_phase(text: str) -> float:
    """Radians as a decimal, or a multiple of pi: ``pi``, ``-pi``, ``0.5pi``, ``1.5*pi``."""
    m = _PHASE_RE.fullmatch(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        return sign * coef * math.pi
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed phase {text!r}") from None
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"phase must be finite, got {text!r}")
    return val


def parse_oracle(text: str) -> OracleKind:
    try:
        return OracleKind(text)
    except ValueError:
        names = ", ".join(k.value for k in OracleKind)
        raise argparse.ArgumentTypeError(f"unknown oracle {text!r} (choose from {names})") from None


@dataclass
class RunReport:
    oracle: str
    gate: str
    phase: float
    p_d1: float
    p_d2: float
    classification: str
    quantum_queries: int
    classical_queries: int
    gate_source: str

    def to_text(self) -> str:
        return "\n".join([
            f"oracle          {self.oracle} ({self.gate})",
            f"phase           {self.phase:.12f} rad",
            f"P(D1) [H]       {self.p_d1:.12f}",
            f"P(D2) [V]       {self.p_d2:.12f}",
            f"classification  {self.classification}",
            f"queries         quantum={self.quantum_queries} classical={self.classical_queries}",
            f"gate source     {self.gate_source}",
        ])


def _emit(report: dict | RunReport, as_json: bool, text: str | None = None):
    if as_json:
        payload = asdict(report) if isinstance(report, RunReport) else report
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text if text is not None else report.to_text())


# ---- gates ---------------------------------------------------------------

def gate_checks(self_test: str | None = None):
    """Yield (name, passed) for every gate identity."""
    def bench_config(kind):
        cfg = config_for(kind)
        if self_test == "wrong-dp":
            flipped = DoveAngle.MINUS_45 if cfg.dp is DoveAngle.PLUS_45 else DoveAngle.PLUS_45
            cfg = SagnacConfig(cfg.pbs_present, flipped)
        return cfg

    for kind in OracleKind:
        ok = sagnac_unitary(bench_config(kind)) == oracle_unitary(kind)
        yield f"table: sagnac({bench_config(kind)}) == {kind.gate_name} for f={kind.value}", ok
    for kind in OracleKind:
        u = oracle_unitary(kind)
        yield f"{kind.gate_name} is a permutation involution", u.is_permutation() and compose(u, u).allclose(tensor_lift())
    yield "Z-CNOT == (X(x)I) CNOT (X(x)I)", zcnot_by_conjugation().allclose(oracle_unitary(OracleKind.BALANCED_INVERSE))
    yield "hwp(22.5 deg) == Hadamard(x)I", hwp_unitary(22.5).allclose(tensor_lift(pol_op=HADAMARD))
    angles = np.linspace(-180.0, 180.0, 37)
    ok = all(
        np.allclose(hwp_unitary(t).m, hwp_unitary(t).m.T, atol=ALGEBRA_TOL, rtol=0)
        and np.all(hwp_unitary(t).m.imag == 0)
        and compose(hwp_unitary(t), hwp_unitary(t)).allclose(tensor_lift())
        for t in angles
    )
    yield "hwp(theta) real, symmetric, involutive", ok
    phis = np.linspace(-2 * np.pi, 2 * np.pi, 13)
    ok = all(
        compose(phase_shifter_unitary(a), phase_shifter_unitary(b)).allclose(phase_shifter_unitary(a + b))
        for a in phis for b in phis
    )
    yield "phase(a) phase(b) == phase(a+b)", ok


def cmd_gates_verify(args) -> int:
    results = list(gate_checks(args.self_test))
    for name, ok in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    table_ok = sum(ok for name, ok in results if name.startswith("table:"))
    print(f"oracle equivalences: {table_ok}/4")
    passed = all(ok for _, ok in results)
    print("all checks passed" if passed else "verification FAILED")
    return EXIT_OK if passed else EXIT_FAIL


# ---- run -----------------------------------------------------------------

def build_report(kind: OracleKind, phi: float, source: str) -> RunReport:
    gate_source = "ideal" if source == "ideal" else config_for(kind)
    outcome = run_deutsch(kind, phi, gate_source)
    cls, classical = classical_evaluations(kind)
    return RunReport(
        oracle=kind.value,
        gate=kind.gate_name,
        phase=float(phi),
        p_d1=outcome.probs.p_h,
        p_d2=outcome.probs.p_v,
        classification=classify(outcome, DEFAULT_CLASSIFY_TOL).value,
        quantum_queries=outcome.oracle_queries,
        classical_queries=classical,
        gate_source=outcome.gate_source,
    )


def cmd_run(args) -> int:
    report = build_report(args.oracle, args.phase, args.source)
    _emit(report, args.json)
    return EXIT_OK


# ---- sweep / CSV ---------------------------------------------------------

def sweep_config_from_args(args) -> labsim.SweepConfig:
    return labsim.SweepConfig(
        rate=args.rate,
        integration_time=args.integration_time,
        v_start=args.v_start,
        v_end=args.v_end,
        v_step=args.v_step,
        volts_per_period=args.volts_per_period,
        phase_offset=args.phase_offset,
        visibility=args.visibility,
        extinction=args.extinction,
        drift_per_volt=args.drift_per_volt,
        background_prob=args.background_prob,
        seed=args.seed,
    )


def format_csv(records) -> str:
    lines = [",".join(CSV_HEADER)]
    for r in records:
        lines.append(f"{r.voltage:.9g},{r.phase:.9g},{int(r.counts_d1)},{int(r.counts_d2)}")
    return "\n".join(lines) + "\n"


def read_csv(path) -> list[labsim.DetectionRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError("empty CSV (missing header)")
    if [c.strip() for c in rows[0]] != CSV_HEADER:
        raise CsvFormatError(f"row 1: expected header {','.join(CSV_HEADER)}")
    records = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise CsvFormatError(f"row {i}: expected 4 fields, got {len(row)}")
        try:
            v, phi = float(row[0]), float(row[1])
            c1, c2 = int(row[2]), int(row[3])
        except ValueError:
            raise CsvFormatError(f"row {i}: malformed value") from None
        if not (math.isfinite(v) and math.isfinite(phi)) or c1 < 0 or c2 < 0:
            raise CsvFormatError(f"row {i}: values out of range")
        records.append(labsim.DetectionRecord(v, phi, c1, c2))
    if not records:
        raise CsvFormatError("no data rows")
    return records


def cmd_sweep(args) -> int:
    cfg = sweep_config_from_args(args)
    records = labsim.simulate_sweep(args.oracle, cfg)
    text = format_csv(records)
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(records)} rows to {args.out}")
    return EXIT_OK


# ---- analyze / plot ------------------------------------------------------

def calibration_from_records(records, drift_per_volt=0.0) -> labsim.SweepConfig:
    """Recover the linear voltage->phase calibration from the CSV columns."""
    v = np.array([r.voltage for r in records])
    phi = np.array([r.phase for r in records])
    if np.ptp(v) == 0:
        raise CsvFormatError("need at least two distinct voltages")
    slope, intercept = np.polyfit(v, phi, 1)
    if slope <= 0:
        raise CsvFormatError("phase must increase with voltage")
    return labsim.SweepConfig(
        v_start=float(v.min()), v_end=float(v.max()), v_step=float(max(np.ptp(v), 1e-9)),
        volts_per_period=float(2 * np.pi / slope), phase_offset=float(intercept),
        drift_per_volt=drift_per_volt,
    )


def analyze_records(records, drift_per_volt=0.0) -> dict:
    cfg = calibration_from_records(records, drift_per_volt)
    volts = np.array([r.voltage for r in records])
    points = []
    tot1 = tot2 = 0
    for vp in labsim.proper_phase_voltages(volts.min(), volts.max(), cfg):
        r = records[int(np.argmin(np.abs(volts - vp)))]
        tot1 += r.counts_d1
        tot2 += r.counts_d2
        try:
            c = labsim.contrast_ratio(r.counts_d1, r.counts_d2)
            eta, eta_std = c.eta, c.eta_std
        except labsim.UndefinedContrastError:
            eta = eta_std = None
        points.append({
            "proper_voltage": vp, "voltage": r.voltage, "phase": r.phase,
            "counts_d1": r.counts_d1, "counts_d2": r.counts_d2, "eta": eta, "eta_std": eta_std,
        })
    fit = None
    try:
        f = labsim.fit_visibility(records, cfg)
        fit = {"visibility": f.visibility, "flat": f.flat}
    except ValueError as exc:
        fit = {"visibility": None, "flat": None, "error": str(exc)}
    decision = labsim.classify_counts(tot1, tot2) if points else FunctionClass.INDETERMINATE
    return {
        "n_rows": len(records),
        "volts_per_period": cfg.volts_per_period,
        "phase_offset": cfg.phase_offset,
        "proper_points": points,
        "fit": fit,
        "class": decision.value,
    }


def _analysis_text(res: dict) -> str:
    lines = [
        f"rows              {res['n_rows']}",
        f"calibration       {res['volts_per_period']:.6g} V/period, offset {res['phase_offset']:.6g} rad",
    ]
    if not res["proper_points"]:
        lines.append("proper points     none in range")
    for p in res["proper_points"]:
        eta = "undefined" if p["eta"] is None else f"{p['eta']:.6f} +/- {p['eta_std']:.6f}"
        lines.append(f"proper point      V={p['voltage']:g} (ideal {p['proper_voltage']:.6g})  "
                     f"D1={p['counts_d1']} D2={p['counts_d2']}  eta={eta}")
    fit = res["fit"]
    if fit["visibility"] is None:
        lines.append(f"fringe fit        unavailable ({fit['error']})")
    elif fit["flat"]:
        lines.append("fringe fit        flat (no interference)")
    else:
        lines.append(f"fringe fit        visibility {fit['visibility']:.6f}")
    lines.append(f"class decision    {res['class']}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    records = read_csv(args.infile)
    res = analyze_records(records, args.drift_per_volt)
    _emit(res, args.json, _analysis_text(res))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .svgplot import render_sweep_svg

    records = read_csv(args.infile)
    cfg = calibration_from_records(records, args.drift_per_volt)
    v = np.array([r.voltage for r in records])
    d1 = np.array([r.counts_d1 for r in records], float)
    d2 = np.array([r.counts_d2 for r in records], float)
    fit_v = np.linspace(v.min(), v.max(), 400)
    fits = None
    try:
        f1 = labsim.fit_fringe(v, d1, cfg)
        f2 = labsim.fit_fringe(v, d2, cfg)
        fits = (_fit_curve(f1, fit_v, cfg), _fit_curve(f2, fit_v, cfg))
        fits_at_data = (_fit_curve(f1, v, cfg), _fit_curve(f2, v, cfg))
    except ValueError:
        fits_at_data = (np.full_like(v, np.nan), np.full_like(v, np.nan))
    markers = labsim.proper_phase_voltages(v.min(), v.max(), cfg)
    svg = render_sweep_svg(v, d1, d2, fit_v if fits else None, *(fits or (None, None)), markers=markers,
                           title=args.title or Path(args.infile).name)
    out = Path(args.out)
    sidecar = out.with_suffix(".txt")
    lines = ["# voltage_V counts_d1 counts_d2 fit_d1 fit_d2",
             "# proper_phase_voltages " + " ".join(f"{m:.6g}" for m in markers)]
    for row in zip(v, d1, d2, *fits_at_data):
        lines.append(" ".join(f"{x:.9g}" for x in row))
    try:
        out.write_text(svg)
        sidecar.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"error: cannot write plot: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {out} and {sidecar}")
    return EXIT_OK


def _clean(x: float) -> float:
    # no "-0.000000000000" in dumps
    return round(x, 12) + 0.0


def _fit_curve(fit: labsim.FringeFit, v, cfg):
    """Fitted counts; flat fits are drawn at their mean level."""
    if fit.flat:
        return labsim.coupling(v, cfg) * fit.offset
    return fit.model(v, cfg)


# ---- bench ---------------------------------------------------------------

def _parse_bindings(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not benchdsl.SYMBOL_RE.fullmatch(name):
            raise UsageError(f"malformed binding {item!r}; expected NAME=VALUE")
        try:
            out[name] = parse_phase(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    return out


def cmd_bench(args) -> int:
    try:
        text = Path(args.file).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        program = benchdsl.parse(text)
        bindings = _parse_bindings(args.bind)
        compiled = benchdsl.compile_bench(program, bindings)
    except benchdsl.BenchParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_USAGE
    except (benchdsl.BenchCompileError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.action == "compile":
        m = compiled.matrix.m
        for row in m:
            print("  ".join(f"({_clean(z.real):+.12f},{_clean(z.imag):+.12f})" for z in row))
        return EXIT_OK

    probs = compiled.run()
    sagnacs = [e for e in program.elements if isinstance(e, benchdsl.Sagnac)]
    phases = [e for e in program.elements if isinstance(e, benchdsl.PhaseShift)]
    if len(sagnacs) == 1 and len(phases) == 1:
        kind = kind_for_config(sagnacs[0].config)
        p = phases[0].value
        phi = bindings[p] if isinstance(p, str) else p
        # classification uses the bench's own probabilities at this phase
        outcome = DeutschOutcome(kind, compiled.final_state(), probs, float(phi))
        report = RunReport(
            oracle=kind.value, gate=kind.gate_name, phase=float(phi),
            p_d1=probs.p_h, p_d2=probs.p_v,
            classification=classify(outcome).value,
            quantum_queries=1, classical_queries=classical_evaluations(kind)[1],
            gate_source=f"bench({sagnacs[0].config})",
        )
        _emit(report, args.json)
    else:
        res = {"p_d1": probs.p_h, "p_d2": probs.p_v}
        _emit(res, args.json, f"P(D1) [H]       {probs.p_h:.12f}\nP(D2) [V]       {probs.p_v:.12f}")
    return EXIT_OK


# ---- parser --------------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        return 42


def _add_sweep_flags(p, defaults=labsim.SweepConfig()):
    p.add_argument("--rate", type=float, default=defaults.rate, help="photons per second")
    p.add_argument("--integration-time", type=float, default=defaults.integration_time, help="seconds per point")
    p.add_argument("--v-start", type=float, default=defaults.v_start)
    p.add_argument("--v-end", type=float, default=defaults.v_end)
    p.add_argument("--v-step", type=float, default=defaults.v_step)
    p.add_argument("--volts-per-period", type=float, default=defaults.volts_per_period)
    p.add_argument("--phase-offset", type=parse_phase, default=defaults.phase_offset)
    p.add_argument("--visibility", type=float, default=defaults.visibility)
    p.add_argument("--extinction", type=float, default=defaults.extinction)
    p.add_argument("--drift-per-volt", type=float, default=defaults.drift_per_volt)
    p.add_argument("--background-prob", type=float, default=defaults.background_prob)
    p.add_argument("--seed", type=int, default=_default_seed(), help=f"RNG seed (default ${SEED_ENV} or 42)")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagnac-deutsch", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gates = sub.add_parser("gates", help="gate identity checks")
    gsub = gates.add_subparsers(dest="action", required=True)
    verify = gsub.add_parser("verify")
    verify.add_argument("--self-test", choices=["wrong-dp"], default=None,
                        help="negative control: flip the dove prism sign")
    verify.set_defaults(func=cmd_gates_verify)

    run = sub.add_parser("run", help="single Deutsch run")
    run.add_argument("--oracle", type=parse_oracle, required=True, help="const0 | const1 | id | inv")
    run.add_argument("--phase", type=parse_phase, default=math.pi, help="radians or e.g. pi, 0.5pi")
    run.add_argument("--source", choices=["ideal", "sagnac"], default="ideal")
    run.add_argument("--json", action="store_true")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="simulate a PZT voltage sweep to CSV")
    sweep.add_argument("--oracle", type=parse_oracle, required=True)
    sweep.add_argument("--out", required=True)
    _add_sweep_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    analyze = sub.add_parser("analyze", help="contrast and visibility analysis of a sweep CSV")
    analyze.add_argument("--in", dest="infile", required=True)
    analyze.add_argument("--drift-per-volt", type=float, default=0.0)
    analyze.add_argument("--json", action="store_true")
    analyze.set_defaults(func=cmd_analyze)

    bench = sub.add_parser("bench", help="compile or run a .bench file")
    bench.add_argument("action", choices=["compile", "run"])
    bench.add_argument("--file", required=True)
    bench.add_argument("--bind", action="append", metavar="NAME=VALUE")
    bench.add_argument("--json", action="store_true")
    bench.set_defaults(func=cmd_bench)

    plot = sub.add_parser("plot", help="SVG plot plus text sidecar from a sweep CSV")
    plot.add_argument("--in", dest="infile", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--drift-per-volt", type=float, default=0.0)
    plot.add_argument("--title", default=None)
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except labsim.InvalidConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
