"""Command-line front end (``im3-kit``)."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import closed_form
from .channel_plan import (ChannelPlan, NonlinearityModel, PlanError, equal_plan, load_plan,
                           plan_to_dict)
from .im3_engine import aci_profile, power_db, signal_term_amplitude
from .qpsk_sim import default_config, measure_qpsk_aci, qpsk_symbols, synthesize_qpsk, intermod_residual
from .tone_oracle import (CSV_HEADER, GridError, PhaseRealization, default_grid, emit_fig1_data,
                          measure_aci_profile_mc, oracle_plan, write_fig1_csv)

FIGURE_SIZES = {"fig2": 9, "fig3": 10, "fig4": 31, "fig5": 99}


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def format_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def format_table(columns, rows) -> str:
    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "pseudo" if v else ""
        if isinstance(v, (int, np.integer)):
            return str(v)
        return f"{float(v):.6g}"

    body = [[cell(v) for v in r] for r in rows]
    widths = [max(len(c), *(len(r[i]) for r in body)) if body else len(c)
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in body]
    return "\n".join(lines) + "\n"


def emit(columns, rows, fmt: str, extra: dict | None = None) -> str:
    rows = list(rows)
    if fmt == "csv":
        return format_csv(columns, rows)
    if fmt == "json":
        doc = {"columns": list(columns),
               "rows": [[_jsonable(v) for v in r] for r in rows]}
        doc.update(extra or {})
        return json.dumps(doc, indent=2) + "\n"
    return format_table(columns, rows)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def parse_sweep(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(p) for p in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sweep expects lo..hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("--sweep lo must not exceed hi")
    return lo, hi


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _plan(args) -> ChannelPlan:
    if args.plan:
        return load_plan(args.plan)
    if args.channels:
        return equal_plan(args.channels)
    raise PlanError("give --plan FILE or --channels N")


def _model(args) -> NonlinearityModel:
    return NonlinearityModel(args.rho1, args.rho3)


def _simulable(plan: ChannelPlan) -> ChannelPlan:
    try:
        default_grid(plan)
        return plan
    except GridError:
        return oracle_plan(plan)


def profile_doc(plan: ChannelPlan, model: NonlinearityModel) -> dict:
    prof = aci_profile(plan, model)
    return {
        "n_channels": plan.n_channels,
        "normalization": prof.normalization,
        "powers": [float(p) for p in prof.powers],
        "powers_normalized": [float(p) for p in prof.normalized],
        "is_pseudo": list(prof.is_pseudo),
        "signal_amplitudes": [signal_term_amplitude(plan, model, k)
                              for k in range(1, plan.n_channels + 1)],
    }


def cmd_analyze(args) -> str:
    plan, model = _plan(args), _model(args)
    doc = profile_doc(plan, model)
    if args.format == "json":
        return json.dumps(doc, indent=2) + "\n"
    rows = [(n, p, q, s) for n, (p, q, s) in
            enumerate(zip(doc["powers"], doc["powers_normalized"], doc["is_pseudo"]), start=1)]
    if args.format == "csv":
        return format_csv(("n", "power", "power_normalized", "is_pseudo"), rows)
    table = [(n, plan.frequency(n), p, power_db(p, args.db_ref), q, a, s)
             for (n, p, q, s), a in zip(rows, doc["signal_amplitudes"])]
    return format_table(("n", "freq_hz", "power", "power_db", "power_normalized",
                         "signal_amp", "pseudo"), table)


def cmd_gridify(args) -> str:
    plan = _plan(args)
    if args.format == "json":
        return json.dumps(plan_to_dict(plan), indent=2) + "\n"
    rows = [(ch.index, ch.center_frequency, ch.amplitude, ch.is_pseudo) for ch in plan.channels]
    return emit(("n", "freq_hz", "amplitude", "is_pseudo"), rows, args.format)


def cmd_closed_form(args) -> str:
    if args.sweep:
        lo, hi = args.sweep
        return emit(("N", "max_normalized", "ratio_max_min"), closed_form.sweep(lo, hi), args.format)
    if not args.channels:
        raise PlanError("closed-form needs --channels N or --sweep lo..hi")
    N = args.channels
    rows = [(n, closed_form.l_d(N, n), closed_form.l_t(N, n),
             closed_form.equal_power_aci(N, n, 1.0, args.rho3)) for n in range(1, N + 1)]
    return emit(("n", "L_D", "L_T", "P"), rows, args.format)


def oracle_rows(plan, model, trials, seed, workers, method="analytic"):
    sim = _simulable(plan)
    res = measure_aci_profile_mc(sim, model, trials, seed, method=method, workers=workers)
    analytic = aci_profile(plan, model).powers
    for n in range(1, plan.n_channels + 1):
        a, m, s = analytic[n - 1], res.mean[n - 1], res.stderr[n - 1]
        z = (m - a) / s if s > 0 else 0.0
        yield n, a, m, s, z


def cmd_oracle(args) -> str:
    plan, model = _plan(args), _model(args)
    rows = oracle_rows(plan, model, args.trials, args.seed, args.workers, args.method)
    return emit(("n", "analytic", "mc_mean", "mc_stderr", "z"), rows, args.format)


def qpsk_report(plan, model, seed, num_symbols=4096):
    sim = _simulable(plan)
    cfg = default_config(sim, seed=seed, num_symbols=num_symbols)
    return measure_qpsk_aci(sim, model, cfg)


def cmd_qpsk(args) -> str:
    plan, model = _plan(args), _model(args)
    rep = qpsk_report(plan, model, args.seed, args.symbols)
    return emit(("channel", "power_db", "power_db_normalized"), rep.csv_rows(args.db_ref),
                args.format)


def cmd_figures(args) -> str:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _model(args)
    written = []

    def put(name, text):
        path = out / name
        path.write_text(text)
        written.append(path)

    three = equal_plan(3)
    fig1 = emit_fig1_data(three, PhaseRealization.draw(args.seed, 0, 3), model)
    written += write_fig1_csv(fig1, out)
    for fig, N in FIGURE_SIZES.items():
        plan = equal_plan(N)
        prof = aci_profile(plan, model)
        rows = [(n, p, q, s) for n, (p, q, s) in
                enumerate(zip(prof.powers, prof.normalized, prof.is_pseudo), start=1)]
        put(f"{fig}_profile_N{N}.csv", format_csv(("n", "power", "power_normalized", "is_pseudo"), rows))
    lo, hi = args.sweep or (3, 99)
    put("fig6_fig7_sweep.csv", format_csv(("N", "max_normalized", "ratio_max_min"),
                                          closed_form.sweep(lo, hi)))
    if not args.skip_qpsk:
        five = equal_plan(5)
        cfg = default_config(five, seed=args.seed, num_symbols=args.symbols)
        syms = qpsk_symbols(five, cfg)
        x = synthesize_qpsk(five, cfg, cfg.grid, syms)
        y = model.rho1 * x + model.rho3 * x**3
        im = intermod_residual(y, five, syms, cfg.grid, model, "analytic")
        for name, series in (("x", x), ("y3", y), ("intermod", im)):
            put(f"fig8_{name}_spectrum.csv", format_csv(("freq_hz", "power_db"),
                                                        _welch_db(series, cfg)))
        rep = qpsk_report(equal_plan(9), model, args.seed, args.symbols)
        put("fig9_qpsk_N9.csv", format_csv(("channel", "power_db", "power_db_normalized"),
                                           rep.csv_rows(args.db_ref)))
        put("fig9_analytic_N9.csv", format_csv(("n", "power", "power_normalized", "is_pseudo"),
                                               [(n, p, p / 81, False) for n, p in
                                                enumerate(rep.analytic_power, start=1)]))
    return "".join(f"{p}\n" for p in written)


def _welch_db(series, cfg, floor_db=-300.0):
    from scipy.signal import welch

    f, psd = welch(series, fs=cfg.sample_rate, window="hann",
                   nperseg=len(series) // cfg.segments, noverlap=0, detrend=False)
    with np.errstate(divide="ignore"):
        db = np.maximum(10 * np.log10(psd * (f[1] - f[0])), floor_db)
    return zip(f, db)


COMMANDS = {
    "analyze": cmd_analyze,
    "gridify": cmd_gridify,
    "closed-form": cmd_closed_form,
    "oracle": cmd_oracle,
    "qpsk": cmd_qpsk,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--plan", help="JSON channel-plan file")
    common.add_argument("--channels", type=int, help="equal-power plan with N unit carriers")
    common.add_argument("--rho1", type=_finite, default=0.0)
    common.add_argument("--rho3", type=_finite, default=1.0)
    common.add_argument("--trials", type=int, default=2000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--method", choices=("analytic", "projected"), default="analytic",
                        help="signal removal for the tone oracle")
    common.add_argument("--symbols", type=int, default=4096, help="QPSK symbols per carrier")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--db-ref", type=_finite, default=1.0, help="0 dB reference power (V^2)")
    common.add_argument("--sweep", type=parse_sweep, help="range of N, e.g. 3..99")
    common.add_argument("--out", default="figures", help="output directory for figures")
    common.add_argument("--skip-qpsk", action="store_true", help="figures: omit the QPSK data")

    parser = argparse.ArgumentParser(prog="im3-kit", description="Third-order intermodulation "
                                     "ACI power per channel for N carriers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.db_ref <= 0:
        parser.error("--db-ref must be positive")
    try:
        text = COMMANDS[args.command](args)
    except (PlanError, GridError, ValueError, IndexError) as exc:
        print(f"im3-kit: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
