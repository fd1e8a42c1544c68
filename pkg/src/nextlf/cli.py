"""Command-line interface: ``nextlf simulate | identify | compare | plot``.

Exit codes: 0 success, 1 invalid input, 2 no stable mode identified,
3 file-system failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import report as rp
from .correlate import next_irf
from .dataset import NoiseSpec, add_noise, detrend, load_timeseries_csv, write_timeseries_csv
from .modal import StabilityCriteria
from .pipeline import IdentifyConfig, identify, parse_orders
from .plots import plot_frf, plot_shapes, plot_stabilization
from .simulate import load_simulation_config, modal_solve, simulate_response
from .spectral import irf_to_frf

EXIT_OK, EXIT_INVALID, EXIT_EMPTY, EXIT_IO = 0, 1, 2, 3


def _default_seed() -> int:
    raw = os.environ.get("OMA_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"OMA_SEED must be an integer, got {raw!r}") from None


def parse_band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValueError(f"invalid band {text!r}; expected LO:HI in Hz") from None
    return lo, hi


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".baseline.json")


def cmd_simulate(args) -> int:
    cfg = load_simulation_config(args.config)
    seed = args.seed if args.seed is not None else _default_seed()
    ts = simulate_response(cfg.model, cfg.force, cfg.fs, cfg.duration)
    ts = add_noise(ts, NoiseSpec(args.noise, seed))
    out = Path(args.out)
    write_timeseries_csv(ts, out)
    # Only modes below Nyquist are present in the record.
    baseline = modal_solve(cfg.model).within(0.0, cfg.fs / 2)
    source = {"config": cfg.source, "noise": args.noise, "noise_seed": seed}
    rp.write_json(rp.baseline_document(baseline, source), sidecar_path(out))
    print(f"wrote {out} ({ts.n_channels} channels x {ts.n_samples} samples)")
    return EXIT_OK


def _identify_config(args) -> IdentifyConfig:
    base = rp.read_json(args.config) if args.config else {}
    cfg = IdentifyConfig.from_dict(base)
    changes = {}
    for flag, key in (
        ("method", "method"), ("ref", "ref_channel"), ("lags", "n_lags"),
        ("estimator", "estimator"), ("normalization", "normalization"),
        ("jobs", "jobs"), ("hankel_size", "hankel_rows"),
    ):
        value = getattr(args, flag)
        if value is not None:
            changes[key] = value
    if args.hankel_size is not None:
        changes["hankel_cols"] = args.hankel_size
    if args.band is not None:
        changes["band"] = parse_band(args.band)
    if args.bandpass:
        changes["bandpass"] = True
    if args.no_detrend:
        changes["detrend"] = False
    if args.orders is not None:
        changes["orders"] = parse_orders(args.orders)
    if args.seed is not None:
        changes["seed"] = args.seed
    elif "seed" not in base:
        changes["seed"] = _default_seed()
    crit = cfg.criteria.to_dict()
    for flag, key in (("df_tol", "df_tol"), ("dz_tol", "dz_tol"),
                      ("mac_tol", "mac_tol"), ("min_consec", "min_consecutive")):
        value = getattr(args, flag)
        if value is not None:
            crit[key] = value
    changes["criteria"] = StabilityCriteria(**crit)
    return cfg.with_(**changes)


def cmd_identify(args) -> int:
    config = _identify_config(args)
    ts = load_timeseries_csv(args.data)
    if config.ref_channel >= ts.n_channels:
        raise ValueError(
            f"reference channel {config.ref_channel} out of range for {ts.n_channels} channels"
        )
    baseline = None
    if args.baseline:
        baseline = rp.load_modal_set(args.baseline)
    elif sidecar_path(args.data).exists():
        baseline = rp.load_modal_set(sidecar_path(args.data))

    result = identify(ts, config)
    doc = rp.build_report(result, config, args.data, ts, baseline, include_timing=args.timing)
    out = Path(args.out)
    rp.write_json(doc, out)
    if not args.no_plots:
        stem = out.with_suffix("")
        frf = result.frf if result.frf is not None else irf_to_frf(result.irf)
        plot_frf(frf, f"{stem}.frf.svg")
        plot_stabilization(doc["diagram"], f"{stem}.stab.svg", result.modes)
        if len(result.modes):
            plot_shapes(result.modes, f"{stem}.shapes.svg")
    n = len(result.modes)
    print(f"{config.method}: {n} stable mode(s); report written to {out}")
    for i, m in enumerate(result.modes, 1):
        print(f"  {i:2d}  f = {m.frequency:10.4f} Hz  zeta = {100 * m.damping:6.3f} %")
    if n == 0:
        print(f"warning: {result.modes.note}", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_compare(args) -> int:
    doc = rp.comparison_document(rp.read_json(args.a), rp.read_json(args.b))
    text = rp.format_comparison(doc)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        rp.write_json(doc, out)
        txt = out.with_suffix(".txt")
        try:
            txt.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {txt}: {exc.strerror or exc}") from exc
    return EXIT_OK


def cmd_plot(args) -> int:
    src = Path(args.input)
    if args.kind == "frf":
        if src.suffix.lower() == ".json":
            raise ValueError("an FRF plot is drawn from a time-series CSV, not a JSON document")
        ts = detrend(load_timeseries_csv(src))
        irf = next_irf(ts, args.ref, args.lags, normalization=args.normalization)
        plot_frf(irf_to_frf(irf), args.out)
    else:
        if src.suffix.lower() == ".csv":
            raise ValueError(f"a {args.kind} plot is drawn from a JSON report, not a CSV")
        doc = rp.read_json(src)
        if args.kind == "stab":
            if "diagram" not in doc:
                raise ValueError(f"{src} holds no stabilization diagram")
            plot_stabilization(doc["diagram"], args.out, rp.load_modal_set(doc))
        else:
            plot_shapes(rp.load_modal_set(doc), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nextlf", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a structure and write a CSV record")
    s.add_argument("config", help="simulation config (JSON)")
    s.add_argument("--noise", type=float, default=0.0,
                   help="noise level relative to each channel's std (0.005 = 0.5%%)")
    s.add_argument("--seed", type=int, help="noise seed (default: $OMA_SEED or 0)")
    s.add_argument("--out", required=True, help="output CSV path")
    s.set_defaults(func=cmd_simulate)

    i = sub.add_parser("identify", help="identify modes from a CSV record")
    i.add_argument("data", help="time-series CSV")
    i.add_argument("--config", help="identify config (JSON); flags override it")
    i.add_argument("--method", choices=["loewner", "era"])
    i.add_argument("--ref", type=int, help="reference channel index")
    i.add_argument("--lags", type=int, help="number of correlation lags")
    i.add_argument("--band", help="frequency band LO:HI [Hz]")
    i.add_argument("--bandpass", action="store_true", help="band-pass filter to --band first")
    i.add_argument("--orders", help="model orders start:step:stop (inclusive)")
    i.add_argument("--df-tol", type=float)
    i.add_argument("--dz-tol", type=float)
    i.add_argument("--mac-tol", type=float)
    i.add_argument("--min-consec", type=int)
    i.add_argument("--seed", type=int, help="tangential-direction seed (default: $OMA_SEED or 0)")
    i.add_argument("--jobs", type=int, help="parallel order identifications")
    i.add_argument("--estimator", choices=["direct", "spectral"])
    i.add_argument("--normalization", choices=["unbiased", "biased"])
    i.add_argument("--no-detrend", action="store_true")
    i.add_argument("--hankel-size", type=int, help="ERA Hankel block rows and columns")
    i.add_argument("--baseline", help="baseline sidecar or report to compare against")
    i.add_argument("--timing", action="store_true", help="record stage timings in the report")
    i.add_argument("--no-plots", action="store_true")
    i.add_argument("--out", required=True, help="output report (JSON)")
    i.set_defaults(func=cmd_identify)

    c = sub.add_parser("compare", help="pair and compare the modes of two reports")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--out", help="comparison JSON (a .txt table is written alongside)")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("plot", help="draw an SVG figure")
    g.add_argument("input", help="CSV for --kind frf, report JSON otherwise")
    g.add_argument("--kind", choices=["frf", "stab", "shapes"], required=True)
    g.add_argument("--ref", type=int, default=0)
    g.add_argument("--lags", type=int)
    g.add_argument("--normalization", choices=["unbiased", "biased"], default="unbiased")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_plot)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
