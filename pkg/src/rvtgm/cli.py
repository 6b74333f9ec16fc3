"""Command-line interface.

Subcommands: ``psa``, ``extrapolate``, ``fnerg``, ``sample``, ``decompose``,
``hazard``.  Every command writes its delimited outputs plus a
``manifest.json`` into ``--out``; ``--plot`` additionally renders a PNG
figure next to each delimited output.  Exit codes: 0 success, 2 validation
error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

from . import __version__, io, plots
from .engine import RvtConfig, prepare_spectrum, psa_spectrum
from .errors import NumericalError, ValidationError
from .hazard import aggregate_tree, scenario_hazard, ScenarioRate
from .nonergodic import fnerg_factor, fnerg_realizations, sample_field, summarize_factors
from .residuals import ResidualTable, decompose


def _load_config(args) -> RvtConfig:
    return RvtConfig.from_json(args.config) if args.config else RvtConfig()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return secrets.randbits(32)


def cmd_psa(args) -> None:
    cfg = _load_config(args)
    spec = io.read_eas_csv(args.eas)
    scn = io.read_scenario_json(args.scenario)
    result = psa_spectrum(spec, scn, cfg)
    out = _out_dir(args)
    io.write_psa_csv(out / "psa.csv", result)
    outputs = ["psa.csv"]
    if args.plot:
        plots.plot_psa(result, out / "psa.png")
        outputs.append("psa.png")
    io.write_manifest(
        out, "psa", {"eas": args.eas, "scenario": args.scenario}, cfg.to_dict(), None, outputs
    )


def cmd_extrapolate(args) -> None:
    cfg = _load_config(args)
    cfg.extrapolate = True
    spec = io.read_eas_csv(args.eas)
    scn = io.read_scenario_json(args.scenario)
    extended = prepare_spectrum(spec, scn, cfg)
    out = _out_dir(args)
    io.write_eas_csv(out / "extrapolated.csv", extended)
    outputs = ["extrapolated.csv"]
    if args.plot:
        plots.plot_eas(spec, extended, out / "extrapolated.png")
        outputs.append("extrapolated.png")
    io.write_manifest(
        out,
        "extrapolate",
        {"eas": args.eas, "scenario": args.scenario},
        cfg.to_dict(),
        None,
        outputs,
    )


def cmd_fnerg(args) -> None:
    cfg = _load_config(args)
    eas_erg = io.read_eas_csv(args.eas_erg)
    scn = io.read_scenario_json(args.scenario)
    seed = None
    inputs = {"eas_erg": args.eas_erg, "scenario": args.scenario}

    if args.eas_nerg:
        inputs["eas_nerg"] = args.eas_nerg
        results = [fnerg_factor(eas_erg, io.read_eas_csv(args.eas_nerg), scn, cfg)]
    else:
        correlation = io.read_correlation_json(args.correlation) if args.correlation else None
        field = io.read_field_csv(args.field, correlation)
        inputs["field"] = args.field
        if args.correlation:
            inputs["correlation"] = args.correlation
        seed = _resolve_seed(args)
        results = fnerg_realizations(eas_erg, field, scn, cfg, n=args.samples, seed=seed)

    _, mean, sd = summarize_factors(results)
    out = _out_dir(args)
    io.write_fnerg_csv(out / "fnerg.csv", results, mean, sd)
    outputs = ["fnerg.csv"]
    if args.plot:
        plots.plot_fnerg(results, mean, sd, out / "fnerg.png")
        outputs.append("fnerg.png")
    io.write_manifest(out, "fnerg", inputs, cfg.to_dict(), seed, outputs)


def cmd_sample(args) -> None:
    correlation = io.read_correlation_json(args.correlation) if args.correlation else None
    field = io.read_field_csv(args.field, correlation)
    seed = _resolve_seed(args)
    samples = sample_field(field, args.samples, seed)
    out = _out_dir(args)
    io.write_samples_csv(out / "samples.csv", field, samples)
    outputs = ["samples.csv"]
    if args.plot:
        plots.plot_samples(field.grid.freqs, samples, out / "samples.png")
        outputs.append("samples.png")
    inputs = {"field": args.field}
    if args.correlation:
        inputs["correlation"] = args.correlation
    config = {"samples": args.samples, "correlation": field.correlation.__dict__}
    io.write_manifest(out, "sample", inputs, config, seed, outputs)


def cmd_decompose(args) -> None:
    tbl = ResidualTable.from_csv(args.residuals)
    periods = [args.period] if args.period is not None else list(tbl.periods())
    out = _out_dir(args)
    decs = [decompose(tbl, t0) for t0 in periods]

    with open(out / "decompose.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("period_s,dc0,tau0,phi0,sigma0,n_events,n_records\n")
        for d in decs:
            fh.write(
                f"{io.fmt(d.period)},{io.fmt(d.dc0)},{io.fmt(d.tau0)},{io.fmt(d.phi0)},"
                f"{io.fmt(d.sigma0)},{d.n_events},{d.n_records}\n"
            )
    with open(out / "decompose_terms.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("period_s,kind,event_id,station_id,value\n")
        for d in decs:
            rows = tbl.at_period(d.period)
            for ev, term in zip(d.event_ids, d.event_terms):
                fh.write(f"{io.fmt(d.period)},event,{ev},,{io.fmt(term)}\n")
            for i, row in enumerate(rows):
                fh.write(
                    f"{io.fmt(d.period)},record,{tbl.event_id[row]},{tbl.station_id[row]},"
                    f"{io.fmt(d.record_terms[i])}\n"
                )
    outputs = ["decompose.csv", "decompose_terms.csv"]
    if args.plot:
        plots.plot_decomposition(
            [d.period for d in decs],
            [d.tau0 for d in decs],
            [d.phi0 for d in decs],
            out / "decompose.png",
        )
        outputs.append("decompose.png")
    io.write_manifest(out, "decompose", {"residuals": args.residuals}, {}, None, outputs)


def cmd_hazard(args) -> None:
    scenarios, tree, deltas, levels, truncation = io.read_hazard_job_json(args.job)
    curves = []
    for delta in deltas:
        shifted = [
            ScenarioRate(s.rate, s.median_ln + d, s.sigma_ln)
            for s, d in zip(scenarios, delta)
        ]
        curves.append(scenario_hazard(shifted, levels, truncation))
    agg = aggregate_tree(tree, curves)
    out = _out_dir(args)
    io.write_hazard_csv(out / "hazard.csv", agg)
    outputs = ["hazard.csv"]
    if args.plot:
        plots.plot_hazard(agg, out / "hazard.png")
        outputs.append("hazard.png")
    config = {
        "branches": len(tree.branches),
        "scenarios": len(scenarios),
        "truncation_sigmas": truncation,
    }
    io.write_manifest(out, "hazard", {"job": args.job}, config, None, outputs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvtgm",
        description="Random-vibration-theory PSA engine, non-ergodic factors, and hazard",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--config", help="engine configuration JSON")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--plot", action="store_true", help="also render figures")
        if seed:
            p.add_argument("--seed", type=int, help="RNG seed (random and recorded if absent)")

    p = sub.add_parser("psa", help="response spectrum from an EAS file")
    p.add_argument("--eas", required=True, help="EAS CSV (frequency_hz,eas)")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    common(p)
    p.set_defaults(func=cmd_psa)

    p = sub.add_parser("extrapolate", help="extend an EAS file to the configured band")
    p.add_argument("--eas", required=True)
    p.add_argument("--scenario", required=True)
    common(p)
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("fnerg", help="non-ergodic PSA factors")
    p.add_argument("--eas-erg", required=True, help="ergodic EAS CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--eas-nerg", help="non-ergodic EAS CSV (single factor)")
    group.add_argument("--field", help="non-ergodic field CSV (sampled realizations)")
    p.add_argument("--correlation", help="correlation model JSON")
    p.add_argument("--samples", type=int, default=100, help="realization count (default 100)")
    p.add_argument("--scenario", required=True)
    common(p, seed=True)
    p.set_defaults(func=cmd_fnerg)

    p = sub.add_parser("sample", help="draw correlated field realizations")
    p.add_argument("--field", required=True, help="non-ergodic field CSV")
    p.add_argument("--correlation", help="correlation model JSON")
    p.add_argument("--samples", type=int, default=100)
    common(p, seed=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decompose", help="residual decomposition per period")
    p.add_argument("--residuals", required=True, help="residual flatfile CSV")
    p.add_argument("--period", type=float, help="single period (default: all in file)")
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("hazard", help="logic-tree hazard curves")
    p.add_argument("--job", required=True, help="hazard job JSON (scenarios + branches)")
    common(p)
    p.set_defaults(func=cmd_hazard)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
