"""Command-line entry point.

Subcommands: theory, sample, trace, mc-length, mc-b0, mc-giant, mc-tail,
plot.  Primary results are printed as JSON to stdout (CSV with --csv for
the experiment commands).  Exit codes: 0 success, 1 numeric failure with
the flagged partial result still serialized, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import geometry, montecarlo, theory
from .ensembles import ComplexPolynomial, EnsembleSpec, sample
from .geometry import GridConfig
from .montecarlo import ExperimentConfig
from .theory import QuadratureConfig

_POLY_TERM = re.compile(
    r"""(?P<sign>[+-])?\s*
        (?P<coeff>\d+)?\s*
        (?:\*\s*)?
        (?P<var>z)?
        (?:\^(?P<power>\d+))?\s*""",
    re.VERBOSE,
)


def parse_poly(text: str) -> ComplexPolynomial:
    """Parse integer-coefficient sums of c*z^k terms, e.g. 'z^2-4'."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs = {}
    pos = 0
    while pos < len(s):
        m = _POLY_TERM.match(s, pos)
        if not m or m.end() == pos or (m.group("coeff") is None and m.group("var") is None):
            raise ValueError(f"cannot parse polynomial at ...{s[pos:]!r}")
        sign = -1 if m.group("sign") == "-" else 1
        coeff = int(m.group("coeff")) if m.group("coeff") else 1
        if m.group("var"):
            power = int(m.group("power")) if m.group("power") else 1
        else:
            if m.group("power") is not None:
                raise ValueError(f"exponent without variable in {text!r}")
            power = 0
        coeffs[power] = coeffs.get(power, 0) + sign * coeff
        pos = m.end()
    degree = max(coeffs)
    if degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    return ComplexPolynomial.from_coefficients(
        [complex(coeffs.get(k, 0)) for k in range(degree + 1)]
    )


def emit_svg(curve: geometry.LevelSetCurve, root_list, path: str):
    """Write a standalone SVG: one path per component, root markers, unit circle."""
    pad = 1.1
    extent = 1.0
    for comp in curve.components:
        if len(comp):
            extent = max(extent, float(np.max(np.abs(comp.real))),
                         float(np.max(np.abs(comp.imag))))
    for r in root_list:
        extent = max(extent, abs(complex(r)))
    half = pad * extent
    stroke = 0.004 * half
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{-half:.6f} {-half:.6f} '
        f'{2 * half:.6f} {2 * half:.6f}" width="640" height="640">',
        f'<rect x="{-half:.6f}" y="{-half:.6f}" width="{2 * half:.6f}" '
        f'height="{2 * half:.6f}" fill="white"/>',
        f'<circle cx="0" cy="0" r="1" fill="none" stroke="#bbbbbb" '
        f'stroke-width="{stroke:.6f}" stroke-dasharray="{4 * stroke:.6f}"/>',
    ]
    for comp in curve.components:
        pts = " ".join(f"{v.real:.6f},{-v.imag:.6f}" for v in comp)
        lines.append(
            f'<path d="M {pts} Z" fill="none" stroke="#123a8c" '
            f'stroke-width="{stroke:.6f}"/>'
        )
    for r in root_list:
        r = complex(r)
        lines.append(
            f'<circle cx="{r.real:.6f}" cy="{-r.imag:.6f}" r="{2 * stroke:.6f}" '
            f'fill="#c02020"/>'
        )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lemni",
        description="Random polynomial lemniscates: theory values, sampling, "
        "tracing, Monte Carlo experiments, SVG figures.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_ensemble_args(p, degrees=False, deferred=False):
        # experiment commands defer defaults so a --config file can fill them
        p.add_argument("--ensemble", default=None if deferred else "kac",
                       choices=["kac", "kostlan", "weyl", "recip_binom", "custom"],
                       help="Gaussian coefficient model (default kac)")
        p.add_argument("--weights", default=None,
                       help="comma-separated positive variances (custom ensemble)")
        if degrees:
            p.add_argument("--degrees", default=None,
                           help="comma-separated list of polynomial degrees")
        p.add_argument("--degree", type=int, default=None, help="polynomial degree")

    t = sub.add_parser("theory", help="evaluate closed-form expectations")
    add_ensemble_args(t)
    t.add_argument("--limit", action="store_true",
                   help="evaluate the large-n limit constant instead of finite n")
    t.add_argument("--tolerance", type=float, default=1e-6,
                   help="absolute quadrature tolerance")

    s = sub.add_parser("sample", help="sample one polynomial and print coefficients")
    add_ensemble_args(s)
    s.add_argument("--seed", type=int, default=0, help="64-bit sampling seed")

    tr = sub.add_parser("trace", help="extract a lemniscate and print its summary")
    add_ensemble_args(tr)
    tr.add_argument("--seed", type=int, default=0, help="64-bit sampling seed")
    tr.add_argument("--poly", default=None,
                    help="literal integer polynomial, e.g. 'z^2-4'")
    tr.add_argument("--grid-depth", type=int, default=None,
                    help="maximum refinement depth of the extraction grid")
    tr.add_argument("--out", default=None, help="write full curve JSON to this file")

    for name, extra in (
        ("mc-length", "empirical mean length vs the closed form"),
        ("mc-b0", "component-count statistics"),
        ("mc-giant", "giant-component frequency"),
        ("mc-tail", "tail frequencies P(length >= L)"),
    ):
        m = sub.add_parser(name, help=extra)
        add_ensemble_args(m, degrees=True, deferred=True)
        m.add_argument("--trials", type=int, default=None,
                       help="trials per degree (default 200)")
        m.add_argument("--seed", type=int, default=None,
                       help="master experiment seed (default 0)")
        m.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: LEMNI_THREADS or all cores); "
                       "does not change results")
        m.add_argument("--out", default=None, help="output directory for CSV/JSON")
        m.add_argument("--csv", action="store_true",
                       help="print trial records as CSV instead of a JSON summary")
        m.add_argument("--grid-depth", type=int, default=None,
                       help="maximum refinement depth of the extraction grid")
        m.add_argument("--config", default=None,
                       help="experiment config JSON file; flags override its fields")
        if name == "mc-giant":
            m.add_argument("--radius", type=float, default=0.5,
                           help="circle radius r of the certified event")
        if name == "mc-tail":
            m.add_argument("--threshold", default="20",
                           help="comma-separated length thresholds L")

    pl = sub.add_parser("plot", help="emit an SVG figure of a lemniscate")
    add_ensemble_args(pl)
    pl.add_argument("--seed", type=int, default=0, help="64-bit sampling seed")
    pl.add_argument("--poly", default=None, help="literal integer polynomial")
    pl.add_argument("--grid-depth", type=int, default=None,
                    help="maximum refinement depth of the extraction grid")
    pl.add_argument("--out", required=True, help="output SVG path")
    return ap


def _spec_from_args(args, degree=None) -> EnsembleSpec:
    deg = degree if degree is not None else args.degree
    if deg is None:
        raise ValueError("--degree is required here")
    kind = args.ensemble or "kac"
    weights = None
    if kind == "custom":
        if not args.weights:
            raise ValueError("--weights is required for the custom ensemble")
        weights = tuple(float(x) for x in args.weights.split(","))
    return EnsembleSpec(kind=kind, degree=deg, custom_weights=weights)


def _grid_from_args(args) -> GridConfig:
    base = montecarlo.MC_GRID
    if getattr(args, "grid_depth", None) is None:
        return base
    return GridConfig(
        initial_cells_per_axis=base.initial_cells_per_axis,
        max_depth=args.grid_depth,
        vertex_tolerance=base.vertex_tolerance,
        length_refine_tolerance=base.length_refine_tolerance,
    )


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("LEMNI_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _trace_polynomial(args) -> ComplexPolynomial:
    if args.poly:
        return parse_poly(args.poly)
    spec = _spec_from_args(args)
    return sample(spec, args.seed)


def _cmd_theory(args) -> int:
    qc = QuadratureConfig(abs_tolerance=args.tolerance)
    if args.limit:
        fn = {
            "kac": theory.kac_limit_constant,
            "kostlan": theory.kostlan_limit_constant,
            "weyl": theory.weyl_limit_constant,
        }.get(args.ensemble)
        if fn is None:
            raise ValueError(
                f"no named limit constant for ensemble {args.ensemble!r}; "
                "use finite-degree sweeps instead"
            )
        print(json.dumps({"ensemble": args.ensemble, "constant": fn(qc)}))
        return 0
    spec = _spec_from_args(args)
    est = theory.expected_length(spec, qc)
    print(json.dumps({
        "ensemble": args.ensemble, "n": spec.degree, "value": est.value,
        "error_bound": est.error_bound, "cells": est.cells_used,
    }))
    return 0 if est.error_bound <= args.tolerance else 1


def _cmd_sample(args) -> int:
    spec = _spec_from_args(args)
    p = sample(spec, args.seed)
    print(json.dumps({
        "ensemble": spec.to_json_dict(), "seed": args.seed,
        "coefficients": [[c.real, c.imag] for c in p.coefficients],
    }))
    return 0


def _cmd_trace(args) -> int:
    p = _trace_polynomial(args)
    curve = geometry.extract_lemniscate(p, _grid_from_args(args))
    doc = curve.to_json_dict()
    doc["flagged"] = curve.flagged()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    brief = {k: doc[k] for k in (
        "b0", "total_length", "unresolved_cells", "length_converged",
        "depth_used", "unenclosed_roots", "enclosure_conflicts", "flagged",
    )}
    print(json.dumps(brief))
    return 1 if curve.flagged() else 0


def _mc_config(args) -> ExperimentConfig:
    """Experiment config from a JSON file, with explicit flags overriding."""
    base = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = ExperimentConfig.from_json_dict(json.load(fh))
    if args.degrees:
        degrees = tuple(int(d) for d in args.degrees.split(","))
    elif args.degree is not None:
        degrees = (args.degree,)
    elif base is not None:
        degrees = base.degrees
    else:
        raise ValueError("--degrees (or --degree) is required")
    if args.ensemble is not None or base is None:
        ensemble = _spec_from_args(args, degree=degrees[0])
    else:
        ensemble = base.ensemble
    trials = args.trials if args.trials is not None else (
        base.trials_per_degree if base else 200)
    seed = args.seed if args.seed is not None else (base.master_seed if base else 0)
    if args.grid_depth is not None or base is None:
        grid = _grid_from_args(args)
    else:
        grid = base.grid
    return ExperimentConfig(
        ensemble=ensemble, degrees=degrees, trials_per_degree=trials,
        master_seed=seed, grid=grid,
        output_path=args.out or (base.output_path if base else None),
    )


def _print_records_csv(records):
    print(montecarlo.CSV_HEADER)
    for r in records:
        print(montecarlo.record_csv_row(r))


def _cmd_mc(args) -> int:
    cfg = _mc_config(args)
    workers = _threads(args)
    if args.command == "mc-length":
        res = montecarlo.run_length_experiment(cfg, workers=workers)
    elif args.command == "mc-b0":
        res = montecarlo.run_components_experiment(cfg, workers=workers)
    elif args.command == "mc-giant":
        res = montecarlo.run_giant_experiment(cfg, args.radius, workers=workers)
    else:
        thresholds = [float(x) for x in args.threshold.split(",")]
        res = montecarlo.outlier_tail_estimate(cfg, thresholds, workers=workers)
    if args.csv:
        _print_records_csv(res.records)
    else:
        print(json.dumps(res.to_json_dict(), sort_keys=True))
    return 0


def _cmd_plot(args) -> int:
    p = _trace_polynomial(args)
    curve = geometry.extract_lemniscate(p, _grid_from_args(args))
    emit_svg(curve, geometry.roots(p), args.out)
    print(json.dumps({"out": args.out, "b0": curve.b0,
                      "total_length": curve.total_length}))
    return 1 if curve.flagged() else 0


def dispatch(argv) -> int:
    """Parse argv (no program name) and run; returns the exit code."""
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "theory":
            return _cmd_theory(args)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "trace":
            return _cmd_trace(args)
        if args.command == "plot":
            return _cmd_plot(args)
        if args.command.startswith("mc-"):
            return _cmd_mc(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
