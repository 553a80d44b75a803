"""Command-line interface.

Subcommands cover the ring modulus, the weighted circle-family modulus,
radial Q-norm profiles, FMO and divergence verdicts, Dirichlet-domain
rendering, distortion sweeps, single experiment verification and the suite
runner. Exit codes: 0 pass, 1 any failure, 2 config/usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _emit(data: dict, args) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **data}, indent=2, sort_keys=True)
    out_file = getattr(args, "out_file", None)
    if out_file:
        Path(out_file).write_text(text + "\n")
    else:
        print(text)


def _parse_grid(spec: str):
    try:
        n_r, n_theta = spec.lower().split("x")
        return int(n_r), int(n_theta)
    except ValueError as exc:
        raise ValueError(f"grid must look like 200x600, got {spec!r}") from exc


def _cmd_ring_modulus(args) -> int:
    from .modulus import modulus_discrete, polar_grid, radial_connecting_family, rasterize_family, ring_modulus_exact
    from .quadrature import RingSpec

    ring = RingSpec(args.r1, args.r2)
    n_r, n_theta = _parse_grid(args.grid)
    exact = ring_modulus_exact(ring)
    dom = polar_grid(ring, n_r, n_theta)
    fam = rasterize_family(radial_connecting_family(ring, n_theta), dom)
    res = modulus_discrete(fam, dom, metric=args.metric, tol=args.tol)
    rel = abs(res.value - exact) / exact
    if args.heatmap_file:
        from .modulus import density_to_svg

        density_to_svg(dom, res.extremal, args.heatmap_file,
                       title=f"extremal density, ring ({args.r1}, {args.r2})")
    _emit({
        "exact": exact,
        "discrete": res.value,
        "relative_error": rel,
        "metric": args.metric,
        "grid": [n_r, n_theta],
        "iterations": res.iterations,
        "converged": res.converged,
    }, args)
    return 0 if rel <= args.agree_tol else 1


def _cmd_circle_family(args) -> int:
    from .fields import parse_field
    from .modulus import circle_family_modulus
    from .quadrature import RingSpec

    ring = RingSpec(args.r1, args.r2)
    value, reference = circle_family_modulus(
        ring, parse_field(args.q), n_circles=args.n_circles
    )
    rel = abs(value - reference) / reference
    _emit({
        "discrete": value,
        "reference": reference,
        "relative_gap": rel,
        "n_circles": args.n_circles,
        "q": args.q,
    }, args)
    return 0 if rel <= args.agree_tol else 1


def _cmd_qnorm(args) -> int:
    from .fields import parse_field
    from .quadrature import RingSpec, qnorm_profile

    ring = RingSpec(args.r1, args.r2)
    prof = qnorm_profile(parse_field(args.q), ring, n_samples=args.samples)
    if args.out == "csv":
        if args.out_file:
            prof.to_csv(args.out_file)
        else:
            print("r,qnorm")
            for r, v in zip(prof.radii, prof.values):
                print(f"{float(r)!r},{float(v)!r}")
    else:
        _emit(prof.to_json(), args)
    return 0


def _cmd_fmo(args) -> int:
    from .criteria import default_epsilon_sequence, fmo_check
    from .fields import parse_field

    eps = default_epsilon_sequence(args.eps_start, args.eps_count)
    rep = fmo_check(parse_field(args.q), epsilons=eps, center=complex(args.center))
    if args.svg_file:
        from .svgplot import line_plot_svg, write_svg

        osc = np.maximum(rep.oscillations, 1e-300)
        write_svg(line_plot_svg(
            [("oscillation", rep.epsilons, osc)],
            title=f"mean oscillation of {args.q} (verdict: {rep.verdict})",
            xlabel="epsilon", ylabel="oscillation", logx=True, logy=True,
        ), args.svg_file)
    _emit(rep.to_json(), args)
    return 0


def _cmd_divergence(args) -> int:
    from .criteria import divergence_check
    from .fields import parse_field
    from .quadrature import RingSpec

    rep = divergence_check(parse_field(args.q), RingSpec(args.r1, args.r2))
    if args.svg_file:
        from .svgplot import line_plot_svg, write_svg

        write_svg(line_plot_svg(
            [("partial integral", rep.epsilons, np.maximum(rep.partial_integrals, 1e-300))],
            title=f"reciprocal ring integral of {args.q} (verdict: {rep.verdict})",
            xlabel="epsilon", ylabel="integral", logx=True,
        ), args.svg_file)
    _emit(rep.to_json(), args)
    return 0


def _cmd_dirichlet(args) -> int:
    from .fuchsian import build_dirichlet_domain, dirichlet_membership, enumerate_elements, load_group
    from .svgplot import disk_scene_svg, write_svg

    group = load_group(args.group)
    elements = enumerate_elements(group)
    dom = build_dirichlet_domain(group, elements=elements)

    # ray-march the domain boundary: outermost radius still inside, per angle
    outline = []
    for theta in np.linspace(0.0, 2 * math.pi, args.rays + 1):
        lo, hi = 0.0, 0.999
        if dirichlet_membership(0.999 * np.exp(1j * theta), dom) != "outside":
            outline.append(0.999 * np.exp(1j * theta))
            continue
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if dirichlet_membership(mid * np.exp(1j * theta), dom) == "outside":
                hi = mid
            else:
                lo = mid
        outline.append(lo * np.exp(1j * theta))
    orbit = [g(0j) for g in elements]
    dots = [[w, w * (1 + 1e-9) + 1e-3] for w in orbit]  # tiny strokes mark orbit points
    svg = disk_scene_svg(
        [outline] + dots,
        title=f"Dirichlet domain about 0 ({len(dom.constraints)} constraints)",
    )
    out_file = args.out_file or "dirichlet.svg"
    write_svg(svg, out_file)
    print(out_file)
    return 0


def _cmd_distortion(args) -> int:
    from .mappings import distortion_to_csv, finite_distortion_check, parse_map

    f = parse_map(args.map)
    rep = finite_distortion_check(f, grid=args.grid)
    if args.out == "csv":
        out_file = args.out_file or "distortion.csv"
        distortion_to_csv(f, args.grid, out_file)
        print(out_file)
    summary = {
        "map": args.map,
        "grid": args.grid,
        "finite_distortion": {
            "n_points": rep.n_points,
            "n_violations": rep.n_violations,
            "passed": rep.passed,
        },
    }
    print(json.dumps({"schema_version": SCHEMA_VERSION, **summary}, indent=2, sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    from .experiments import ConfigError, ExperimentConfig, run_experiment

    kind_alias = {"lower-q": "lower_q", "boundary-ext": "boundary_ext"}
    try:
        cfg = ExperimentConfig.from_json(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.kind != kind_alias[args.what]:
        print(f"config error: config kind {cfg.kind!r} does not match {args.what!r}",
              file=sys.stderr)
        return 2
    record = run_experiment(cfg)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.config).parent / "results"
    out_dir.mkdir(parents=True, exist_ok=True)
    record.write(out_dir / f"{record.experiment_id}.json")
    print(json.dumps(record.to_json_dict(with_meta=False), indent=2, sort_keys=True))
    return 0 if record.passed else 1


def _cmd_suite(args) -> int:
    from .experiments import run_suite

    config_dir = Path(args.config_dir)
    if not config_dir.is_dir():
        print(f"config error: {config_dir} is not a directory", file=sys.stderr)
        return 2
    return run_suite(config_dir, args.out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modlab",
        description="Moduli of curve families on the hyperbolic disk: solvers, criteria, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ring-modulus", help="discrete vs exact ring modulus")
    p.add_argument("--r1", type=float, required=True, help="inner hyperbolic radius")
    p.add_argument("--r2", type=float, required=True, help="outer hyperbolic radius")
    p.add_argument("--grid", default="100x300", help="polar grid NRxNT")
    p.add_argument("--tol", type=float, default=1e-5, help="solver tolerance")
    p.add_argument("--metric", choices=["hyperbolic", "euclidean"], default="hyperbolic")
    p.add_argument("--agree-tol", type=float, default=0.05)
    p.add_argument("--out-file")
    p.add_argument("--heatmap-file", help="write the extremal density as an SVG heatmap")
    p.set_defaults(func=_cmd_ring_modulus)

    p = sub.add_parser("circle-family", help="weighted circle-family modulus vs radial reference")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--q", required=True, help="field spec, e.g. const:1")
    p.add_argument("--n-circles", type=int, default=64)
    p.add_argument("--agree-tol", type=float, default=0.05)
    p.add_argument("--out-file")
    p.set_defaults(func=_cmd_circle_family)

    p = sub.add_parser("qnorm", help="radial profile of the circle norm of Q")
    p.add_argument("--q", required=True)
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", choices=["json", "csv"], default="json")
    p.add_argument("--out-file")
    p.set_defaults(func=_cmd_qnorm)

    p = sub.add_parser("fmo", help="finite-mean-oscillation verdict at a point")
    p.add_argument("--q", required=True)
    p.add_argument("--center", default="0")
    p.add_argument("--eps-start", type=float, default=0.4)
    p.add_argument("--eps-count", type=int, default=12)
    p.add_argument("--out-file")
    p.add_argument("--svg-file", help="write a log-log oscillation plot")
    p.set_defaults(func=_cmd_fmo)

    p = sub.add_parser("divergence", help="divergence verdict for the reciprocal ring integral")
    p.add_argument("--q", required=True)
    p.add_argument("--r1", type=float, default=0.0)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--out-file")
    p.add_argument("--svg-file", help="write a partial-integral plot")
    p.set_defaults(func=_cmd_divergence)

    p = sub.add_parser("dirichlet", help="render the Dirichlet domain of a group")
    p.add_argument("--group", required=True, help="group definition JSON")
    p.add_argument("--out", choices=["svg"], default="svg")
    p.add_argument("--rays", type=int, default=720)
    p.add_argument("--out-file")
    p.set_defaults(func=_cmd_dirichlet)

    p = sub.add_parser("distortion", help="distortion sweep of a sample map")
    p.add_argument("--map", required=True, help="map spec, e.g. winding:3")
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--out", choices=["csv", "none"], default="csv")
    p.add_argument("--out-file")
    p.set_defaults(func=_cmd_distortion)

    p = sub.add_parser("verify", help="run one verification experiment")
    p.add_argument("what", choices=["lower-q", "boundary-ext"])
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("suite", help="run every experiment config in a directory")
    p.add_argument("config_dir")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_suite)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failed
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
