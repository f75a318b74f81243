"""Command-line front end.

Subcommands: `constants` (bound constants + provenance, with a
sampled-vs-analytic cross-check for the builtin example), `certify`
(serialized certificates for the requested pipelines), `compare`
(response vs envelopes vs comparison solutions as CSV with a '#'
report trailer), and `simulate` (raw trajectory CSV). Exit codes:
0 success, 2 config error, 3 infeasible certificate, 4 numerical
failure. Output is deterministic for a fixed config and seed.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from .config import RunConfig, load_config, resolve_split
from .errors import (
    CertificationError,
    ConfigError,
    InternalInconsistencyError,
    NumericalFailureError,
)
from .estimates import certify_classical, check_comparison_lemmas, search_alpha_rho
from .functional import check_functional_bounds, trajectory_values
from .homogeneity import sampled_bound_constants
from .sim import check_envelope, integrate

CSV_COLUMNS = ("t", "hom_norm", "envelope_classical", "envelope_razumikhin",
               "v", "u_classical", "u_razumikhin")
_CONSTANT_NAMES = ("m", "eta", "beta", "psi", "alpha0", "alpha1", "w")


def _fmt(x) -> str:
    return f"{float(x):.17e}"


def _g(x) -> str:
    return f"{float(x):.17g}"


def _fmt_value(v) -> str:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return _g(arr)
    if arr.ndim == 1:
        return "[" + ", ".join(_g(x) for x in arr) + "]"
    return "[" + "; ".join("[" + ", ".join(_g(x) for x in row) + "]" for row in arr) + "]"


def _write_text(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _razumikhin_certificate(cfg: RunConfig, split=None):
    """Search certificate honoring the configured alpha/rho/split grids;
    a fixed `split` (compare mode) restricts the search to it."""
    opts = cfg.certificate
    w, h = cfg.constants.w, cfg.h
    if split is None:
        grid = opts.split_grid or (opts.split_fractions,)
        splits = [resolve_split(f, w, h) for f in grid]
    else:
        splits = [split]
    alpha_grid = (opts.alpha,) if opts.alpha is not None else opts.alpha_grid
    return search_alpha_rho(cfg.constants, cfg.model.structure, h,
                            split_grid=splits, alpha_grid=alpha_grid,
                            rho_fractions=opts.rho_fractions,
                            delta_margin=opts.delta_margin)


def _classical_certificate(cfg: RunConfig, split=None):
    if split is None:
        split = resolve_split(cfg.certificate.split_fractions, cfg.constants.w, cfg.h)
    return certify_classical(cfg.constants, cfg.model.structure, cfg.h,
                             split=split, delta_margin=cfg.certificate.delta_margin)


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    bc = cfg.constants
    lines = [f"constants report ({cfg.system_kind}, source={cfg.constants_source})"]
    for name in _CONSTANT_NAMES:
        prov = bc.provenance.get(name)
        tag = prov.kind if prov is not None else "unspecified"
        lines.append(f"  {name:<6} = {_fmt_value(getattr(bc, name))}  [{tag}]")
    if cfg.analytic_constants is not None:
        grid, safety = cfg.sampling, cfg.safety
        sampled = sampled_bound_constants(cfg.model, grid, safety=safety)
        ana = cfg.analytic_constants
        lines.append("")
        lines.append(f"sampled-vs-analytic cross-check (samples={grid.samples}, "
                     f"pair_grid={grid.pair_grid}, seed={grid.seed}, safety={_g(safety)})")
        for name in _CONSTANT_NAMES:
            a = np.asarray(getattr(ana, name), dtype=float)
            s = np.asarray(getattr(sampled, name), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(a == 0.0, np.nan, s / a)
            lines.append(f"  {name:<6} analytic={_fmt_value(a)} sampled={_fmt_value(s)} "
                         f"ratio={_fmt_value(ratio)}")
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def cmd_certify(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    pipeline = args.pipeline or cfg.pipeline
    report = {}
    if pipeline in ("classical", "both"):
        report["classical"] = _classical_certificate(cfg).to_dict()
    if pipeline in ("razumikhin", "both"):
        report["razumikhin"] = _razumikhin_certificate(cfg).to_dict()
    _write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _report_lines(cfg: RunConfig, classical, razumikhin, traj, phi_norm) -> list:
    out = []

    def add(line: str = ""):
        out.append("# " + line if line else "#")

    add("report")
    add(f"phi_hom_norm = {_g(phi_norm)}")
    for name, cert in (("classical", classical), ("razumikhin", razumikhin)):
        add(f"{name}: Delta = {_g(cert.Delta)}, delta = {_g(cert.delta)}, "
            f"admissible = {str(cert.admissible(phi_norm)).lower()}")
        if not cert.admissible(phi_norm):
            add(f"warning: history hom-norm exceeds the {name} radius; "
                f"its envelope column is not certified")
        rep = check_envelope(traj, cert.envelope_params(), phi_norm)
        add(f"containment_{name}: pass={str(rep.passed).lower()} "
            f"max_violation={_g(rep.max_violation)} nodes={rep.nodes} "
            f"tol={_g(rep.tolerance)}")
    add("functional bound checks (classical certificate):")
    for line in str(check_functional_bounds(traj, classical.functional)).splitlines():
        add("  " + line)
    add("functional bound checks (razumikhin certificate):")
    for line in str(check_functional_bounds(traj, razumikhin.functional)).splitlines():
        add("  " + line)
    add("comparison lemma checks (classical certificate):")
    for line in str(check_comparison_lemmas(traj, classical)).splitlines():
        add("  " + line)
    add("comparison lemma checks (razumikhin certificate):")
    for line in str(check_comparison_lemmas(traj, razumikhin)).splitlines():
        add("  " + line)
    if traj.clamped_steps:
        add(f"warning: {traj.clamped_steps} integration steps clamped to the "
            f"domain boundary")
    return out


def cmd_compare(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if cfg.history is None:
        raise ConfigError("config.history: required for compare")
    s = cfg.model.structure
    split = resolve_split(cfg.certificate.split_fractions, cfg.constants.w, cfg.h)
    classical = _classical_certificate(cfg, split=split)
    razumikhin = _razumikhin_certificate(cfg, split=split)
    traj = integrate(cfg.model, cfg.history, cfg.horizon,
                     steps_per_delay=cfg.steps_per_delay)
    trajectory_values(traj, split, quad_panels=cfg.quad_panels)
    phi_norm = cfg.history.sup_hom_norm(s)

    columns = (traj.times, traj.hom_norms,
               classical.envelope(traj.times, phi_norm),
               razumikhin.envelope(traj.times, phi_norm),
               traj.v_series,
               classical.comparison(traj.times, phi_norm),
               razumikhin.comparison(traj.times, phi_norm))
    lines = [",".join(CSV_COLUMNS)]
    for k in range(traj.times.size):
        lines.append(",".join(_fmt(col[k]) for col in columns))
    lines.extend(_report_lines(cfg, classical, razumikhin, traj, phi_norm))
    _write_text("\n".join(lines) + "\n", args.out)

    if args.plot:
        from .plots import render_compare_figure
        render_compare_figure(
            traj.times, traj.hom_norms,
            {"classical": columns[2], "razumikhin": columns[3]},
            traj.v_series,
            {"classical": columns[5], "razumikhin": columns[6]},
            args.plot, delta=classical.delta)
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if cfg.history is None:
        raise ConfigError("config.history: required for simulate")
    traj = integrate(cfg.model, cfg.history, cfg.horizon,
                     steps_per_delay=cfg.steps_per_delay)
    n = cfg.model.structure.n
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["hom_norm"]
    lines = [",".join(header)]
    for k in range(traj.times.size):
        row = [_fmt(traj.times[k])]
        row.extend(_fmt(traj.states[k, i]) for i in range(n))
        row.append(_fmt(traj.hom_norms[k]))
        lines.append(",".join(row))
    lines.append("# report")
    lines.append(f"# dt = {_g(traj.dt)}, steps_per_delay = {traj.steps_per_delay}, "
                 f"nodes = {traj.times.size}")
    lines.append(f"# phi_hom_norm = {_g(cfg.history.sup_hom_norm(cfg.model.structure))}")
    if traj.clamped_steps:
        lines.append(f"# warning: {traj.clamped_steps} integration steps clamped "
                     f"to the domain boundary")
    _write_text("\n".join(lines) + "\n", args.out)

    if args.plot:
        from .plots import render_simulation_figure
        render_simulation_figure(traj.times, traj.states, traj.hom_norms, args.plot)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _u64(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homdelay",
        description="Certified attraction regions and decay envelopes for "
                    "weighted-homogeneous time-delay systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None,
                       help="output file (default: stdout)")
        p.add_argument("--seed", type=_u64, default=None,
                       help="override the config seed for all sampling")

    p = sub.add_parser("constants", help="bound constants with provenance")
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("certify", help="attraction-region certificates as JSON")
    common(p)
    p.add_argument("--pipeline", choices=("classical", "razumikhin", "both"),
                   default=None, help="override the config pipeline selection")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("compare",
                       help="response vs envelopes vs comparison solutions (CSV)")
    common(p)
    p.add_argument("--plot", default=None, metavar="PATH",
                   help="also render the comparison figure to PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="raw trajectory (CSV)")
    common(p)
    p.add_argument("--plot", default=None, metavar="PATH",
                   help="also render the trajectory figure to PATH")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CertificationError as exc:
        print(f"infeasible certificate: {exc}", file=sys.stderr)
        return 3
    except (NumericalFailureError, InternalInconsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
