"""Command line entry point: ``sphereflow <subcommand> [--config FILE] [--out DIR]``.

Exit codes: 0 when every hard check passes, 1 when one fails (the first
failing invariant is named on stderr), 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import ckn, sharp
from .config import ConfigError, RunConfig, format_config, parse_config
from .profiles import initial_profiles
from .radial import RadialGrid
from .runner import run, self_convergence
from .solver import DiagnosticsRecord, SolverError, init
from .uniqueness import (
    DiffRecord,
    gronwall_check,
    pressure_lipschitz_check,
    twin_run,
    twin_states,
)

log = logging.getLogger("sphereflow")

SUBCOMMANDS = ("simulate", "verify-estimates", "ckn-check", "uniqueness-run", "convergence")
MIN_ORDER = 1.0


class CheckFailed(Exception):
    """A hard assertion failed; the message names the invariant."""


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _load(args) -> RunConfig:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8")) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.refine and args.command != "convergence":
        overrides["J"] = cfg.J * 2**args.refine
    if overrides:
        cfg = RunConfig(**{**cfg.__dict__, **overrides})
    return cfg


def _state0(cfg: RunConfig):
    rho0, u0 = initial_profiles(cfg.profile, cfg.R, cfg.amplitude, cfg.rho_ref)
    return init(rho0, u0, cfg.R, cfg.N, cfg.gas, cfg.J)


# -- subcommands -----------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path) -> None:
    res = run(
        _state0(cfg), cfg.gas, cfg.t_end,
        cfl=cfg.cfl, splitting=cfg.splitting, output_interval=cfg.output_interval, R=cfg.R,
    )
    write_csv(out / "diagnostics.csv", DiagnosticsRecord.COLUMNS, (r.row() for r in res.records))
    wanted = {r.t for r in res.records}
    rows = []
    for s in res.traj.states:
        if s.t not in wanted:
            continue
        v_node = 1.0 / s.node_density()
        for j in range(s.J + 1):
            rows.append((s.t, j, s.mass_nodes[j], s.r[j], s.u[j], v_node[j]))
    write_csv(out / "trajectory.csv", ("t", "node", "y", "r", "u", "v"), rows)
    print(f"simulate: {len(res.traj) - 1} steps to t={res.traj.final.t:.6g}, "
          f"energy drift {res.total_energy_drift:.3e}")
    if res.failures:
        raise CheckFailed(res.failures[0])


def cmd_verify_estimates(cfg: RunConfig, out: Path, count: int) -> None:
    grid = RadialGrid.uniform(max(cfg.J, 64), cfg.R, cfg.N)
    profiles = sharp.random_profiles(count, grid, seed=cfg.seed)
    summary = sharp.corpus_summary(profiles)
    keys = ("linf_failures", "lp_over_r_failures", "lp_radial_failures", "min_ratio", "max_ratio")
    rows = [(k, summary[k]) for k in keys]
    write_csv(out / "estimates.csv", ("quantity", "value"), rows)
    print(f"verify-estimates: N={cfg.N}, {count} profiles")
    for k, v in rows:
        print(f"  {k} = {v}")
    for key, name in (
        ("linf_failures", "gradient_bound"),
        ("lp_over_r_failures", "pointwise_lp_bound_over_r"),
        ("lp_radial_failures", "pointwise_lp_bound_radial"),
    ):
        if summary[key]:
            raise CheckFailed(f"{name}: {summary[key]} of {count} profiles violate it")


def cmd_ckn_check(cfg: RunConfig, out: Path, params: ckn.CknParams, ratio: bool) -> None:
    verdict = ckn.feasibility(params)
    print(f"ckn-check: {params}")
    print(f"  {verdict}")
    if ratio and verdict.feasible and params.n == 1:
        x = ckn.half_line_grid(2.0, 4000)
        sup = ckn.sup_ratio_over_corpus(params, x, ckn.random_corpus(100, seed=cfg.seed))
        print(f"  empirical sup ratio = {sup:.10g}")
    if not verdict.feasible:
        raise CheckFailed(f"ckn_feasibility: {', '.join(verdict.violated_conditions)}")


def cmd_uniqueness(cfg: RunConfig, out: Path) -> None:
    rho0, u0 = initial_profiles(cfg.profile, cfg.R, cfg.amplitude, cfg.rho_ref)
    s1, s2 = twin_states(rho0, u0, cfg.R, cfg.N, cfg.gas, cfg.J, cfg.delta)
    twin = twin_run(s1, s2, cfg.gas, cfg.t_end, cfl=cfg.cfl, splitting=cfg.splitting)
    write_csv(out / "diff.csv", DiffRecord.COLUMNS, (r.row() for r in twin.records))
    gr = gronwall_check(twin.records, cfg.eps, kappa=cfg.gas.kappa, v_max=twin.v_max)
    write_csv(
        out / "gronwall.csv",
        ("C", "bound", "y_final", "C_lambda", "passed"),
        [(gr.C, gr.bound, gr.y_final, gr.C_lambda, int(gr.passed))],
    )
    print(f"uniqueness-run: delta={cfg.delta:g}, {len(twin.records) - 1} steps")
    print(f"  sup_t(|Lam|+|Theta|) = {twin.sup_diff:.6e}")
    print(f"  Gronwall C = {gr.C:.6g}, y_K = {gr.y_final:.6e} <= {gr.bound:.6e}")
    if not gr.passed:
        raise CheckFailed(f"gronwall: {gr.reason}")
    for k, (a, b) in enumerate(zip(twin.traj1.states, twin.traj2.states)):
        lip = pressure_lipschitz_check(a, b, cfg.gas, v_min=twin.v_min)
        if not lip.passed:
            raise CheckFailed(f"pressure_lipschitz: step {k}, cell {lip.witness_cell}")


def cmd_convergence(cfg: RunConfig, out: Path, refine: int) -> None:
    rho0, u0 = initial_profiles(cfg.profile, cfg.R, cfg.amplitude, cfg.rho_ref)
    study = self_convergence(
        rho0, u0, cfg.R, cfg.N, cfg.gas, cfg.J, cfg.t_end,
        cfl=cfg.cfl, splitting=cfg.splitting, levels=3 + refine,
    )
    rows = study.table()
    write_csv(out / "convergence.csv", ("J", "n_steps", "err_v", "err_u"), rows)
    print("convergence: J, n_steps, |v_J - v_2J|, |u_J - u_2J|")
    for row in rows:
        print("  " + ", ".join(_fmt(x) for x in row))
    ev, eu = study.err_v, study.err_u
    order_v = float(np.log2(ev[-2] / ev[-1]))
    order_u = float(np.log2(eu[-2] / eu[-1]))
    print(f"  order v = {order_v:.3f}, order u = {order_u:.3f}")
    if min(order_v, order_u) < MIN_ORDER:
        raise CheckFailed(f"convergence_order: v {order_v:.3f}, u {order_u:.3f} < {MIN_ORDER}")


# -- argument parsing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphereflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value run configuration")
        p.add_argument("--out", default=".", help="directory for CSV output")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--refine", type=int, default=0,
                       help="extra refinement levels (convergence) or J doubling (other runs)")
        return p

    add("simulate", "run the solver and write diagnostics")
    p = add("verify-estimates", "sharp gradient bounds over a random profile corpus")
    p.add_argument("--count", type=int, default=1000)
    p = add("ckn-check", "CKN exponent feasibility and empirical ratio")
    for name in ("n", "p", "q", "r", "a", "alpha", "beta", "sigma", "gamma"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--ratio", action="store_true", help="also estimate the constant (n = 1)")
    add("uniqueness-run", "twin run with a perturbed density and Gronwall report")
    add("convergence", "self-convergence study")
    return parser


def _ckn_params(args) -> ckn.CknParams:
    base = ckn.CknParams.density_instance().__dict__
    given = {k: getattr(args, k) for k in base if getattr(args, k) is not None}
    if "n" in given:
        given["n"] = int(given["n"])
    return ckn.CknParams(**{**base, **given})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.refine < 0:
        parser.error("--refine must be >= 0")
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be >= 0")
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"sphereflow: config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log.debug("configuration:\n%s", format_config(cfg))

    try:
        if args.command == "simulate":
            cmd_simulate(cfg, out)
        elif args.command == "verify-estimates":
            cmd_verify_estimates(cfg, out, args.count)
        elif args.command == "ckn-check":
            cmd_ckn_check(cfg, out, _ckn_params(args), args.ratio)
        elif args.command == "uniqueness-run":
            cmd_uniqueness(cfg, out)
        else:
            cmd_convergence(cfg, out, args.refine)
    except CheckFailed as exc:
        print(f"sphereflow: FAILED {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"sphereflow: FAILED solver: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"sphereflow: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
