"""Command-line front end: ``halfspace-ln <command> [options]``.

Every command writes CSV and/or JSON files into ``--out`` and exits with 0
only if the certifications attached to that command pass.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import barriers, family, ivp, profile
from .cones import ConePair, invariants
from .exceptions import HalfspaceError, ParameterError
from .io import manifest, write_csv, write_json

DEFAULT_TOLERANCES = {"root": 1e-12, "quad": 1e-10, "ode": 1e-10}
COMMANDS = ("invariants", "profile", "solve", "family", "theoremD", "barriers", "counterexample")


@dataclass
class RunConfig:
    cone: dict
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    table: dict = field(default_factory=lambda: {"s_max": None, "grid_size": 512})
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if any(not v > 0 for v in self.tolerances.values()):
            raise ParameterError("tolerances must be positive")

    @property
    def cone_pair(self) -> ConePair:
        return ConePair.from_json(self.cone)

    def manifest(self, **extra) -> dict:
        return manifest(self.cone_pair, self.tolerances, config=asdict(self), **extra)


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cone", help="cone JSON, inline or a file path")
    common.add_argument("--config", help="run configuration JSON file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--a", type=_float_list, help="comma list of family offsets a")
    common.add_argument("--eps", type=float, default=0.1)
    common.add_argument("--delta", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--tau", type=float, default=0.0)
    common.add_argument("--t-end", type=float, default=None)
    common.add_argument("--s-max", type=float)
    common.add_argument("--grid", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--R", type=float, default=201.0, help="annulus: governing radius")
    common.add_argument("--r1", type=float, default=10.0, help="annulus: half-ball size")
    common.add_argument("--C", type=float, default=37.5, help="annulus: quadratic coefficient")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfspace-ln", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    helps = {
        "invariants": "scalar invariants of the cone",
        "profile": "tabulate phi, A, B, G",
        "solve": "integrate one initial value problem and cross-check it",
        "family": "sample the boundary-vanishing family and check its properties",
        "theoremD": "blowup table of the family as a grows",
        "barriers": "certify the annular supersolution",
        "counterexample": "exterior-ball barrier lying below a family member",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _load_config(args, parser) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read --config: {exc}")
    if args.cone:
        text = args.cone
        if not text.lstrip().startswith("{") and Path(text).is_file():
            text = Path(text).read_text()
        try:
            data["cone"] = json.loads(text)
        except json.JSONDecodeError as exc:
            parser.error(f"malformed --cone JSON: {exc}")
    if "cone" not in data:
        parser.error("a cone is required (--cone or --config)")
    table = {"s_max": None, "grid_size": 512, **data.get("table", {})}
    if args.s_max is not None:
        table["s_max"] = args.s_max
    if args.grid is not None:
        table["grid_size"] = args.grid
    try:
        cfg = RunConfig(
            cone=data["cone"],
            tolerances={**DEFAULT_TOLERANCES, **data.get("tolerances", {})},
            table=table,
            output_dir=args.out or data.get("output_dir", "out"),
            seed=args.seed if args.seed is not None else int(data.get("seed", 0)),
        )
        cfg.cone_pair
    except (HalfspaceError, TypeError, ValueError) as exc:
        parser.error(f"invalid cone or configuration: {exc}")
    return cfg


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HALFSPACE_LN_THREADS", "1")))
    except ValueError:
        return 1


def _table(cfg: RunConfig, need_s: float = 0.0):
    cone = cfg.cone_pair
    s_max = cfg.table.get("s_max")
    if s_max is None and need_s > profile.DEFAULT_S_MAX:
        s_max = 10.0 * need_s
    return profile.build_table(cone, s_max=s_max, grid_size=int(cfg.table.get("grid_size", 512)))


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.output_dir) / name


def cmd_invariants(cfg: RunConfig, args) -> bool:
    inv = invariants(cfg.cone_pair)
    write_json(_out(cfg, "invariants.json"), {**cfg.manifest(), "invariants": inv.to_dict()})
    return inv.concave_ray_ok


def cmd_profile(cfg: RunConfig, args) -> bool:
    table = _table(cfg)
    margins = profile.inequality_margins(table)
    ok = margins["A_lower"] >= -1e-12 and margins["ratio_lower"] >= -1e-12
    write_csv(_out(cfg, "profile.csv"),
              {"s": table.s_grid, "phi": table.phi_vals, "A": table.A_vals, "B": table.B_vals, "G": table.G_vals})
    write_json(_out(cfg, "profile.json"), {**cfg.manifest(), **table.metadata(), "margins": margins, "passed": ok})
    return ok


def cmd_solve(cfg: RunConfig, args) -> bool:
    if args.delta is None or args.p is None:
        raise ParameterError("solve needs --delta and --p")
    t_end = args.t_end if args.t_end is not None else args.tau + 10.0
    spec = ivp.IvpSpec(args.delta, args.p, args.tau, t_end)
    table = _table(cfg, need_s=0.5 * args.p**2)
    traj = ivp.solve_ivp(table, spec, rtol=cfg.tolerances["ode"])
    residual = ivp.hamiltonian_residual(table, traj)
    T = ivp.max_time(table, spec.delta, spec.p)
    inside = traj.t[traj.t - spec.tau < T] if math.isfinite(T) else traj.t
    quad = ivp.quadrature_solve(table, spec, inside)
    agreement = float(np.max(np.abs(quad.w / traj.w[: inside.size] - 1.0)))
    checks = {"hamiltonian_residual": residual, "quadrature_agreement": agreement, "max_time": T}
    ok = residual <= 1e-7 and agreement <= 1e-6
    if traj.status == "blowup" and math.isfinite(T):
        rel = abs(traj.T_estimate - (spec.tau + T)) / (spec.tau + T)
        checks["blowup_time_rel_error"] = rel
        ok = ok and rel <= 1e-4
    ok = ok and traj.status != "step_underflow"
    ivp.dump_trajectory(table, traj, _out(cfg, "trajectory"), {**cfg.manifest(), "checks": checks, "passed": ok})
    return ok


def _family_grid(t_end: float) -> np.ndarray:
    return np.unique(np.concatenate([np.geomspace(1e-6, 0.05, 20), np.linspace(0.05, t_end, 200)]))


def cmd_family(cfg: RunConfig, args) -> bool:
    table = _table(cfg)
    a_list = args.a if args.a is not None else [0.0, 0.5, 1.0, 2.0]
    t_end = args.t_end if args.t_end is not None else 10.0
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        sols = list(pool.map(lambda a: family.build_family(table, a), a_list))
    grid = _family_grid(t_end)
    cols = {"a": [], "t": [], "w": [], "w_prime": []}
    for sol in sols:
        t = grid[grid < sol.horizon]
        cols["a"].append(np.full(t.size, sol.a_param))
        cols["t"].append(t)
        cols["w"].append(np.asarray(sol.w(t)) * np.ones_like(t))
        cols["w_prime"].append(np.asarray(sol.w_prime(t)) * np.ones_like(t))
    write_csv(_out(cfg, "family.csv"), {k: np.concatenate(v) for k, v in cols.items()})
    payload = {**cfg.manifest(), "members": [s.metadata() for s in sols]}
    ok = True
    if table.mu <= 1.0:
        report = family.verify_theorem_B(sols, grid)
        payload["family_properties"] = report.to_dict()
        ok = report.passed
    else:
        payload["global_members"] = [s.a_param for s in sols if s.is_global]
        ok = all(s.is_global == (s.a_param == 0) for s in sols)
    payload["passed"] = ok
    write_json(_out(cfg, "family.json"), payload)
    return ok


def cmd_theoremD(cfg: RunConfig, args) -> bool:
    table = _table(cfg)
    a_list = args.a if args.a is not None else [1.0, 10.0, 100.0]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        result = family.theorem_D_table(table, args.eps, a_list, executor=pool)
    write_csv(_out(cfg, "theoremD.csv"), result.columns())
    ok = all(result.increasing.values()) and bool(np.all(result.bound_ok))
    write_json(_out(cfg, "theoremD.json"), {
        **cfg.manifest(), "eps": result.eps, "envelope_C": result.envelope_C,
        "increasing": result.increasing, "growth": result.growth,
        "bound_ok": result.bound_ok, "passed": ok,
    })
    return ok


def cmd_barriers(cfg: RunConfig, args) -> bool:
    cone = cfg.cone_pair
    spec = barriers.BarrierSpec.annulus(args.R, args.r1, args.C)
    cert = barriers.certify_annulus_supersolution(cone, spec)
    d = np.linspace(0.0, args.R, 101)[:-1] + 0.5 * args.R / 100
    lam1, lam2 = barriers.radial_eigenvalues(barriers.BallProfile(args.R), d)
    ball_err = float(max(np.max(np.abs(lam1 - 0.5)), np.max(np.abs(lam2 - 0.5))))
    if cert.grid is not None:
        write_csv(_out(cfg, "barriers_margins.csv"), cert.grid)
    ok = cert.passed and ball_err <= 1e-14
    write_json(_out(cfg, "barriers.json"), {
        **cfg.manifest(), "spec": spec.to_dict(), "certificate": cert.to_dict(),
        "ball_lambda_error": ball_err, "passed": ok,
    })
    return ok


def cmd_counterexample(cfg: RunConfig, args) -> bool:
    table = _table(cfg)
    a = args.a[0] if args.a else 1.0
    wit = barriers.counterexample_witness(table, a)
    payload = {**cfg.manifest(), "a_param": a, "witness": None if wit is None else wit.to_dict(),
               "schedule": "b doubling from 2, R = b - 1/b", "passed": wit is not None}
    write_json(_out(cfg, "counterexample.json"), payload)
    return wit is not None


HANDLERS = {
    "invariants": cmd_invariants,
    "profile": cmd_profile,
    "solve": cmd_solve,
    "family": cmd_family,
    "theoremD": cmd_theoremD,
    "barriers": cmd_barriers,
    "counterexample": cmd_counterexample,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _load_config(args, parser)
    np.random.seed(cfg.seed)
    try:
        ok = HANDLERS[args.command](cfg, args)
    except HalfspaceError as exc:
        print(f"halfspace-ln {args.command}: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command}: {'pass' if ok else 'FAIL'} -> {cfg.output_dir}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
