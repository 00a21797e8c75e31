"""Command-line front end: hypothesis checks, single minimizations, sweeps.

One JSON config document drives every subcommand ("schema": 1).  All
randomness flows from the single config seed; summaries exclude wall-clock
data so a repeated run with the same seed writes identical bytes.

Exit codes: 0 success, 1 config error, 2 run failure, 3 undetermined.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import continuation, loopspace, minimizer, orbit as orbit_mod, potentials
from .errors import ParameterError, SweepFailedError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2
EXIT_UNDETERMINED = 3

ENERGY_MESSAGE = "energy below V(0)"


class ConfigError(ValueError):
    pass


# --- custom potential registry ------------------------------------------

def _zero_potential(dim, params):
    return potentials.make_custom(
        dim,
        lambda x: np.zeros(x.shape[:-1]),
        lambda x: np.zeros_like(x),
        params={"name": "zero"})


def _constant_potential(dim, params):
    c = float(params.get("c", 0.0))
    return potentials.make_custom(
        dim,
        lambda x: np.full(x.shape[:-1], c),
        lambda x: np.zeros_like(x),
        params={"name": "constant", "c": c})


CUSTOM_POTENTIALS = {
    "zero": _zero_potential,
    "constant": _constant_potential,
}


def register_potential(name, factory):
    """Register a named custom potential: factory(dim, params) -> Potential."""
    CUSTOM_POTENTIALS[name] = factory


# --- config parsing -------------------------------------------------------

def _need(cfg, key, where="config"):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return cfg[key]


def _decimal(spec, key, where):
    try:
        return float(spec[key])
    except KeyError:
        raise ConfigError(f"{where}: missing required field {key!r}")
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: not a decimal value: {spec[key]!r}")


def build_potential(spec) -> potentials.Potential:
    family = _need(spec, "family", "potential")
    dim = int(spec.get("dim", 2))
    if family == potentials.THREE_BODY_CHARGED:
        params = potentials.ThreeBodyChargedParams(
            alpha=_decimal(spec, "alpha", "potential"),
            beta=_decimal(spec, "beta", "potential"),
            rho=_decimal(spec, "rho", "potential"))
        return potentials.make_three_body(params, dim=dim)
    if family == potentials.CUSTOM:
        name = _need(spec, "name", "potential")
        if name not in CUSTOM_POTENTIALS:
            raise ConfigError(f"potential.name: unknown custom potential {name!r}")
        return CUSTOM_POTENTIALS[name](dim, spec.get("params", {}))
    raise ConfigError(f"potential.family: unknown family {family!r}")


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if cfg.get("schema") != 1:
        raise ConfigError(f"schema: expected 1, got {cfg.get('schema')!r}")
    return cfg


def parse_common(cfg):
    p = build_potential(_need(cfg, "potential"))
    H = float(_need(cfg, "H"))
    profile = _need(cfg, "profile")
    if profile not in (potentials.PROFILE_THM16, potentials.PROFILE_THM17):
        raise ConfigError(f"profile: expected thm16 or thm17, got {profile!r}")
    disc = cfg.get("discretization", {})
    K = int(disc.get("K", 32))
    n = int(disc.get("n", 256))
    m = int(disc.get("m", 1024))
    seed = int(cfg.get("seed", 0))
    mopts = cfg.get("minimize", {})
    opts = minimizer.MinimizeOptions(
        max_iter=int(mopts.get("max_iter", 5000)),
        grad_tol=float(mopts.get("grad_tol", 1.0e-8)),
        shrink=float(mopts.get("shrink", 0.5)),
        sufficient_decrease=float(mopts.get("sufficient_decrease", 1.0e-4)),
        min_step=float(mopts.get("min_step", 1.0e-14)),
        restart_directions=int(mopts.get("restart_directions", 4)),
        seed=seed)
    return p, H, profile, (K, n, m), opts, seed


def check_energy(p, H, profile):
    if profile == potentials.PROFILE_THM16:
        v0 = float(p.value(np.zeros(p.dim)))
        return H > v0
    return H > 0.0


def _dump_json(obj, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _dump_csv(header, rows, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.16e}" for v in row) + "\n")


def _out_dir(cfg, args):
    out = args.out or cfg.get("out", "hyporb_out")
    return Path(out)


# --- subcommands ----------------------------------------------------------

def cmd_check(cfg, args):
    p, H, profile, _, _, _ = parse_common(cfg)
    report = potentials.check_hypotheses(p, H, profile)
    doc = report.to_dict()
    if not report.energy_ok:
        doc["energy_message"] = (ENERGY_MESSAGE
                                 if profile == potentials.PROFILE_THM16
                                 else "energy not positive")
    out = _out_dir(cfg, args)
    _dump_json(doc, out / "hypothesis_report.json")
    if not args.quiet:
        print(json.dumps(doc, sort_keys=True, indent=2))
    if not report.energy_ok and not args.quiet:
        print(doc["energy_message"], file=sys.stderr)
    return EXIT_OK if report.all_pass else EXIT_FAILURE


def _orbit_summary(rep, p, H, T, orb, diag):
    return {
        "schema": 1,
        "H": H,
        "R": orb.R,
        "converged": rep.converged,
        "f": rep.f_final.f,
        "A": rep.f_final.A,
        "B": rep.f_final.B,
        "grad_norm": rep.grad_norm,
        "iterations": rep.iterations,
        "T": T,
        "diagnostics": diag.to_dict(),
    }


def cmd_minimize(cfg, args):
    p, H, profile, (K, n, m), opts, seed = parse_common(cfg)
    if not check_energy(p, H, profile):
        raise ConfigError(ENERGY_MESSAGE if profile == potentials.PROFILE_THM16
                          else "energy must be positive for thm17")
    R = float(_need(cfg, "R"))
    if R <= 0:
        raise ConfigError(f"R: must be positive, got {R}")

    direction = np.zeros(p.dim)
    direction[0] = 1.0
    q0 = loopspace.new_loop(p.dim, R, K, n, direction)
    rep = minimizer.minimize(q0, p, H, R, opts)

    out = _out_dir(cfg, args)
    _dump_json(loopspace.to_record(rep.loop), out / "loop.json")
    T = orbit_mod.compute_period(rep.loop, p, H)
    orb = orbit_mod.rescale(rep.loop, T, m)
    diag = orbit_mod.diagnose(orb, p, H)
    _dump_csv(["t"] + [f"u_{i+1}" for i in range(p.dim)] + ["speed", "energy_residual"],
              orbit_mod.orbit_rows(orb, p, H), out / "orbit.csv")
    summary = _orbit_summary(rep, p, H, T, orb, diag)
    summary["hypotheses"] = potentials.check_hypotheses(p, H, profile).to_dict()
    _dump_json(summary, out / "summary.json")
    _dump_csv(["iter", "f", "A", "B", "grad_norm", "step"], rep.trace,
              out / "trace.csv")
    if not args.quiet:
        print(json.dumps(summary, sort_keys=True, indent=2))
    return EXIT_OK if rep.converged else EXIT_FAILURE


def cmd_sweep(cfg, args):
    p, H, profile, (K, n, m), opts, seed = parse_common(cfg)
    if not check_energy(p, H, profile):
        raise ConfigError(ENERGY_MESSAGE if profile == potentials.PROFILE_THM16
                          else "energy must be positive for thm17")
    sweep_cfg = _need(cfg, "sweep")
    if "radii" in sweep_cfg:
        radii = [float(r) for r in sweep_cfg["radii"]]
    else:
        radii = list(continuation.geometric_radii(
            r0=float(sweep_cfg.get("R0", 2.0)),
            factor=float(sweep_cfg.get("factor", 2.0)),
            count=int(sweep_cfg.get("count", 7))))
    L_marker = sweep_cfg.get("L_marker")
    try:
        plan = continuation.SweepPlan(
            radii=tuple(radii), profile=profile,
            L_marker=None if L_marker is None else float(L_marker),
            options=opts, K=K, n=n, m=m,
            **({"mode": sweep_cfg["mode"]} if "mode" in sweep_cfg else {}))
        candidate = continuation.run_sweep(plan, p, H)
    except SweepFailedError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    out = _out_dir(cfg, args)
    summary = continuation.candidate_summary(candidate, plan, H)
    _dump_json(summary, out / "sweep_summary.json")
    for rec in candidate.records:
        if rec.raw_orbit is not None:
            _dump_csv(
                ["t"] + [f"u_{i+1}" for i in range(p.dim)] + ["speed", "energy_residual"],
                orbit_mod.orbit_rows(rec.raw_orbit, p, H),
                out / f"orbit_R{rec.R:g}.csv")
    plot_rows = [(r.R, r.T, r.diagnostics.terminal_speed,
                  r.diagnostics.min_radius_value)
                 for r in candidate.records if r.converged]
    _dump_csv(["R", "T_R", "terminal_speed", "M_obs"], plot_rows,
              out / "plot_data.csv")
    if not args.quiet:
        print(json.dumps(summary, sort_keys=True, indent=2))
    if candidate.verdict == continuation.VERDICT_HYPERBOLIC:
        return EXIT_OK
    return EXIT_UNDETERMINED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hyporb",
        description="Hyperbolic-orbit candidates by fixed-energy action minimization")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("check", cmd_check), ("minimize", cmd_minimize),
                     ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--quiet", action="store_true")
        sp.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        return args.fn(cfg, args)
    except (ConfigError, ParameterError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
