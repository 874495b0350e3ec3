"""Command-line entry point: ``bousspec {simulate,region,verify,besov,twin}``.

Exit codes: 0 success, 1 invariant or check failure, 2 configuration error,
3 blow-up guard tripped.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boussinesq import (
    BlowUpError,
    BoussinesqParams,
    DiagnosticsConfig,
    gamma,
    run,
    twin_run,
)
from .commutators import verify_est1
from .initial_data import PRESETS, make_initial
from .io import read_snapshot, write_csv, write_snapshot
from .littlewood_paley import BesovSpec, besov_norm
from .region import RegionError, RegionQuery, beta_bounds, pi_contains, pi_r_contains
from .spectral import forward_transform, get_grid, inverse_transform, velocity_from_vorticity
from .transport_diffusion import CFLError, TDProblem, TDTrajectory, smoothing_effect_ratio

log = logging.getLogger("bousspec")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
DEFAULT_OUT = "bousspec_out"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports errors as :class:`ConfigError`."""

    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


@dataclass
class RunConfig:
    alpha: float
    beta: float
    n: int = 128
    dt: float = 1e-3
    T: float = 1.0
    seed: int = 0
    init: str = "taylor-green-plus-mode"
    init_amplitude: float = 1.0
    init_mode: int = 1
    sample_every: int = 10
    energy: bool = True
    gamma: bool = True
    besov: bool = True
    smoothing: bool = False
    commutator: bool = False
    theta_p: tuple = (2.0, 4.0, math.inf)
    omega_p: tuple = (2.0, 4.0)
    output_dir: str = DEFAULT_OUT
    snapshot_every: int = 10
    snapshot_fields: tuple = ("omega", "theta", "gamma")

    def validate(self) -> None:
        for name in ("alpha", "beta", "dt", "T", "init_amplitude"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ConfigError(f"n must be a power of two >= 8, got {self.n}")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be a positive integer")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be >= 0")
        if self.init not in PRESETS:
            raise ConfigError(f"unknown init preset {self.init!r}; choose from {', '.join(PRESETS)}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        m = round(self.T / self.dt)
        if abs(m * self.dt - self.T) > 1e-9 * self.T:
            raise ConfigError(f"T={self.T} must be a multiple of dt={self.dt}")
        for f in self.snapshot_fields:
            if f not in ("omega", "theta", "gamma", "u1", "u2"):
                raise ConfigError(f"unknown snapshot field {f!r}")
        if not (0 < self.alpha <= 1 and 0 < self.beta <= 1):
            raise ConfigError("alpha and beta must lie in ]0, 1]")

    def diagnostics(self) -> DiagnosticsConfig:
        return DiagnosticsConfig(
            energy=self.energy, gamma=self.gamma, besov=self.besov,
            theta_p=self.theta_p, omega_p=self.omega_p,
        )


# (section, key, type) for every config-file entry
_FILE_KEYS = {
    "alpha": ("run", float), "beta": ("run", float), "n": ("run", int), "dt": ("run", float),
    "T": ("run", float), "seed": ("run", int), "init": ("run", str),
    "init_amplitude": ("run", float), "init_mode": ("run", int), "sample_every": ("run", int),
    "energy": ("diagnostics", _bool), "gamma": ("diagnostics", _bool), "besov": ("diagnostics", _bool),
    "smoothing": ("diagnostics", _bool), "commutator": ("diagnostics", _bool),
    "theta_p": ("diagnostics", _float_list), "omega_p": ("diagnostics", _float_list),
    "output_dir": ("output", str), "snapshot_every": ("output", int),
    "snapshot_fields": ("output", lambda s: tuple(x for x in str(s).replace(" ", "").split(",") if x)),
}
_REQUIRED = ("alpha", "beta")


def _read_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep "T" distinct from "t"
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        if section not in ("run", "diagnostics", "output"):
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            name = "output_dir" if (section, key) == ("output", "dir") else key
            if name not in _FILE_KEYS or _FILE_KEYS[name][0] != section:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                out[name] = _FILE_KEYS[name][1](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return out


def _add_run_flags(p: argparse.ArgumentParser, *, with_output: bool = True) -> None:
    p.add_argument("--config", help="INI file with [run], [diagnostics], [output] sections")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=PRESETS)
    p.add_argument("--init-amplitude", type=float, dest="init_amplitude")
    p.add_argument("--init-mode", type=int, dest="init_mode")
    p.add_argument("--sample-every", type=int, dest="sample_every")
    if with_output:
        p.add_argument("--out", dest="output_dir", help="output directory (default $BOUSSPEC_OUT or ./bousspec_out)")


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    env_out = os.environ.get("BOUSSPEC_OUT")
    if env_out:
        values["output_dir"] = env_out
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for key in _FILE_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key '{key}' (flag --{key} or [run] {key})")
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _warn_region(alpha: float, beta: float) -> None:
    v = pi_contains(RegionQuery(alpha, beta))
    if not v.inside:
        print(f"warning: (alpha, beta) = ({alpha}, {beta}) is outside Pi; proceeding", file=sys.stderr)


def _p_label(p: float) -> str:
    return "inf" if p == math.inf else f"{p:g}"


def series_columns(cfg: RunConfig) -> list[str]:
    """CSV header; depends on the diagnostic toggles only."""
    cols = ["t"]
    if cfg.energy:
        cols += ["theta_L2", "theta_Linf", "u_L2"]
    if cfg.gamma:
        cols += ["gamma_L2", "gamma_Hhalfalpha_int"]
        cols += [f"omega_L{_p_label(p)}" for p in cfg.omega_p]
    if cfg.besov:
        cols += ["theta_B1malpha_inf1", "u_B1_inf1_int"]
    return cols


def _series_rows(cfg: RunConfig, energy, gs) -> list[list[float]]:
    rows = []
    for i, t in enumerate(energy.t):
        row = [t]
        if cfg.energy:
            linf = energy.theta_Lp[math.inf][i] if math.inf in energy.theta_Lp else float("nan")
            row += [energy.theta_L2[i], linf, energy.u_L2[i]]
        if cfg.gamma:
            row += [gs.gamma_L2[i], gs.gamma_Hhalfalpha_int[i]]
            row += [gs.omega_Lp[p][i] for p in cfg.omega_p]
        if cfg.besov:
            row += [gs.theta_B1malpha_inf1[i], gs.u_B1_inf1_int[i]]
        rows.append(row)
    return rows


def _invariants(cfg: RunConfig, traj, energy, gs) -> list[dict]:
    checks = []

    def add(name, value, limit, ok):
        checks.append({"name": name, "value": float(value), "limit": float(limit), "pass": bool(ok)})

    d = float(np.max(energy.identity_defect()))
    add("theta_energy_identity", d, 1e-5, d < 1e-5)
    v = float(np.max(energy.velocity_defect()))
    add("u_energy_bound", v, 1e-5, v <= 1e-5)
    for p, vals in energy.theta_Lp.items():
        worst = max(vals) - vals[0] * (1 + 1e-6)
        add(f"max_principle_L{_p_label(p)}", worst, 0.0, worst <= 0)
    add("divergence_free", traj.max_divergence, 0.0, traj.max_divergence == 0.0)
    om_mean = max(abs(float(np.mean(w))) for w in traj.omega) if len(traj.omega) else 0.0
    add("omega_mean_free", om_mean, 1e-12, om_mean <= 1e-12)
    if len(traj.theta):
        means = [float(np.mean(t)) for t in traj.theta]
        drift = max(abs(m - means[0]) for m in means)
        scale = max(1.0, float(np.max(np.abs(traj.theta[0]))))
        add("theta_mean_conserved", drift, 1e-12 * scale, drift <= 1e-12 * scale)
    series = [gs.gamma_L2, gs.theta_B1malpha_inf1, gs.u_B1_inf1_int]
    finite = all(np.all(np.isfinite(s)) for s in series if len(s))
    add("gamma_series_finite", 0.0 if finite else 1.0, 0.0, finite)
    return checks


def _smoothing_report(cfg: RunConfig, traj) -> dict:
    times = traj.times
    oms = traj.omega

    def velocity(t):
        i = int(np.argmin(np.abs(times - t)))
        return velocity_from_vorticity(oms[i])

    prob = TDProblem(cfg.beta, traj.theta[0], velocity=velocity)
    td = TDTrajectory(np.asarray(times), np.asarray(traj.theta), traj.dt, prob)
    out = {}
    for rho in (1.0, 2.0, math.inf):
        for p in (2.0, 4.0):
            lhs, rhs, ratio = smoothing_effect_ratio(td, rho, p)
            out[f"rho={_p_label(rho)},p={p:g}"] = {"lhs": lhs, "rhs": rhs, "ratio": ratio}
    return out


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    _warn_region(cfg.alpha, cfg.beta)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = BoussinesqParams(cfg.alpha, cfg.beta)
    init = make_initial(cfg.init, cfg.n, seed=cfg.seed, amplitude=cfg.init_amplitude, mode=cfg.init_mode)
    counter = {"i": 0}

    def on_sample(state):
        i = counter["i"]
        counter["i"] += 1
        if cfg.snapshot_every and i % cfg.snapshot_every == 0:
            fields = {}
            for name in cfg.snapshot_fields:
                if name == "omega":
                    fields[name] = state.omega()
                elif name == "theta":
                    fields[name] = state.theta()
                elif name == "gamma":
                    fields[name] = gamma(state, params)
                else:
                    u = state.velocity()
                    fields[name] = u[0] if name == "u1" else u[1]
            write_snapshot(out / f"snapshot_{i:06d}.bqsf", fields)

    try:
        traj, energy, gs = run(
            params, init, cfg.T, cfg.dt, cfg.sample_every, cfg.diagnostics(),
            keep_fields=True, on_sample=on_sample,
        )
    except BlowUpError as exc:
        report = {"status": "blow-up", "message": str(exc), "t": exc.t, "quantity": exc.quantity, "value": exc.value}
        (out / "report.json").write_text(json.dumps(report, indent=2, default=str) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    write_csv(out / "series.csv", series_columns(cfg), _series_rows(cfg, energy, gs))
    checks = _invariants(cfg, traj, energy, gs)
    report = {
        "status": "ok",
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(cfg).items()},
        "final": {
            "t": energy.t[-1],
            "theta_L2": energy.theta_L2[-1],
            "theta_Hhalfbeta_int": energy.theta_Hhalfbeta_int[-1],
            "u_L2": energy.u_L2[-1],
            "u_Hhalfalpha_int": energy.u_Hhalfalpha_int[-1],
            "gamma_L2": gs.gamma_L2[-1] if gs.gamma_L2 else None,
        },
        "max_divergence": traj.max_divergence,
        "steps": traj.steps,
        "invariants": checks,
        "failures": [c["name"] for c in checks if not c["pass"]],
    }
    if cfg.smoothing:
        report["smoothing"] = _smoothing_report(cfg, traj)
    if cfg.commutator:
        alpha = cfg.alpha if cfg.alpha < 1 else 0.99
        rep = verify_est1(traj.omega[-1], traj.theta[-1], alpha, alpha / 2)
        report["commutator_est1_final"] = rep.to_dict()
    (out / "report.json").write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
    if report["failures"]:
        print("invariant failures: " + ", ".join(report["failures"]), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    if isinstance(o, np.generic):
        return o.item()
    return str(o)


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        na, nb = int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"--grid expects NxM, got {text!r}") from exc
    if na < 2 or nb < 2:
        raise ConfigError("--grid sizes must be >= 2")
    return na, nb


def cmd_region(args) -> int:
    if args.grid is None and (args.alpha is None or args.beta is None):
        missing = "alpha" if args.alpha is None else "beta"
        raise ConfigError(f"missing required key '{missing}' (or give --grid)")
    if args.alpha is not None and args.beta is not None:
        q = RegionQuery(args.alpha, args.beta, r=args.r)
        try:
            v = pi_r_contains(q) if args.r is not None else pi_contains(q)
        except RegionError as exc:
            raise ConfigError(str(exc)) from exc
        if args.format == "json":
            print(json.dumps(v.to_dict(), default=_json_default))
        else:
            print(f"inside={str(v.inside).lower()} binding={v.binding}")
    if args.grid is not None:
        na, nb = _parse_grid(args.grid)
        a_lo, a_hi = _float_list(args.alpha_range)
        b_lo, b_hi = _float_list(args.beta_range)
        rows = []
        for a in np.linspace(a_lo, a_hi, na):
            for b in np.linspace(b_lo, b_hi, nb):
                v = pi_contains(RegionQuery(float(a), float(b)))
                rows.append((repr(float(a)), repr(float(b)), str(v.inside).lower(), v.binding))
        out = Path(args.output_dir or os.environ.get("BOUSSPEC_OUT") or DEFAULT_OUT)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "pi_grid.csv", "w", newline="") as fh:
            fh.write("alpha,beta,inside,binding\n")
            for r in rows:
                fh.write(",".join(r) + "\n")
        print(f"wrote {out / 'pi_grid.csv'} ({len(rows)} rows)", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .suites import run_suite

    opts = {"alpha": args.alpha, "beta": args.beta, "n": args.n}
    if args.alpha is not None and not 0 < args.alpha < 1:
        raise ConfigError("alpha must lie in ]0, 1[ for verify")
    if args.beta is not None and not 0 <= args.beta <= 1:
        raise ConfigError("beta must lie in [0, 1] for verify")
    if args.n is not None and (args.n < 8 or args.n & (args.n - 1)):
        raise ConfigError(f"n must be a power of two >= 8, got {args.n}")
    checks = run_suite(args.suite, **opts)
    out = Path(args.output_dir or os.environ.get("BOUSSPEC_OUT") or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"verify_{args.suite}.json"
    path.write_text(json.dumps({"suite": args.suite, "checks": checks}, indent=2, default=_json_default) + "\n")
    failed = [c["name"] for c in checks if not c["pass"]]
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']} lhs={c['lhs']:.6g} rhs={c['rhs']:.6g}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_besov(args) -> int:
    try:
        fields = read_snapshot(args.snapshot)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read snapshot {args.snapshot}: {exc}") from exc
    if args.field not in fields:
        raise ConfigError(f"field {args.field!r} not in snapshot (has {', '.join(fields)})")
    try:
        spec = BesovSpec(args.s, args.p, args.r, homogeneous=args.homogeneous)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    val = besov_norm(fields[args.field], spec)
    print(json.dumps({"field": args.field, "s": args.s, "p": args.p, "r": args.r,
                      "homogeneous": args.homogeneous, "norm": val}, default=_json_default))
    return EXIT_OK


def cmd_twin(args) -> int:
    cfg = _resolve_config(args)
    _warn_region(cfg.alpha, cfg.beta)
    scales = _float_list(args.scales)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = BoussinesqParams(cfg.alpha, cfg.beta)
    init = make_initial(cfg.init, cfg.n, seed=cfg.seed, amplitude=cfg.init_amplitude, mode=cfg.init_mode)
    results = []
    try:
        for s in scales:
            results.append(twin_run(params, init, s, cfg.T, cfg.dt, sample_every=cfg.sample_every))
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    header = ["t"] + [f"Y_{s:g}" for s in scales]
    rows = [[t] + [r.Y[i] for r in results] for i, t in enumerate(results[0].times)]
    write_csv(out / "twin.csv", header, rows)
    final = {f"{s:g}": float(r.Y[-1]) for s, r in zip(scales, results)}
    print(json.dumps({"Y_T": final}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bousspec", description=__doc__.splitlines()[0])
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="run the coupled solver and write series, report and snapshots")
    _add_run_flags(s)
    s.add_argument("--snapshot-every", type=int, dest="snapshot_every", help="write a snapshot every k samples (0 disables)")
    for flag in ("energy", "gamma", "besov", "smoothing", "commutator"):
        s.add_argument(f"--{flag}", dest=flag, action=argparse.BooleanOptionalAction, default=None)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("region", help="membership in the admissible (alpha, beta) region")
    r.add_argument("--alpha", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--r", type=float)
    r.add_argument("--format", choices=("json", "text"), default="json")
    r.add_argument("--grid", help="rasterize the region on an NxM grid into pi_grid.csv")
    r.add_argument("--alpha-range", dest="alpha_range", default="0.85,1.0")
    r.add_argument("--beta-range", dest="beta_range", default="0.0,0.3")
    r.add_argument("--out", dest="output_dir")
    r.set_defaults(func=cmd_region)

    v = sub.add_parser("verify", help="run a property suite on its frozen seed set")
    v.add_argument("suite", choices=("lp", "td", "commutator", "energy", "twin"))
    v.add_argument("--alpha", type=float)
    v.add_argument("--beta", type=float)
    v.add_argument("--n", type=int)
    v.add_argument("--out", dest="output_dir")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("besov", help="Besov norm of a field stored in a snapshot")
    b.add_argument("--snapshot", required=True)
    b.add_argument("--field", default="theta")
    b.add_argument("--s", type=float, default=0.0)
    b.add_argument("--p", type=float, default=2.0)
    b.add_argument("--r", type=float, default=2.0)
    b.add_argument("--homogeneous", action="store_true")
    b.set_defaults(func=cmd_besov)

    t = sub.add_parser("twin", help="distance between runs with perturbed initial temperature")
    _add_run_flags(t)
    t.add_argument("--scales", default="1e-8,1e-6,1e-4")
    t.set_defaults(func=cmd_twin)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        if not getattr(args, "command", None):
            raise ConfigError("a subcommand is required: simulate, region, verify, besov or twin")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CFLError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
