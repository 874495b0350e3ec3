"""Seeded ensembles behind the frozen constants, and their regeneration.

Implicit constants in the norm inequalities are not known in closed form.
They are fitted on the calibration seeds, frozen into ``data/fixtures.json``
and then checked on disjoint holdout seeds with a fixed headroom factor.

Run ``python -m bousspec.calibration`` to regenerate the fixture file.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .commutators import (
    fejer_kernel,
    verify_block_commutator,
    verify_est1,
    verify_est2,
    verify_kernel_commutator,
    verify_power_interpolation,
)
from .initial_data import random_field, taylor_green_velocity
from .littlewood_paley import bernstein_ratio
from .spectral import get_grid, velocity_from_vorticity
from .transport_diffusion import (
    TDProblem,
    fit_envelope_constant,
    regularization_terms,
    smoothing_effect_ratio,
    solve_td,
)

CAL_SEEDS = tuple(range(10))
HOLDOUT_SEEDS = tuple(range(10, 20))
REFERENCE_N = 64
HEADROOM = 2.0
FIELD_CUTOFF = 8

COMMUTATOR_PARAMS = {
    "est1": {"alpha": 0.9, "s": 0.45},
    "est2": {"alpha": 0.9, "s": -0.1, "p": 4.0, "r": 1.0},
    "block": {"alpha": 0.9, "p": 4.0},
    "kernel_dual": {"order": 6, "m": 4.0, "p": 2.0},
    "kernel_l1": {"order": 6, "m": 4.0, "p": 2.0},
    "power": {"gamma": 4.0, "s": 0.5, "alpha": 0.9},
}

SMOOTHING = {"beta": 0.5, "T": 1.0, "dt": 0.01, "rho": (1.0, 2.0, math.inf), "p": (2.0, 4.0)}
REGULARIZATION = {"s": 0.25, "p": 2.0, "r": 2.0, "rho": 2.0, "rho1": 1.0}
BERNSTEIN = {"n": 512, "q": (3, 4, 5, 6), "k": 0.5, "a": 2.0, "b": math.inf, "impulses": 4}


def ensemble_pair(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vorticity and temperature of ensemble member ``seed`` on an ``n`` grid.

    The fields live on the fixed band ``max|k_j| <= FIELD_CUTOFF`` so that
    every grid samples the same continuous functions.
    """
    grid = get_grid(n)
    om = random_field(grid, 1000 + seed, FIELD_CUTOFF)
    th = random_field(grid, 2000 + seed, FIELD_CUTOFF)
    return om, th


def commutator_params(alpha: float) -> dict:
    """Copy of the default estimate parameters moved to another ``alpha``."""
    P = {k: dict(v) for k, v in COMMUTATOR_PARAMS.items()}
    for v in P.values():
        if "alpha" in v:
            v["alpha"] = alpha
    P["est1"]["s"] = alpha / 2.0
    P["est2"]["s"] = alpha - 1.0
    return P


def commutator_ratios(seed: int, n: int, params: dict | None = None) -> dict[str, float]:
    """Ratios of every commutator estimate for one ensemble member."""
    om, th = ensemble_pair(seed, n)
    u = velocity_from_vorticity(om)
    P = params or COMMUTATOR_PARAMS
    out = {
        "est1": verify_est1(om, th, **P["est1"]).ratio,
        "est2": verify_est2(u, th, **P["est2"]).ratio,
        "block": verify_block_commutator(u, th, **P["block"]).ratio,
    }
    h = fejer_kernel(get_grid(n), P["kernel_dual"]["order"])
    r1, r2 = verify_kernel_commutator(h, th, om, P["kernel_dual"]["m"], P["kernel_dual"]["p"])
    out["kernel_dual"] = r1.ratio
    out["kernel_l1"] = r2.ratio
    pp = P["power"]
    out["power"] = verify_power_interpolation(th, pp["gamma"], pp["s"], pp["alpha"]).ratio
    return out


def rho_key(rho: float, p: float) -> str:
    r = "inf" if rho == math.inf else f"{rho:g}"
    return f"rho={r},p={p:g}"


def smoothing_run(seed: int, n: int):
    """Transport-diffusion run with steady Taylor-Green velocity."""
    grid = get_grid(n)
    prob = TDProblem(
        SMOOTHING["beta"],
        random_field(grid, 3000 + seed, FIELD_CUTOFF),
        velocity=taylor_green_velocity(grid),
    )
    return solve_td(prob, SMOOTHING["dt"], SMOOTHING["T"])


def smoothing_ratios(traj) -> dict[str, float]:
    return {
        rho_key(rho, p): smoothing_effect_ratio(traj, rho, p)[2]
        for rho in SMOOTHING["rho"]
        for p in SMOOTHING["p"]
    }


def impulse_field(seed: int, n: int, count: int) -> np.ndarray:
    """Signed point impulses at seeded grid nodes."""
    rng = np.random.default_rng(4000 + seed)
    f = np.zeros((n, n))
    idx = rng.integers(0, n, size=(count, 2))
    signs = rng.choice([-1.0, 1.0], size=count)
    for (i, j), s in zip(idx, signs):
        f[i, j] += s
    return f


def bernstein_ratios(seed: int) -> list[float]:
    B = BERNSTEIN
    f = impulse_field(seed, B["n"], B["impulses"])
    return [bernstein_ratio(f, q, B["k"], B["a"], B["b"]) for q in B["q"]]


def calibrate(log=print) -> dict:
    fx: dict = {
        "protocol": {
            "calibration_seeds": list(CAL_SEEDS),
            "holdout_seeds": list(HOLDOUT_SEEDS),
            "reference_n": REFERENCE_N,
            "headroom": HEADROOM,
            "field_cutoff": FIELD_CUTOFF,
        }
    }
    rows = [commutator_ratios(s, REFERENCE_N) for s in CAL_SEEDS]
    fx["commutators"] = {
        name: {"cal_max": max(r[name] for r in rows), "params": COMMUTATOR_PARAMS[name]}
        for name in COMMUTATOR_PARAMS
    }
    log("commutators", {k: v["cal_max"] for k, v in fx["commutators"].items()})

    trajs = [smoothing_run(s, REFERENCE_N) for s in CAL_SEEDS]
    srows = [smoothing_ratios(t) for t in trajs]
    fx["smoothing"] = {
        "beta": SMOOTHING["beta"],
        "T": SMOOTHING["T"],
        "dt": SMOOTHING["dt"],
        "cal_max": {k: max(r[k] for r in srows) for k in srows[0]},
    }
    log("smoothing", fx["smoothing"]["cal_max"])

    R = REGULARIZATION
    terms = [regularization_terms(t, R["s"], R["p"], R["r"], R["rho"], R["rho1"]) for t in trajs]
    fx["regularization"] = {"C": fit_envelope_constant(terms), "params": R}
    log("regularization C", fx["regularization"]["C"])

    b = [x for s in CAL_SEEDS for x in bernstein_ratios(s)]
    B = dict(BERNSTEIN)
    B["b"] = "inf"
    B["q"] = list(B["q"])
    fx["bernstein"] = dict(B, band=[min(b), max(b)])
    log("bernstein band", fx["bernstein"]["band"])
    return fx


def main(argv=None) -> int:
    out = Path(__file__).with_name("data") / "fixtures.json"
    if argv and len(argv) > 0:
        out = Path(argv[0])
    fx = calibrate()
    out.write_text(json.dumps(fx, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
