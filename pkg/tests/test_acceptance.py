"""Acceptance criteria 1 to 11, one test and one PASS/FAIL line each."""

import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bousspec import calibration as cal
from bousspec.boussinesq import BoussinesqParams, gamma_residual, run, twin_run
from bousspec.fixtures import load_fixtures
from bousspec.initial_data import make_initial, random_field
from bousspec.io import read_snapshot, write_snapshot
from bousspec.littlewood_paley import block, build_partition
from bousspec.region import ALPHA_MIN, R0, r0
from bousspec.spectral import forward_transform, get_grid, inverse_transform
from bousspec.transport_diffusion import TDProblem, solve_td

GOLDEN = Path(__file__).parent / "golden"
ENSEMBLE_SEEDS = range(10)
P = BoussinesqParams(0.95, 0.08)


def test_criterion_01_region_constants(record):
    errs = [abs(ALPHA_MIN - 0.8876275643042055), abs(R0 - 2.579795897113271)]
    errs.append(abs((6 - math.sqrt(6)) / 4 - 0.8876275643042055))
    errs.append(abs((8 + 2 * math.sqrt(6)) / 5 - 2.579795897113271))
    r = r0()
    ids = [abs((5 * r - 4) / (3 * r - 4) - (7 + 2 * math.sqrt(6)) / 5)]
    for a in (0.89, 0.92, 0.95, 0.98):
        ids.append(abs((1 - a) / ((4 / a) * (1 - 1 / r) - 2) - a * (1 - a) / (math.sqrt(6) - 2 * a)))
    ok = max(errs) < 1e-14 and max(ids) < 1e-12
    assert record(1, ok, f"constants err {max(errs):.1e} < 1e-14, identities err {max(ids):.1e} < 1e-12")


def test_criterion_02_littlewood_paley(record):
    n = 256
    grid = get_grid(n)
    part = build_partition()
    qs = range(-1, part.qmax(grid) + 1)
    unity = float(np.max(np.abs(part.weights(grid).sum(axis=0) - 1.0)))
    f = random_field(grid, 0, cutoff=n // 2 - 1)
    fh = forward_transform(f)
    blocks = {q: block(fh, q, part) for q in qs}
    recon = float(np.max(np.abs(inverse_transform(sum(blocks.values())) - f)))
    fnorm = math.sqrt(float(np.sum(np.abs(fh) ** 2)))
    cross = 0.0
    for j in qs:
        for q in qs:
            if abs(j - q) >= 2:
                bb = block(blocks[q], j, part)
                cross = max(cross, math.sqrt(float(np.sum(np.abs(bb) ** 2))) / fnorm)
    ok = unity < 1e-12 and recon < 1e-12 and cross < 1e-13
    assert record(2, ok, f"unity {unity:.1e}, reconstruction {recon:.1e}, |j-q|>=2 overlap {cross:.1e}")


def test_criterion_03_single_mode_decay(record):
    grid = get_grid(32)
    th0 = np.cos(3 * grid.x1)
    worst, ratios = 0.0, []
    for beta in (0.1, 0.5, 1.0):
        exact = math.exp(-(3.0**beta)) * th0
        errs = []
        for dt in (1e-3, 5e-4):
            traj = solve_td(TDProblem(beta, th0), dt, 1.0, sample_every=10**7)
            errs.append(float(np.max(np.abs(traj.theta[-1] - exact)) / np.max(np.abs(exact))))
        worst = max(worst, errs[0])
        ratios.append(errs[0] / errs[1] if errs[1] > 0 else math.inf)
    ok = worst < 1e-8 and min(ratios) >= 8.0
    detail = f"max rel err {worst:.1e} < 1e-8, dt-halving error ratios {', '.join(f'{r:.2f}' for r in ratios)} (need >= 8)"
    assert record(3, ok, detail)


@pytest.fixture(scope="module")
def ensemble():
    out = []
    for seed in ENSEMBLE_SEEDS:
        traj, e, _ = run(P, make_initial("random", 128, seed=seed), 2.0, 1e-3, sample_every=10, keep_fields=False)
        out.append((traj, e))
    return out


def test_criterion_04_energy_identity(record, ensemble):
    ident = max(float(np.max(e.identity_defect())) for _, e in ensemble)
    vel = max(float(np.max(e.velocity_defect())) for _, e in ensemble)
    ok = ident < 1e-5 and vel <= 1e-5
    assert record(4, ok, f"theta identity defect {ident:.1e} < 1e-5, u bound excess {vel:.2e} <= 1e-5")


def test_criterion_05_max_principle(record, ensemble):
    worst = -math.inf
    for _, e in ensemble:
        for vals in e.theta_Lp.values():
            worst = max(worst, max(v / vals[0] for v in vals) - 1.0)
    ok = worst <= 1e-6
    assert record(5, ok, f"max relative L^p growth {worst:.1e} <= 1e-6 over p in 2, 4, inf")


def test_criterion_06_divergence(record, ensemble):
    div = max(traj.max_divergence for traj, _ in ensemble)
    steps = sum(traj.steps for traj, _ in ensemble)
    assert record(6, div == 0.0, f"max |k . u_hat| = {div!r} over {steps} steps, all stages")


def test_criterion_07_commutators(record):
    fx = load_fixtures()["commutators"]
    worst_holdout, worst_drift = 0.0, 1.0
    for seed in cal.HOLDOUT_SEEDS:
        r = cal.commutator_ratios(seed, cal.REFERENCE_N)
        for name, v in r.items():
            worst_holdout = max(worst_holdout, v / fx[name]["cal_max"])
    for seed in (*cal.CAL_SEEDS, *cal.HOLDOUT_SEEDS):
        lo, hi = cal.commutator_ratios(seed, 64), cal.commutator_ratios(seed, 256)
        for name in lo:
            worst_drift = max(worst_drift, lo[name] / hi[name], hi[name] / lo[name])
    ok = worst_holdout <= cal.HEADROOM and worst_drift < 2.0
    assert record(7, ok, f"holdout / cal max {worst_holdout:.3f} <= 2, n=64 vs 256 drift {worst_drift:.3f} < 2")


def test_criterion_08_smoothing(record):
    fx = load_fixtures()["smoothing"]["cal_max"]
    worst_bound, worst_drift = 0.0, 1.0
    for seed in cal.HOLDOUT_SEEDS:
        by_n = {n: cal.smoothing_ratios(cal.smoothing_run(seed, n)) for n in (64, 128, 256)}
        for key, lim in fx.items():
            worst_bound = max(worst_bound, by_n[cal.REFERENCE_N][key] / lim)
            vals = [by_n[n][key] for n in by_n]
            worst_drift = max(worst_drift, max(vals) / min(vals))
    ok = worst_bound <= cal.HEADROOM and worst_drift < 2.0
    assert record(8, ok, f"holdout / fixture {worst_bound:.3f} <= 2, drift over n=64,128,256 {worst_drift:.3f} < 2")


def test_criterion_09_gamma_residual(record):
    lin_traj, _, _ = run(P, make_initial("random", 64, seed=0, amplitude=1e-6), 0.01, 2.5e-4, sample_every=1)
    lin = gamma_residual(lin_traj, P, 0.005)
    ratios = []
    for seed in (0, 1, 2):
        init = make_initial("random", 64, seed=seed)
        res = []
        for dt in (2e-3, 1e-3):
            traj, _, _ = run(P, init, 0.04, dt, sample_every=1)
            res.append(gamma_residual(traj, P, 0.02))
        ratios.append(res[0] / res[1])
    ok = lin < 1e-6 and all(3.0 <= r <= 5.0 for r in ratios)
    assert record(9, ok, f"linear residual {lin:.1e} < 1e-6, dt-halving ratios {', '.join(f'{r:.3f}' for r in ratios)} in [3, 5]")


def test_criterion_10_twin_monotone(record):
    scales = (1e-8, 1e-6, 1e-4)
    ordered = 0
    for seed in range(5):
        init = make_initial("random", 64, seed=seed, cutoff=6)
        ys = [twin_run(P, init, s, 1.0, 2e-3, sample_every=10).Y[-1] for s in scales]
        ordered += ys[0] < ys[1] < ys[2]
    assert record(10, ordered == 5, f"strict ordering of Y_T over scales 1e-8, 1e-6, 1e-4 on {ordered}/5 seeds")


def _cli(*args):
    env = dict(os.environ, BOUSSPEC_THREADS="1")
    env.pop("BOUSSPEC_OUT", None)
    return subprocess.run([sys.executable, "-m", "bousspec", *map(str, args)], capture_output=True, text=True, env=env)


def test_criterion_11_cli_contract(record, tmp_path):
    small = ["--alpha", "0.95", "--beta", "0.08", "--n", "16", "--dt", "0.01", "--T", "0.1", "--sample-every", "2"]
    codes = {
        "ok": _cli("simulate", *small, "--init", "random", "--out", tmp_path / "a").returncode == 0,
        "invariant": _cli(
            "simulate", "--alpha", "0.95", "--beta", "0.08", "--n", "8", "--dt", "0.125", "--T", "2",
            "--init", "taylor-green-plus-mode", "--init-amplitude", "3", "--sample-every", "1", "--out", tmp_path / "f",
        ).returncode == 1,
        "config": (lambda r: r.returncode == 2 and "beta" in r.stderr)(_cli("simulate", "--alpha", "0.95")),
        "blowup": _cli("simulate", *small, "--init", "single-mode", "--init-amplitude", "1e13", "--out", tmp_path / "b").returncode == 3,
        "region": _cli("region", "--grid", "2y2").returncode == 2,
    }
    header = (tmp_path / "a" / "series.csv").read_text().splitlines()[0] + "\n"
    golden = header == (GOLDEN / "series_header_e1g1b1.csv").read_text()
    _cli("simulate", *small, "--init", "random", "--out", tmp_path / "c")
    determinism = all(
        (tmp_path / "a" / f.name).read_bytes() == f.read_bytes()
        for f in (tmp_path / "c").iterdir() if f.suffix in (".csv", ".bqsf")
    )
    snap = sorted((tmp_path / "a").glob("*.bqsf"))[-1]
    write_snapshot(tmp_path / "copy.bqsf", read_snapshot(snap))
    roundtrip = snap.read_bytes() == (tmp_path / "copy.bqsf").read_bytes()
    rng = np.random.default_rng(0)
    arr = {"x": rng.standard_normal((8, 8)), "y": np.array([[np.inf, -0.0], [np.nan, 5e-324]])}
    for k, v in arr.items():
        write_snapshot(tmp_path / f"{k}.bqsf", {k: v})
        roundtrip &= read_snapshot(tmp_path / f"{k}.bqsf")[k].tobytes() == v.tobytes()
    ok = all(codes.values()) and golden and determinism and roundtrip
    bad = [k for k, v in codes.items() if not v]
    detail = f"exit codes {'ok' if not bad else 'wrong for ' + ', '.join(bad)}, golden header {golden}, deterministic {determinism}, snapshot round-trip {roundtrip}"
    assert record(11, ok, detail)
