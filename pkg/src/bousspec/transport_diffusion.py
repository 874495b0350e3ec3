"""Linear transport with fractional diffusion and a prescribed velocity.

Solves ``d_t theta + u . grad theta + |D|^beta theta = f`` on the torus with
an integrating-factor (Lawson) RK4 scheme: the dissipation is integrated
exactly mode by mode and the advection and forcing go through classical
RK4 on the filtered variable ``exp(t |k|^beta) theta_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .littlewood_paley import (
    BesovSpec,
    DyadicPartition,
    SpaceTimeSpec,
    _DEFAULT,
    besov_norm,
    block_norms,
    space_time_norm,
)
from .spectral import (
    Grid,
    _grid_of,
    advect_hat,
    curl_hat,
    divergence_hat,
    forward_transform,
    get_grid,
    inverse_transform,
    lp_norm,
)

__all__ = [
    "CFLError",
    "DivergenceError",
    "TDProblem",
    "TDTrajectory",
    "solve_td",
    "dissipation_symbol",
    "verify_max_principle",
    "MaxPrincipleReport",
    "smoothing_effect_ratio",
    "regularization_norm",
    "regularization_terms",
    "fit_envelope_constant",
]

Field2 = tuple[np.ndarray, np.ndarray]
VelocityProvider = Union[None, Field2, Callable[[float], Field2]]
ForcingProvider = Union[None, np.ndarray, Callable[[float], np.ndarray]]

DIV_RTOL = 1e-10


class CFLError(ValueError):
    """Time step too large for the advecting velocity."""


class DivergenceError(ValueError):
    """Prescribed velocity is not divergence-free."""


def dissipation_symbol(grid: Grid, order: float) -> np.ndarray:
    """``|k|^order`` with the zero mode set to 0 (also for ``order = 0``)."""
    out = np.zeros(grid.shape)
    nz = grid.kmag > 0
    out[nz] = grid.kmag[nz] ** order
    return out


def cfl_number(u1: np.ndarray, u2: np.ndarray, dt: float) -> float:
    n = u1.shape[-1]
    umax = float(np.max(np.sqrt(u1 * u1 + u2 * u2)))
    return umax * dt * n / (2.0 * math.pi)


def check_cfl(u1: np.ndarray, u2: np.ndarray, dt: float) -> None:
    c = cfl_number(u1, u2, dt)
    if c > 0.5:
        raise CFLError(f"CFL number {c:.3g} exceeds 0.5; reduce dt")


def check_divergence(u1h: np.ndarray, u2h: np.ndarray, t: float = 0.0) -> None:
    div = float(np.max(np.abs(divergence_hat(u1h, u2h))))
    scale = math.sqrt(float(np.sum(np.abs(u1h) ** 2 + np.abs(u2h) ** 2)))
    if div > DIV_RTOL * scale:
        raise DivergenceError(f"velocity divergence {div:.3g} at t={t} (scale {scale:.3g})")


@dataclass
class TDProblem:
    """Data for one transport-diffusion run.

    ``velocity`` and ``forcing`` are either ``None`` (zero), a steady field,
    or a callable of time returning the physical field(s).
    """

    beta: float
    theta0: np.ndarray
    velocity: VelocityProvider = None
    forcing: ForcingProvider = None

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        self.theta0 = np.asarray(self.theta0, dtype=float)

    @property
    def steady_velocity(self) -> bool:
        return not callable(self.velocity)

    def velocity_at(self, t: float) -> Field2 | None:
        v = self.velocity(t) if callable(self.velocity) else self.velocity
        if v is None:
            return None
        return np.asarray(v[0], dtype=float), np.asarray(v[1], dtype=float)

    def forcing_at(self, t: float) -> np.ndarray | None:
        f = self.forcing(t) if callable(self.forcing) else self.forcing
        return None if f is None else np.asarray(f, dtype=float)


@dataclass
class TDTrajectory:
    times: np.ndarray
    theta: np.ndarray  # (samples, n, n)
    dt: float
    problem: TDProblem
    integrator_tag: str = "lawson-rk4"
    steps: int = 0

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.times.tolist(), self.theta))

    @property
    def grid(self) -> Grid:
        return _grid_of(self.theta[0])

    def forcing_samples(self) -> np.ndarray | None:
        if self.problem.forcing is None:
            return None
        return np.array([self.problem.forcing_at(t) for t in self.times])

    def vorticity_samples(self) -> np.ndarray:
        out = np.zeros_like(self.theta)
        for i, t in enumerate(self.times):
            v = self.problem.velocity_at(t)
            if v is not None:
                w = curl_hat(forward_transform(v[0]), forward_transform(v[1]))
                out[i] = inverse_transform(w)
        return out

    def velocity_gradient_sup(self) -> np.ndarray:
        """``||grad u(t)||_inf`` at each sample (operator norm, pointwise)."""
        grid = self.grid
        out = np.zeros(len(self.times))
        for i, t in enumerate(self.times):
            v = self.problem.velocity_at(t)
            if v is None:
                continue
            g = []
            for comp in v:
                ch = forward_transform(comp)
                g.append(inverse_transform(1j * grid.k1_odd * ch))
                g.append(inverse_transform(1j * grid.k2_odd * ch))
            mats = np.stack(g, axis=-1).reshape(grid.shape + (2, 2))
            out[i] = float(np.max(np.linalg.norm(mats, ord=2, axis=(-2, -1))))
        return out


def _n_steps(dt: float, T: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    m = int(round(T / dt))
    if abs(m * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"T={T} is not a multiple of dt={dt}")
    return m


def solve_td(
    prob: TDProblem,
    dt: float,
    T: float,
    grid: Grid | None = None,
    sample_every: int = 1,
) -> TDTrajectory:
    """Integrate a transport-diffusion problem up to time ``T``.

    Raises :class:`CFLError` when ``max|u| dt n / (2 pi) > 0.5`` and
    :class:`DivergenceError` for a velocity that is not divergence-free.
    """
    grid = grid or _grid_of(prob.theta0)
    if prob.theta0.shape != grid.shape:
        raise ValueError(f"grid mismatch: theta0 {prob.theta0.shape} vs grid {grid.shape}")
    nsteps = _n_steps(dt, T)
    sym = dissipation_symbol(grid, prob.beta)
    E = np.exp(-dt * sym)
    Eh = np.exp(-0.5 * dt * sym)

    cache: dict[float, tuple] = {}

    def vel_hat(t: float):
        key = 0.0 if prob.steady_velocity else t
        if key in cache:
            return cache[key]
        v = prob.velocity_at(t)
        if v is None:
            val = None
        else:
            check_cfl(v[0], v[1], dt)
            u1h, u2h = forward_transform(v[0]), forward_transform(v[1])
            check_divergence(u1h, u2h, t)
            val = (u1h, u2h)
        if prob.steady_velocity:
            cache[key] = val
        return val

    def rhs(t: float, th: np.ndarray) -> np.ndarray:
        out = np.zeros_like(th)
        uh = vel_hat(t)
        if uh is not None:
            adv = advect_hat(uh[0], uh[1], th, True, grid)
            adv[0, 0] = 0.0
            out -= adv
        f = prob.forcing_at(t)
        if f is not None:
            out += forward_transform(f)
        return out

    th = forward_transform(prob.theta0)
    times = [0.0]
    samples = [prob.theta0.copy()]
    for i in range(nsteps):
        t = i * dt
        k1 = rhs(t, th)
        k2 = rhs(t + 0.5 * dt, Eh * (th + 0.5 * dt * k1))
        k3 = rhs(t + 0.5 * dt, Eh * th + 0.5 * dt * k2)
        k4 = rhs(t + dt, E * th + dt * (Eh * k3))
        th = E * th + dt / 6.0 * (E * k1 + 2.0 * Eh * (k2 + k3) + k4)
        if (i + 1) % sample_every == 0 or i + 1 == nsteps:
            times.append((i + 1) * dt)
            samples.append(inverse_transform(th))
    return TDTrajectory(np.array(times), np.array(samples), dt, prob, steps=nsteps)


def _time_integral(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral, starting at 0."""
    out = np.zeros(len(times))
    if len(times) > 1:
        out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(times))
    return out


@dataclass
class MaxPrincipleReport:
    p_list: list
    worst_margin: float
    worst: dict = field(default_factory=dict)  # p -> (t, margin)
    passed: bool = True


def verify_max_principle(traj: TDTrajectory, p_list: Sequence[float] = (2, 4, np.inf)) -> MaxPrincipleReport:
    """Check ``||theta(t)||_p <= ||theta0||_p + int_0^t ||f||_p + tol`` at every sample.

    ``tol = 1e-6 ||theta0||_p``. The margin is bound minus norm (>= 0 when
    the check holds); the report carries the smallest one.
    """
    fs = traj.forcing_samples()
    worst: dict = {}
    ok = True
    overall = math.inf
    for p in p_list:
        n0 = lp_norm(traj.theta[0], p)
        fn = np.zeros(len(traj.times)) if fs is None else np.array([lp_norm(f, p) for f in fs])
        bound = n0 + _time_integral(traj.times, fn) + 1e-6 * n0
        norms = np.array([lp_norm(th, p) for th in traj.theta])
        margins = bound - norms
        j = int(np.argmin(margins))
        worst[p] = (float(traj.times[j]), float(margins[j]))
        ok = ok and bool(np.all(margins >= 0))
        overall = min(overall, float(margins[j]))
    return MaxPrincipleReport(list(p_list), overall, worst, ok)


def _lrho(times: np.ndarray, values: np.ndarray, rho: float) -> np.ndarray:
    values = np.abs(values)
    if rho == np.inf:
        return np.max(values, axis=0)
    return np.trapezoid(values**rho, times, axis=0) ** (1.0 / rho)


def smoothing_effect_ratio(
    traj: TDTrajectory,
    rho: float,
    p: float,
    part: DyadicPartition = _DEFAULT,
) -> tuple[float, float, float]:
    """Smoothing gain of ``beta/rho`` derivatives, uniform over blocks.

    lhs = ``sup_{q >= 0} 2^{q beta/rho} ||Delta_q theta||_{L^rho_t L^p}``,
    rhs = ``||theta0||_p + ||theta0||_inf ||omega||_{L^1_t L^p} + ||f||_{L^1_t L^p}``.
    """
    if not (2 <= p < np.inf):
        raise ValueError(f"p must lie in [2, inf), got {p}")
    if not rho >= 1:
        raise ValueError(f"rho must lie in [1, inf], got {rho}")
    beta = traj.problem.beta
    rows = np.array([block_norms(th, p, part)[1] for th in traj.theta])  # (time, q)
    qs = np.arange(-1, rows.shape[1] - 1)
    per_q = _lrho(traj.times, rows, rho)
    pos = qs >= 0
    lhs = float(np.max(2.0 ** (qs[pos] * beta / rho) * per_q[pos]))
    th0 = traj.theta[0]
    om = traj.vorticity_samples()
    om_int = float(np.trapezoid([lp_norm(w, p) for w in om], traj.times))
    fs = traj.forcing_samples()
    f_int = 0.0 if fs is None else float(np.trapezoid([lp_norm(f, p) for f in fs], traj.times))
    rhs = lp_norm(th0, p) + lp_norm(th0, np.inf) * om_int + f_int
    if rhs == 0.0:
        if lhs == 0.0:
            return 0.0, 0.0, 0.0
        raise ZeroDivisionError("degenerate input: right-hand side vanishes with nonzero lhs")
    return lhs, rhs, lhs / rhs


def regularization_terms(
    traj: TDTrajectory,
    s: float,
    p: float,
    r: float,
    rho: float,
    rho1: float,
    part: DyadicPartition = _DEFAULT,
) -> tuple[float, float, float]:
    """Return ``(lhs, base, U)`` of the regularization estimate.

    ``lhs`` is the tilde space-time norm of theta in the homogeneous space of
    regularity ``s + beta/rho``, ``base`` is
    ``||theta0||_{B^s} + ||f||`` (tilde, ``L^rho1``, regularity ``s + beta/rho1 - beta``)
    and ``U = int ||grad u||_inf``.
    """
    if not (-1 < s < 1):
        raise ValueError(f"s must lie in ]-1, 1[, got {s}")
    if not rho1 <= rho:
        raise ValueError(f"need rho1 <= rho, got rho1={rho1}, rho={rho}")
    beta = traj.problem.beta
    times = traj.times
    spec = SpaceTimeSpec(BesovSpec(s + beta / rho, p, r, homogeneous=True), rho, tilde=True)
    lhs = space_time_norm((times, list(traj.theta)), spec, part)
    base = besov_norm(traj.theta[0], BesovSpec(s, p, r, homogeneous=True), part)
    fs = traj.forcing_samples()
    if fs is not None:
        fspec = SpaceTimeSpec(BesovSpec(s + beta / rho1 - beta, p, r, homogeneous=True), rho1, tilde=True)
        base += space_time_norm((times, list(fs)), fspec, part)
    U = float(np.trapezoid(traj.velocity_gradient_sup(), times))
    return lhs, base, U


def fit_envelope_constant(samples: Sequence[tuple[float, float, float]]) -> float:
    """Smallest ``C >= 1e-12`` with ``lhs <= C exp(C U) base`` for all samples."""
    C = 1e-12
    for lhs, base, U in samples:
        if lhs == 0.0:
            continue
        target = lhs / base
        g = lambda c: c * math.exp(c * U) - target  # noqa: E731
        if g(C) >= 0:
            continue
        hi = max(1.0, target)
        while g(hi) < 0:
            hi *= 2.0
        C = max(C, brentq(g, C, hi, xtol=1e-14, rtol=1e-14))
    return C


def regularization_norm(
    traj: TDTrajectory,
    s: float,
    p: float,
    r: float,
    rho: float,
    rho1: float,
    part: DyadicPartition = _DEFAULT,
    C: float | None = None,
) -> tuple[float, float, float]:
    """``(lhs, rhs, lhs/rhs)`` with ``rhs = C exp(C U) base``.

    ``C`` defaults to the frozen calibration constant.
    """
    if C is None:
        from .fixtures import load_fixtures

        C = load_fixtures()["regularization"]["C"]
    lhs, base, U = regularization_terms(traj, s, p, r, rho, rho1, part)
    rhs = C * math.exp(C * U) * base
    if rhs == 0.0:
        return lhs, 0.0, 0.0 if lhs == 0.0 else math.inf
    return lhs, rhs, lhs / rhs
