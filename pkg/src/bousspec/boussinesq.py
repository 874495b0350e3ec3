"""Vorticity-temperature solver with fractional dissipation.

Evolves

    d_t omega + u . grad omega + |D|^alpha omega = d_1 theta
    d_t theta + u . grad theta + |D|^beta theta  = 0

with ``u`` recovered from ``omega`` by the Biot-Savart law. Time stepping is
integrating-factor RK4 with two-thirds dealiasing, as in
:mod:`bousspec.transport_diffusion`. Diagnostics follow the corrected
unknown ``Gamma = omega - R_alpha theta``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .commutators import commutator_advect_hat
from .littlewood_paley import _DEFAULT, BesovSpec, DyadicPartition, besov_norm, block_norms
from .spectral import (
    Grid,
    MultiplierSpec,
    _grid_of,
    advect_hat,
    biot_savart,
    fft2,
    forward_transform,
    get_grid,
    ifft2,
    inverse_transform,
    lp_norm,
    symbol,
)
from .transport_diffusion import CFLError, _n_steps, dissipation_symbol

logger = logging.getLogger(__name__)

__all__ = [
    "BlowUpError",
    "BoussinesqParams",
    "SimState",
    "DiagnosticsConfig",
    "EnergyLedger",
    "GammaSeries",
    "Trajectory",
    "RunResult",
    "Stepper",
    "step",
    "run",
    "gamma",
    "gamma_residual",
    "twin_run",
    "TwinResult",
    "initial_state",
]

OVERFLOW_GUARD = 1e12


class BlowUpError(RuntimeError):
    """A monitored quantity left the finite range or exceeded the guard."""

    def __init__(self, message: str, t: float, quantity: str, value: float):
        super().__init__(message)
        self.t = t
        self.quantity = quantity
        self.value = value


@dataclass(frozen=True)
class BoussinesqParams:
    alpha: float
    beta: float
    nu: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in ]0, 1], got {v}")
        if self.nu != 1.0 or self.kappa != 1.0:
            raise ValueError("viscosity and diffusivity are fixed to 1")


@dataclass
class SimState:
    """One time slice ``(t, omega_hat, theta_hat)``; velocity cached on demand."""

    t: float
    omega_hat: np.ndarray
    theta_hat: np.ndarray
    _u_hat: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def grid(self) -> Grid:
        return _grid_of(self.omega_hat)

    @property
    def u_hat(self) -> tuple[np.ndarray, np.ndarray]:
        if self._u_hat is None:
            self._u_hat = biot_savart(self.omega_hat)
        return self._u_hat

    def omega(self) -> np.ndarray:
        return inverse_transform(self.omega_hat)

    def theta(self) -> np.ndarray:
        return inverse_transform(self.theta_hat)

    def velocity(self) -> tuple[np.ndarray, np.ndarray]:
        u1h, u2h = self.u_hat
        return inverse_transform(u1h), inverse_transform(u2h)


def initial_state(omega0: np.ndarray, theta0: np.ndarray, t: float = 0.0) -> SimState:
    """Build a state from physical fields; the vorticity mean is removed."""
    if np.shape(omega0) != np.shape(theta0):
        raise ValueError("grid mismatch between omega0 and theta0")
    oh = forward_transform(omega0)
    if oh[0, 0] != 0:
        logger.info("removing vorticity mean %.3g", oh[0, 0].real)
        oh[0, 0] = 0.0
    return SimState(t, oh, forward_transform(theta0))


class Stepper:
    """Integrating-factor RK4 for the coupled system at a fixed ``dt``.

    ``max_divergence`` holds the largest ``|k . u_hat(k)|`` seen at any stage.
    """

    def __init__(self, params: BoussinesqParams, grid: Grid, dt: float):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.params, self.grid, self.dt = params, grid, dt
        sa = dissipation_symbol(grid, params.alpha)
        sb = dissipation_symbol(grid, params.beta)
        self.Ew, self.Ewh = np.exp(-dt * sa), np.exp(-0.5 * dt * sa)
        self.Et, self.Eth = np.exp(-dt * sb), np.exp(-0.5 * dt * sb)
        self.ik1 = 1j * grid.k1_odd
        self.ik2 = 1j * grid.k2_odd
        self.mask = grid.dealias_mask
        # packed gradient symbol i k1 + i (i k2), truncated by the 2/3 rule
        self.grad = self.mask * (self.ik1 + 1j * self.ik2)
        om = self.mask / grid.n**2
        om[0, 0] = 0.0
        self.out_mask = om
        self.max_divergence = 0.0
        self.stage_count = 0
        self.t = 0.0

    def rhs(self, oh: np.ndarray, th: np.ndarray, check_cfl: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Nonlinear and forcing terms ``(N_omega, N_theta)`` in spectral form."""
        g = self.grid
        u1h, u2h = biot_savart(oh)
        div = g.k1_odd * u1h + g.k2_odd * u2h
        self.max_divergence = max(self.max_divergence, float(np.max(np.abs(div.view(np.float64)))))
        self.stage_count += 1
        n2 = g.n**2
        uu = ifft2(self.mask * (u1h + 1j * u2h)) * n2
        if check_cfl:
            umax = math.sqrt(float(np.max(uu.real**2 + uu.imag**2)))
            cfl = umax * self.dt * g.n / (2 * math.pi)
            if cfl > 0.5:
                raise CFLError(f"CFL number {cfl:.3g} exceeds 0.5 at t={self.t:.6g}")
        gw = ifft2(self.grad * oh) * n2
        gt = ifft2(self.grad * th) * n2
        aw = fft2(uu.real * gw.real + uu.imag * gw.imag) * self.out_mask
        at = fft2(uu.real * gt.real + uu.imag * gt.imag) * self.out_mask
        aw -= self.ik1 * th
        return -aw, -at

    def advance(self, oh, th, k1=None):
        """One step from ``(oh, th)``; ``k1`` may carry ``rhs(oh, th)``."""
        dt = self.dt
        Ew, Ewh, Et, Eth = self.Ew, self.Ewh, self.Et, self.Eth
        k1w, k1t = k1 if k1 is not None else self.rhs(oh, th)
        k2w, k2t = self.rhs(Ewh * (oh + 0.5 * dt * k1w), Eth * (th + 0.5 * dt * k1t), False)
        k3w, k3t = self.rhs(Ewh * oh + 0.5 * dt * k2w, Eth * th + 0.5 * dt * k2t, False)
        k4w, k4t = self.rhs(Ew * oh + dt * (Ewh * k3w), Et * th + dt * (Eth * k3t), False)
        oh_new = Ew * oh + dt / 6.0 * (Ew * k1w + 2.0 * Ewh * (k2w + k3w) + k4w)
        th_new = Et * th + dt / 6.0 * (Et * k1t + 2.0 * Eth * (k2t + k3t) + k4t)
        oh_new[0, 0] = 0.0
        self.t += dt
        return oh_new, th_new


def _guard(t: float, **values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v) or abs(v) > OVERFLOW_GUARD:
            raise BlowUpError(f"blow-up guard tripped at t={t:.6g}: {name}={v!r}", t, name, float(v))


def step(state: SimState, params: BoussinesqParams, dt: float) -> SimState:
    """Advance one state by ``dt`` (convenience wrapper around :class:`Stepper`)."""
    st = Stepper(params, state.grid, dt)
    st.t = state.t
    oh, th = st.advance(state.omega_hat, state.theta_hat)
    t = state.t + dt
    _guard(t, omega=float(np.sum(np.abs(oh))), theta=float(np.sum(np.abs(th))))
    return SimState(t, oh, th)


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Toggles and exponent lists for the sampled diagnostics."""

    energy: bool = True
    gamma: bool = True
    besov: bool = True
    theta_p: tuple = (2.0, 4.0, math.inf)
    omega_p: tuple = (2.0, 4.0)
    gamma_r: tuple = (4.0,)


@dataclass
class EnergyLedger:
    t: list = field(default_factory=list)
    theta_L2: list = field(default_factory=list)
    theta_Hhalfbeta_int: list = field(default_factory=list)
    u_L2: list = field(default_factory=list)
    u_Hhalfalpha_int: list = field(default_factory=list)
    theta_Lp: dict = field(default_factory=dict)

    def identity_defect(self) -> np.ndarray:
        """Relative defect of ``|theta|^2 + 2 int |theta|_{H^{beta/2}}^2 = |theta0|^2``."""
        th2 = np.asarray(self.theta_L2) ** 2
        e0 = th2[0]
        if e0 == 0:
            return np.zeros_like(th2)
        return np.abs(th2 + 2.0 * np.asarray(self.theta_Hhalfbeta_int) - e0) / e0

    def velocity_defect(self) -> np.ndarray:
        """``|u(t)| - |u0| - t |theta0|`` (nonpositive when the bound holds)."""
        t = np.asarray(self.t)
        return np.asarray(self.u_L2) - self.u_L2[0] - t * self.theta_L2[0]


@dataclass
class GammaSeries:
    t: list = field(default_factory=list)
    gamma_L2: list = field(default_factory=list)
    gamma_Lr: dict = field(default_factory=dict)
    gamma_Hhalfalpha_int: list = field(default_factory=list)
    gamma_B2r_r1_int: dict = field(default_factory=dict)
    omega_Lp: dict = field(default_factory=dict)
    theta_B1malpha_inf1: list = field(default_factory=list)
    u_B1_inf1_int: list = field(default_factory=list)


@dataclass
class Trajectory:
    times: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    dt: float
    max_divergence: float
    steps: int

    def state(self, i: int) -> SimState:
        return SimState(float(self.times[i]), forward_transform(self.omega[i]), forward_transform(self.theta[i]))


@dataclass
class RunResult:
    trajectory: Trajectory
    energy: EnergyLedger
    gamma: GammaSeries

    def __iter__(self):
        return iter((self.trajectory, self.energy, self.gamma))


def gamma_hat(state: SimState, params: BoussinesqParams) -> np.ndarray:
    R = symbol(MultiplierSpec.modified_riesz(params.alpha), state.grid)
    return state.omega_hat - R * state.theta_hat


def gamma(state: SimState, params: BoussinesqParams) -> np.ndarray:
    """``Gamma = omega - R_alpha theta`` as a physical field."""
    return inverse_transform(gamma_hat(state, params))


class _Recorder:
    def __init__(self, params, grid, cfg: DiagnosticsConfig, part: DyadicPartition):
        self.params, self.grid, self.cfg, self.part = params, grid, cfg, part
        self.wa = dissipation_symbol(grid, params.alpha)
        self.wb = dissipation_symbol(grid, params.beta)
        self.R = symbol(MultiplierSpec.modified_riesz(params.alpha), grid)
        # |u_hat|^2 = |omega_hat|^2 / |k|^2 under the Biot-Savart law
        self.wu = self.wa / grid.kmag2_safe
        self.wu[0, 0] = 0.0
        self.energy = EnergyLedger(theta_Lp={p: [] for p in cfg.theta_p})
        self.gam = GammaSeries(
            gamma_Lr={r: [] for r in cfg.gamma_r},
            gamma_B2r_r1_int={r: [] for r in cfg.gamma_r},
            omega_Lp={p: [] for p in cfg.omega_p},
        )
        # running integrals (per step); the theta one carries an end correction
        self.int_th = 0.0
        self.int_u = 0.0
        self.int_g = 0.0
        self.prev = None
        self.dg0 = None
        self.prev_sample = None
        self.sample_int = {("g", r): 0.0 for r in cfg.gamma_r}
        self.sample_int["u"] = 0.0

    def _step_values(self, oh, th, k1t):
        th2 = th.real**2 + th.imag**2
        g_th = float(np.sum(self.wb * th2))
        g_u = float(np.sum(self.wu * (oh.real**2 + oh.imag**2)))
        gh = oh - self.R * th
        g_g = float(np.sum(self.wa * (gh.real**2 + gh.imag**2)))
        # time derivative of g_th along the flow
        dg = float(2.0 * np.sum(self.wb * (np.real(np.conj(th) * k1t) - self.wb * th2)))
        return g_th, g_u, g_g, dg

    def accumulate(self, oh, th, k1t, dt: float | None):
        vals = self._step_values(oh, th, k1t)
        if self.prev is None:
            self.dg0 = vals[3]
        else:
            p = self.prev
            self.int_th += 0.5 * dt * (p[0] + vals[0])
            self.int_u += 0.5 * dt * (p[1] + vals[1])
            self.int_g += 0.5 * dt * (p[2] + vals[2])
        self.prev = vals
        self.dt = dt if dt is not None else 0.0

    def sample(self, t: float, oh, th):
        cfg, part = self.cfg, self.part
        g = self.grid
        u1h, u2h = biot_savart(oh)
        e = self.energy
        gs = self.gam
        e.t.append(t)
        gs.t.append(t)
        theta = inverse_transform(th)
        th_l2 = math.sqrt(float(np.sum(np.abs(th) ** 2)))
        u_l2 = math.sqrt(float(np.sum(np.abs(u1h) ** 2 + np.abs(u2h) ** 2)))
        # corrected trapezoid: int_0^t g ~ trap + dt^2/12 (g'(0) - g'(t))
        corr = (self.dt**2 / 12.0) * (self.dg0 - self.prev[3]) if self.dt else 0.0
        e.theta_L2.append(th_l2)
        e.theta_Hhalfbeta_int.append(self.int_th + corr)
        e.u_L2.append(u_l2)
        e.u_Hhalfalpha_int.append(self.int_u)
        for p in cfg.theta_p:
            e.theta_Lp[p].append(th_l2 if p == 2 else lp_norm(theta, p))
        guards = {"theta_L2": th_l2, "u_L2": u_l2}
        if cfg.gamma or cfg.besov:
            gh = oh - self.R * th
            gam_f = inverse_transform(gh)
            gs.gamma_L2.append(math.sqrt(float(np.sum(np.abs(gh) ** 2))))
            gs.gamma_Hhalfalpha_int.append(self.int_g)
            omega = inverse_transform(oh)
            for p in cfg.omega_p:
                gs.omega_Lp[p].append(lp_norm(omega, p))
            for r in cfg.gamma_r:
                gs.gamma_Lr[r].append(lp_norm(gam_f, r))
            guards["gamma_L2"] = gs.gamma_L2[-1]
        if cfg.besov:
            bg = {r: besov_norm(gh, BesovSpec(2.0 / r, r, 1), part, spectral=True) for r in cfg.gamma_r}
            bu = besov_norm(np.stack([u1h, u2h]), BesovSpec(1.0, math.inf, 1), part, spectral=True)
            bt = besov_norm(th, BesovSpec(1.0 - self.params.alpha, math.inf, 1), part, spectral=True)
            if self.prev_sample is not None:
                t0, bg0, bu0 = self.prev_sample
                for r in cfg.gamma_r:
                    self.sample_int[("g", r)] += 0.5 * (t - t0) * (bg0[r] + bg[r])
                self.sample_int["u"] += 0.5 * (t - t0) * (bu0 + bu)
            self.prev_sample = (t, bg, bu)
            for r in cfg.gamma_r:
                gs.gamma_B2r_r1_int[r].append(self.sample_int[("g", r)])
            gs.u_B1_inf1_int.append(self.sample_int["u"])
            gs.theta_B1malpha_inf1.append(bt)
            guards["u_B1_inf1"] = bu
            guards["theta_B1malpha_inf1"] = bt
        _guard(t, **guards)


def run(
    params: BoussinesqParams,
    init,
    T: float,
    dt: float,
    sample_every: int = 10,
    diagnostics: DiagnosticsConfig | None = None,
    part: DyadicPartition = _DEFAULT,
    keep_fields: bool = True,
    on_sample=None,
) -> RunResult:
    """Integrate to ``T`` and return ``(trajectory, energy ledger, Gamma series)``.

    ``init`` is a :class:`SimState` or a pair ``(omega0, theta0)`` of physical
    fields. ``on_sample(state)`` is called at every sample, including ``t=0``.
    Raises :class:`BlowUpError` when a monitored quantity exceeds the guard.
    """
    cfg = diagnostics or DiagnosticsConfig()
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    state = init if isinstance(init, SimState) else initial_state(*init)
    grid = state.grid
    nsteps = _n_steps(dt, T)
    stepper = Stepper(params, grid, dt)
    stepper.t = state.t
    rec = _Recorder(params, grid, cfg, part)
    oh, th = state.omega_hat.copy(), state.theta_hat.copy()
    t0 = state.t
    times, oms, ths = [], [], []

    def take(t):
        rec.sample(t, oh, th)
        times.append(t)
        if keep_fields:
            oms.append(inverse_transform(oh))
            ths.append(inverse_transform(th))
        if on_sample is not None:
            on_sample(SimState(t, oh, th))

    k1 = stepper.rhs(oh, th)
    rec.accumulate(oh, th, k1[1], None)
    take(t0)
    for i in range(nsteps):
        oh, th = stepper.advance(oh, th, k1)
        t = t0 + (i + 1) * dt
        _guard(t, omega=float(np.max(np.abs(oh))) * grid.n, theta=float(np.max(np.abs(th))) * grid.n)
        k1 = stepper.rhs(oh, th)
        rec.accumulate(oh, th, k1[1], dt)
        if (i + 1) % sample_every == 0 or i + 1 == nsteps:
            take(t)
    traj = Trajectory(
        np.array(times),
        np.array(oms) if keep_fields else np.empty((0,) + grid.shape),
        np.array(ths) if keep_fields else np.empty((0,) + grid.shape),
        dt,
        stepper.max_divergence,
        nsteps,
    )
    return RunResult(traj, rec.energy, rec.gam)


def gamma_residual(
    traj: Trajectory,
    params: BoussinesqParams,
    t: float,
    part: DyadicPartition = _DEFAULT,
) -> float:
    """Relative residual of the evolution equation for ``Gamma`` at sample time ``t``.

    The terms ``d_t Gamma`` (central difference of neighbouring samples),
    ``u . grad Gamma``, ``|D|^alpha Gamma``, ``[R_alpha, u . grad] theta``
    and ``|D|^beta R_alpha theta`` are assembled; the result is the L^2 norm
    of their signed sum over the largest individual term norm.
    """
    times = traj.times
    idx = np.flatnonzero(np.isclose(times, t, rtol=0, atol=1e-12 * max(1.0, abs(t))))
    if idx.size == 0:
        raise ValueError(f"t={t} is not a sample time")
    i = int(idx[0])
    if i == 0 or i == len(times) - 1:
        raise ValueError(f"t={t} lies on the trajectory boundary; no central difference")
    h1, h2 = times[i] - times[i - 1], times[i + 1] - times[i]
    if not math.isclose(h1, h2, rel_tol=1e-9):
        raise ValueError("central difference needs equally spaced neighbouring samples")
    states = [traj.state(j) for j in (i - 1, i, i + 1)]
    gh = [gamma_hat(s, params) for s in states]
    dgam = (gh[2] - gh[0]) / (times[i + 1] - times[i - 1])
    s = states[1]
    grid = s.grid
    u1h, u2h = s.u_hat
    adv = advect_hat(u1h, u2h, gh[1], True, grid)
    adv[0, 0] = 0.0
    diss = dissipation_symbol(grid, params.alpha) * gh[1]
    comm = commutator_advect_hat(u1h, u2h, s.theta_hat, params.alpha, dealias=True)
    R = symbol(MultiplierSpec.modified_riesz(params.alpha), grid)
    forcing = dissipation_symbol(grid, params.beta) * (R * s.theta_hat)
    terms = [dgam, adv, diss, -comm, -forcing]
    norms = [math.sqrt(float(np.sum(np.abs(x) ** 2))) for x in terms]
    big = max(norms)
    if big == 0.0:
        return 0.0
    res = sum(terms)
    return math.sqrt(float(np.sum(np.abs(res) ** 2))) / big


@dataclass
class TwinResult:
    times: np.ndarray
    Y: np.ndarray
    du_B0: np.ndarray
    dtheta_Bma: np.ndarray


def twin_run(
    params: BoussinesqParams,
    init,
    perturbation_scale: float,
    T: float,
    dt: float,
    part: DyadicPartition = _DEFAULT,
    perturbation: np.ndarray | None = None,
    sample_every: int = 1,
) -> TwinResult:
    """Distance between two runs whose initial temperatures differ.

    ``Y(t) = sup_{s<=t} ||du(s)||_{B^0_{2,inf}} + sup_{s<=t} ||dtheta(s)||_{B^{-alpha}_{2,inf}}``.
    The default perturbation is ``perturbation_scale * cos(2 x1)`` added to theta.
    """
    base = init if isinstance(init, SimState) else initial_state(*init)
    grid = base.grid
    if perturbation is None:
        perturbation = np.cos(2.0 * grid.x1)
    pert = SimState(base.t, base.omega_hat.copy(), base.theta_hat + perturbation_scale * forward_transform(perturbation))
    nsteps = _n_steps(dt, T)
    sa, sb = Stepper(params, grid, dt), Stepper(params, grid, dt)
    a = (base.omega_hat.copy(), base.theta_hat.copy())
    b = (pert.omega_hat, pert.theta_hat)
    su = BesovSpec(0.0, 2, math.inf)
    st = BesovSpec(-params.alpha, 2, math.inf)
    times, du, dth = [], [], []

    def record(t):
        dw = b[0] - a[0]
        d1, d2 = biot_savart(dw)
        times.append(t)
        du.append(besov_norm(np.stack([d1, d2]), su, part, spectral=True))
        dth.append(besov_norm(b[1] - a[1], st, part, spectral=True))

    record(base.t)
    for i in range(nsteps):
        a = sa.advance(*a)
        b = sb.advance(*b)
        t = base.t + (i + 1) * dt
        _guard(t, omega=float(np.max(np.abs(a[0]))) * grid.n, omega_twin=float(np.max(np.abs(b[0]))) * grid.n)
        if (i + 1) % sample_every == 0 or i + 1 == nsteps:
            record(t)
    du_a, dth_a = np.array(du), np.array(dth)
    Y = np.maximum.accumulate(du_a) + np.maximum.accumulate(dth_a)
    return TwinResult(np.array(times), Y, du_a, dth_a)
