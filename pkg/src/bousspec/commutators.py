"""Commutators with the modified Riesz transform and their norm estimates.

Every estimate is checked as a bounded ratio ``lhs / sum(rhs_terms)``; the
implicit constants are fitted on calibration seeds elsewhere (see
:mod:`bousspec.calibration`). Products are formed without aliasing through
:func:`bousspec.spectral.padded_product`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .littlewood_paley import _DEFAULT, BesovSpec, DyadicPartition, besov_norm, block_norms
from .spectral import (
    MultiplierSpec,
    _grid_of,
    _same_grid,
    advect_hat,
    biot_savart,
    forward_transform,
    inverse_transform,
    lp_norm,
    pad_physical,
    padded_product,
    symbol,
)
from .transport_diffusion import DivergenceError, check_divergence

__all__ = [
    "CommutatorReport",
    "commutator_mult",
    "commutator_advect",
    "verify_est1",
    "verify_est2",
    "verify_block_commutator",
    "verify_kernel_commutator",
    "verify_power_interpolation",
    "fejer_kernel",
]

TORUS_AREA = (2.0 * math.pi) ** 2


@dataclass
class CommutatorReport:
    lhs: float
    rhs_terms: dict
    ratio: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lhs: float, rhs_terms: dict, **metadata) -> "CommutatorReport":
        total = float(sum(rhs_terms.values()))
        if lhs == 0.0:
            ratio = 0.0
        elif total == 0.0:
            ratio = math.inf
        else:
            ratio = lhs / total
        return cls(float(lhs), {k: float(v) for k, v in rhs_terms.items()}, ratio, metadata)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs_terms": self.rhs_terms, "ratio": self.ratio, "metadata": self.metadata}


def _riesz(alpha: float, grid) -> np.ndarray:
    return symbol(MultiplierSpec.modified_riesz(alpha), grid)


def _dot_grad_hat(u1h, u2h, fh) -> np.ndarray:
    """Alias-free ``u . grad f`` in spectral form."""
    grid = _grid_of(fh)
    return padded_product(u1h, 1j * grid.k1_odd * fh) + padded_product(u2h, 1j * grid.k2_odd * fh)


def commutator_mult(u: tuple[np.ndarray, np.ndarray], theta: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``R_alpha(u_j theta) - u_j R_alpha theta`` for each component ``j``."""
    grid = _same_grid(u[0], u[1], theta)
    R = _riesz(alpha, grid)
    th = forward_transform(theta)
    rth = R * th
    out = []
    for comp in u:
        uh = forward_transform(comp)
        out.append(inverse_transform(R * padded_product(uh, th) - padded_product(uh, rth)))
    return out[0], out[1]


def commutator_advect_hat(u1h, u2h, th, alpha: float, dealias: bool = False) -> np.ndarray:
    grid = _grid_of(th)
    R = _riesz(alpha, grid)
    if dealias:
        a = advect_hat(u1h, u2h, th, True, grid)
        b = advect_hat(u1h, u2h, R * th, True, grid)
        a[..., 0, 0] = 0.0
        b[..., 0, 0] = 0.0
        return R * a - b
    return R * _dot_grad_hat(u1h, u2h, th) - _dot_grad_hat(u1h, u2h, R * th)


def commutator_advect(
    u: tuple[np.ndarray, np.ndarray],
    theta: np.ndarray,
    alpha: float,
    dealias: bool = False,
) -> np.ndarray:
    """``[R_alpha, u . grad] theta`` for a divergence-free ``u``.

    With ``dealias`` set the advection is the two-thirds-rule operator used by
    the time stepper (zero mode removed), otherwise products are exact.
    """
    _same_grid(u[0], u[1], theta)
    u1h, u2h = forward_transform(u[0]), forward_transform(u[1])
    check_divergence(u1h, u2h)
    return inverse_transform(commutator_advect_hat(u1h, u2h, forward_transform(theta), alpha, dealias))


def _grad_tensor(u: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    grid = _grid_of(u[0])
    parts = []
    for comp in u:
        ch = forward_transform(comp)
        parts.append(inverse_transform(1j * grid.k1_odd * ch))
        parts.append(inverse_transform(1j * grid.k2_odd * ch))
    return np.stack(parts)


def verify_est1(
    omega: np.ndarray,
    theta: np.ndarray,
    alpha: float,
    s: float,
    part: DyadicPartition = _DEFAULT,
    **metadata,
) -> CommutatorReport:
    """``||[R_alpha, u] theta||_{H^s}`` against its three-term bound, ``u`` from ``omega``."""
    if not (0 < s < alpha):
        raise ValueError(f"s must lie in ]0, alpha[, got s={s}, alpha={alpha}")
    grid = _same_grid(omega, theta)
    oh = forward_transform(omega)
    u1h, u2h = biot_savart(oh)
    u = (inverse_transform(u1h), inverse_transform(u2h))
    c = np.stack(commutator_mult(u, theta, alpha))
    lhs = besov_norm(c, BesovSpec(s, 2, 2), part)
    th = forward_transform(theta)
    gam = inverse_transform(oh - _riesz(alpha, grid) * th)
    terms = {
        "gamma_L2*theta_B(s-a)_inf2": lp_norm(gam, 2) * besov_norm(theta, BesovSpec(s - alpha, np.inf, 2), part),
        "theta_Linf*theta_H(s+1-2a)": lp_norm(theta, np.inf) * besov_norm(theta, BesovSpec(s + 1 - 2 * alpha, 2, 2), part),
        "u_L2*theta_L2": lp_norm(np.stack(u), 2) * lp_norm(theta, 2),
    }
    return CommutatorReport.build(lhs, terms, alpha=alpha, s=s, n=grid.n, **metadata)


def verify_est2(
    u: tuple[np.ndarray, np.ndarray],
    theta: np.ndarray,
    alpha: float,
    s: float,
    p: float,
    r: float,
    part: DyadicPartition = _DEFAULT,
    **metadata,
) -> CommutatorReport:
    """``||[R_alpha, u . grad] theta||_{B^s_{p,r}}`` against ``||grad u||_p (||theta||_{B^{s+1-a}_{inf,r}} + ||theta||_p)``."""
    if not (-1 < s < alpha):
        raise ValueError(f"s must lie in ]-1, alpha[, got s={s}")
    if not (2 <= p < np.inf):
        raise ValueError(f"p must lie in [2, inf), got {p}")
    if not r >= 1:
        raise ValueError(f"r must lie in [1, inf], got {r}")
    grid = _same_grid(u[0], u[1], theta)
    gu = lp_norm(_grad_tensor(u), p)
    if gu == 0.0:
        # constant velocity commutes with every multiplier
        _same_grid(u[0], u[1], theta)
        lhs = 0.0
    else:
        lhs = besov_norm(commutator_advect(u, theta, alpha), BesovSpec(s, p, r), part)
    terms = {
        "gradu_Lp*theta_B(s+1-a)_inf_r": gu * besov_norm(theta, BesovSpec(s + 1 - alpha, np.inf, r), part),
        "gradu_Lp*theta_Lp": gu * lp_norm(theta, p),
    }
    return CommutatorReport.build(lhs, terms, alpha=alpha, s=s, p=p, r=r, n=grid.n, **metadata)


def verify_block_commutator(
    u: tuple[np.ndarray, np.ndarray],
    f: np.ndarray,
    alpha: float,
    p: float,
    part: DyadicPartition = _DEFAULT,
    **metadata,
) -> CommutatorReport:
    """``sup_q 2^{q(a-1)} ||[Delta_q, u . grad] f||_p`` against ``(||grad u||_{B^{a-1}_{p,inf}} + ||u||_2) ||f||_{B^0_{inf,inf}}``."""
    if not (0 < alpha < 1):
        raise ValueError(f"alpha must lie in ]0, 1[, got {alpha}")
    if not p >= 2:
        raise ValueError(f"p must lie in [2, inf], got {p}")
    grid = _same_grid(u[0], u[1], f)
    u1h, u2h = forward_transform(u[0]), forward_transform(u[1])
    fh = forward_transform(f)
    w = part.weights(grid)
    adv = _dot_grad_hat(u1h, u2h, fh)
    lhs = 0.0
    for i in range(w.shape[0]):
        q = i - 1
        comm = w[i] * adv - _dot_grad_hat(u1h, u2h, w[i] * fh)
        val = 2.0 ** (q * (alpha - 1)) * lp_norm(inverse_transform(comm), p)
        lhs = max(lhs, val)
    terms = {
        "gradu_B(a-1)_p_inf*f_B0_inf_inf": besov_norm(_grad_tensor(u), BesovSpec(alpha - 1, p, np.inf), part)
        * besov_norm(f, BesovSpec(0, np.inf, np.inf), part),
        "u_L2*f_B0_inf_inf": lp_norm(np.stack(u), 2) * besov_norm(f, BesovSpec(0, np.inf, np.inf), part),
    }
    return CommutatorReport.build(lhs, terms, alpha=alpha, p=p, n=grid.n, **metadata)


def fejer_kernel(grid, order: int) -> np.ndarray:
    """Tensor Fejer kernel of unit mass (Lebesgue measure on the torus)."""
    k = grid.k
    w1 = np.clip(1.0 - np.abs(k) / (order + 1.0), 0.0, None)
    hh = np.outer(w1, w1) / TORUS_AREA
    return inverse_transform(hh.astype(complex))


def _leb_norm(f: np.ndarray, p: float) -> float:
    """L^p norm under Lebesgue measure on ``[0, 2 pi)^2``."""
    if p == np.inf:
        return lp_norm(f, p)
    return TORUS_AREA ** (1.0 / p) * lp_norm(f, p)


def _dual(m: float) -> float:
    if m == np.inf:
        return 1.0
    if m == 1:
        return np.inf
    return m / (m - 1.0)


def verify_kernel_commutator(
    h: np.ndarray,
    f: np.ndarray,
    g: np.ndarray,
    m: float,
    p: float,
) -> tuple[CommutatorReport, CommutatorReport]:
    """Both forms of the convolution commutator bound for ``h * (f g) - f (h * g)``.

    Convolution is over the torus with Lebesgue measure, all norms are
    Lebesgue norms and ``|x|`` is the periodic distance ``min(|x|, 2 pi - |x|)``
    per axis. Returns the report with ``||x h||_{L^m'}`` and the one with
    ``||x h||_{L^1}``.
    """
    if not m >= p:
        raise ValueError(f"need m >= p, got m={m}, p={p}")
    grid = _same_grid(h, f, g)
    hh = TORUS_AREA * forward_transform(h)
    fh, gh = forward_transform(f), forward_transform(g)
    lhs_hat = hh * padded_product(fh, gh) - padded_product(fh, hh * gh)
    lhs = _leb_norm(inverse_transform(lhs_hat), p)
    x = np.minimum(grid.x1, 2 * math.pi - grid.x1)
    y = np.minimum(grid.x2, 2 * math.pi - grid.x2)
    xh = np.stack([x * h, y * h])
    grad_f = _grad_tensor_scalar(f)
    r1 = CommutatorReport.build(
        lhs,
        {"xh_Lm'*gradf_Lp*g_Lm": _leb_norm(xh, _dual(m)) * _leb_norm(grad_f, p) * _leb_norm(g, m)},
        variant=1, m=m, p=p, n=grid.n,
    )
    r2 = CommutatorReport.build(
        lhs,
        {"xh_L1*gradf_Linf*g_Lp": _leb_norm(xh, 1) * _leb_norm(grad_f, np.inf) * _leb_norm(g, p)},
        variant=2, m=m, p=p, n=grid.n,
    )
    return r1, r2


def _grad_tensor_scalar(f: np.ndarray) -> np.ndarray:
    grid = _grid_of(f)
    fh = forward_transform(f)
    return np.stack([inverse_transform(1j * grid.k1_odd * fh), inverse_transform(1j * grid.k2_odd * fh)])


def verify_power_interpolation(
    f: np.ndarray,
    gamma_exp: float,
    s: float,
    alpha: float,
    part: DyadicPartition = _DEFAULT,
    **metadata,
) -> CommutatorReport:
    """``|| |f|^{g-2} f ||_{H^s}`` (homogeneous) against ``||f||^{g-2}_{L^{2g/(2-a)}} ||f||_{H^{s+(1-2/g)(2-a)}}``.

    The nonlinearity is evaluated on a grid refined by two and its norm is
    taken on the refined lattice.
    """
    g = float(gamma_exp)
    if not g >= 2:
        raise ValueError(f"gamma must lie in [2, inf), got {g}")
    if not (0 < s < 1):
        raise ValueError(f"s must lie in ]0, 1[, got {s}")
    lo = -math.inf if g == 2 else (g - 4.0) / (g - 2.0)
    if not (lo < alpha < 2):
        raise ValueError(f"alpha must lie in ]{lo}, 2[, got {alpha}")
    grid = _grid_of(f)
    fine = pad_physical(f, 2)
    nl = np.abs(fine) ** (g - 2.0) * fine
    lhs = besov_norm(nl, BesovSpec(s, 2, 2, homogeneous=True), part)
    shift = (1.0 - 2.0 / g) * (2.0 - alpha)
    terms = {
        "f_L(2g/(2-a))^(g-2)*f_H(s+shift)": lp_norm(f, 2 * g / (2 - alpha)) ** (g - 2)
        * besov_norm(f, BesovSpec(s + shift, 2, 2, homogeneous=True), part)
    }
    return CommutatorReport.build(lhs, terms, gamma=g, s=s, alpha=alpha, n=grid.n, **metadata)
