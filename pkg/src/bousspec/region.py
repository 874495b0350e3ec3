"""Admissible exponent region for the dissipation orders ``(alpha, beta)``.

Membership uses exact floating-point comparisons. The ``alpha`` interval is
open at both ends, the lower ``beta`` bound ``1 - alpha`` is open and the
upper ``beta`` bound is closed. Margins are signed so that positive means
strictly inside; callers apply their own tolerance if they want one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "SQRT6",
    "ALPHA_MIN",
    "R0",
    "B1_SLOPE",
    "RegionError",
    "RegionQuery",
    "RegionVerdict",
    "beta_bounds",
    "pi_contains",
    "pi_r_alpha_min",
    "pi_r_beta_bounds",
    "pi_r_contains",
    "r0",
    "sigma_sup",
    "p_inf",
]

SQRT6 = math.sqrt(6.0)
ALPHA_MIN = (6.0 - SQRT6) / 4.0
R0 = (8.0 + 2.0 * SQRT6) / 5.0
B1_SLOPE = (7.0 + 2.0 * SQRT6) / 5.0


class RegionError(ValueError):
    """Query outside the domain where a bound is defined."""


@dataclass(frozen=True)
class RegionQuery:
    alpha: float
    beta: float
    r: float | None = None
    p: float | None = None
    sigma: float | None = None


@dataclass(frozen=True)
class RegionVerdict:
    """Membership answer with signed margins to every constraint."""

    inside: bool
    margins: dict = field(default_factory=dict)
    binding: str = ""

    def to_dict(self) -> dict:
        return {"inside": self.inside, "margins": dict(self.margins), "binding": self.binding}


def beta_bounds(alpha: float) -> dict[str, float]:
    """The three upper bounds on ``beta``: ``b1``, ``b2``, ``b3``."""
    den = SQRT6 - 2.0 * alpha
    b2 = alpha * (1.0 - alpha) / den if den != 0 else math.inf
    return {"b1": B1_SLOPE * alpha - 2.0, "b2": b2, "b3": 2.0 - 2.0 * alpha}


def _verdict(alpha: float, beta: float, alpha_lo: float, bounds: dict[str, float]) -> RegionVerdict:
    binding = min(bounds, key=bounds.get)
    upper = bounds[binding]
    margins = {
        "alpha_lower": alpha - alpha_lo,
        "alpha_upper": 1.0 - alpha,
        "beta_lower": beta - (1.0 - alpha),
    }
    margins.update({name: b - beta for name, b in bounds.items()})
    inside = alpha_lo < alpha < 1.0 and 1.0 - alpha < beta and beta <= upper
    return RegionVerdict(bool(inside), margins, binding)


def pi_contains(q: RegionQuery) -> RegionVerdict:
    """Membership in the main region."""
    return _verdict(q.alpha, q.beta, ALPHA_MIN, beta_bounds(q.alpha))


def _check_r(r: float | None) -> float:
    if r is None or not (2.0 <= r < 4.0):
        raise RegionError(f"r must lie in [2, 4), got {r}")
    return float(r)


def pi_r_alpha_min(r: float) -> float:
    r = _check_r(r)
    return (9.0 * r - 12.0) / (8.0 * r - 8.0)


def pi_r_beta_bounds(alpha: float, r: float) -> dict[str, float]:
    """Upper ``beta`` bounds of the ``r``-dependent family."""
    r = _check_r(r)
    den = (4.0 / alpha) * (1.0 - 1.0 / r) - 2.0 if alpha != 0 else math.inf
    mid = (1.0 - alpha) / den if den != 0 else math.inf
    return {
        "b1": (5.0 * r - 4.0) / (3.0 * r - 4.0) * alpha - 2.0,
        "b2": mid,
        "b3": 2.0 - 2.0 * alpha,
    }


def pi_r_contains(q: RegionQuery) -> RegionVerdict:
    """Membership in the ``r``-dependent family (``r`` taken from the query)."""
    r = _check_r(q.r)
    return _verdict(q.alpha, q.beta, pi_r_alpha_min(r), pi_r_beta_bounds(q.alpha, r))


def r0() -> float:
    """Exponent where the family's ``alpha`` threshold meets ``(2 + r)/(2r)``."""
    return R0


def sigma_sup(alpha: float, p: float) -> tuple[float, bool]:
    """Open upper end of the admissible ``sigma`` range, and whether it exceeds 1."""
    if not p > 0:
        raise RegionError(f"p must be positive, got {p}")
    den = 1.0 - alpha + 2.0 / p
    if not den > 0:
        raise RegionError(f"1 - alpha + 2/p must be positive, got {den}")
    s = alpha / den
    return s, s > 1.0


def p_inf(alpha: float, beta: float) -> float:
    """Open lower end ``2/(alpha + beta - 1)`` of the admissible ``p`` range."""
    gap = beta + alpha - 1.0
    if not gap > 0:
        raise RegionError(f"alpha + beta must exceed 1, got alpha={alpha}, beta={beta}")
    return 2.0 / gap
