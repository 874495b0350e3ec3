"""Initial data library: Taylor-Green vortices, single modes, seeded random fields."""

from __future__ import annotations

import math

import numpy as np

from .spectral import Grid, get_grid, inverse_transform, reflect

__all__ = [
    "PRESETS",
    "taylor_green_vorticity",
    "taylor_green_velocity",
    "single_mode",
    "random_field",
    "make_initial",
]

PRESETS = ("taylor-green", "taylor-green-plus-mode", "single-mode", "random", "zero")


def taylor_green_vorticity(grid: Grid, amplitude: float = 1.0) -> np.ndarray:
    """Vorticity of the stream function ``amplitude cos x1 cos x2``."""
    return -2.0 * amplitude * np.cos(grid.x1) * np.cos(grid.x2)


def taylor_green_velocity(grid: Grid, amplitude: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Perpendicular gradient ``(-d2 psi, d1 psi)`` of ``psi = amplitude cos x1 cos x2``."""
    c1, s1 = np.cos(grid.x1), np.sin(grid.x1)
    c2, s2 = np.cos(grid.x2), np.sin(grid.x2)
    return amplitude * c1 * s2, -amplitude * s1 * c2


def single_mode(grid: Grid, k1: int, k2: int = 0, amplitude: float = 1.0, phase: float = 0.0) -> np.ndarray:
    return amplitude * np.cos(k1 * grid.x1 + k2 * grid.x2 + phase)


def random_field(
    grid: Grid,
    seed: int,
    cutoff: int | None = None,
    l2: float = 1.0,
    slope: float = -2.0,
) -> np.ndarray:
    """Seeded band-limited field with modal variance ``|k|^slope``.

    Coefficients are drawn i.i.d. complex Gaussian on the fixed lattice
    ``max|k_j| <= cutoff`` (independent of ``n``), so the same seed gives the
    same continuous function on every grid that resolves the band. The field
    is symmetrized, made mean-free and scaled to ``l2`` under the normalized
    measure (``l2 = 0`` returns zeros).
    """
    K = grid.n // 8 if cutoff is None else int(cutoff)
    if not 1 <= K < grid.n // 2:
        raise ValueError(f"cutoff {K} must lie in [1, n/2)")
    rng = np.random.default_rng(seed)
    m = 2 * K + 1
    coef = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    ks = np.arange(-K, K + 1)
    kk = np.hypot(ks[:, None], ks[None, :])
    amp = np.zeros_like(kk)
    nz = (kk > 0) & (kk <= K)
    amp[nz] = kk[nz] ** (slope / 2.0)
    coef *= amp
    gh = np.zeros(grid.shape, dtype=complex)
    idx = ks % grid.n
    gh[idx[:, None], idx[None, :]] = coef
    gh = 0.5 * (gh + np.conj(reflect(gh)))
    gh[0, 0] = 0.0
    f = inverse_transform(gh)
    norm = math.sqrt(float(np.mean(f * f)))
    if norm == 0.0:
        return f
    return f * (l2 / norm)


def make_initial(
    name: str,
    n: int,
    seed: int = 0,
    amplitude: float = 1.0,
    mode: int = 1,
    cutoff: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(omega0, theta0)`` for a named preset."""
    grid = get_grid(n)
    zero = np.zeros(grid.shape)
    if name == "taylor-green":
        return taylor_green_vorticity(grid, amplitude), zero
    if name == "taylor-green-plus-mode":
        return taylor_green_vorticity(grid, amplitude), single_mode(grid, mode, 0, amplitude)
    if name == "single-mode":
        return zero, single_mode(grid, mode, 0, amplitude)
    if name == "random":
        om = random_field(grid, seed, cutoff, l2=amplitude)
        th = random_field(grid, seed + 100003, cutoff, l2=amplitude)
        return om, th
    if name == "zero":
        return zero, zero.copy()
    raise ValueError(f"unknown initial-data preset {name!r}; choose from {', '.join(PRESETS)}")
