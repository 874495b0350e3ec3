"""Fourier machinery on the periodic square [0, 2*pi)^2.

Physical fields are real ``(n, n)`` arrays indexed ``[i1, i2]`` with
``x1 = 2*pi*i1/n`` and ``x2 = 2*pi*i2/n``. Spectral fields are complex
``(n, n)`` arrays in FFT order holding the coefficients of

    g(x) = sum_k ghat(k) exp(i k.x),

so a single exponential has coefficient 1 and ``mean(g**2) == sum(|ghat|**2)``.
Lattice wavenumbers run over ``-n/2+1 .. n/2`` on each axis.

Odd symbols (derivatives, Riesz transforms, Biot-Savart) vanish on the
Nyquist lines ``|k_j| = n/2`` so that they map real data to real data.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "get_grid",
    "MultiplierSpec",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "symbol",
    "biot_savart",
    "velocity_from_vorticity",
    "divergence_hat",
    "curl_hat",
    "gradient",
    "advect",
    "dealias",
    "padded_product",
    "lp_norm",
    "is_conjugate_symmetric",
    "reflect",
]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BOUSSPEC_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def fft2(a):
    return sfft.fft2(a, workers=_workers())


def ifft2(a):
    return sfft.ifft2(a, workers=_workers())


@dataclass(frozen=True)
class Grid:
    """Uniform ``n x n`` collocation grid on the 2*pi-periodic square."""

    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n!r}")

    @property
    def length(self) -> float:
        return 2.0 * np.pi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavenumbers in FFT order, Nyquist stored as +n/2."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def k1(self) -> np.ndarray:
        return np.broadcast_to(self.k[:, None], self.shape).copy()

    @cached_property
    def k2(self) -> np.ndarray:
        return np.broadcast_to(self.k[None, :], self.shape).copy()

    @cached_property
    def k1_odd(self) -> np.ndarray:
        k = self.k1.copy()
        k[self.n // 2, :] = 0.0
        return k

    @cached_property
    def k2_odd(self) -> np.ndarray:
        k = self.k2.copy()
        k[:, self.n // 2] = 0.0
        return k

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k1**2 + self.k2**2)

    @cached_property
    def kmag2_safe(self) -> np.ndarray:
        k2 = self.k1**2 + self.k2**2
        k2[0, 0] = 1.0
        return k2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True where ``max(|k1|, |k2|) <= n/3`` (two-thirds rule)."""
        cut = self.n / 3.0
        return np.maximum(np.abs(self.k1), np.abs(self.k2)) <= cut

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        half = self.n // 2
        return (np.abs(self.k1) < half) & (np.abs(self.k2) < half)

    @cached_property
    def x1(self) -> np.ndarray:
        x = np.arange(self.n) * (2.0 * np.pi / self.n)
        return np.broadcast_to(x[:, None], self.shape).copy()

    @cached_property
    def x2(self) -> np.ndarray:
        x = np.arange(self.n) * (2.0 * np.pi / self.n)
        return np.broadcast_to(x[None, :], self.shape).copy()

    @cached_property
    def veltkamp_factor(self) -> float:
        # Rounding a coefficient to 53 - b mantissa bits makes its product with
        # any lattice wavenumber (b bits) exact.
        b = int(self.n // 2).bit_length()
        return float(2**b + 1)


@functools.lru_cache(maxsize=None)
def get_grid(n: int) -> Grid:
    return Grid(int(n))


def _grid_of(a: np.ndarray) -> Grid:
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square field(s), got shape {a.shape}")
    return get_grid(a.shape[-1])


def _check_finite(f: np.ndarray, what: str = "field") -> None:
    bad = ~np.isfinite(f)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(f"non-finite {what} value {f[idx]!r} at node {idx}")


def forward_transform(f: np.ndarray) -> np.ndarray:
    """Fourier coefficients of a real field (unit-coefficient exponentials)."""
    f = np.asarray(f, dtype=float)
    grid = _grid_of(f)
    _check_finite(f)
    return fft2(f) / grid.n**2


def inverse_transform(g: np.ndarray) -> np.ndarray:
    """Physical samples of a conjugate-symmetric coefficient array."""
    grid = _grid_of(g)
    return np.real(ifft2(g)) * grid.n**2


def reflect(g: np.ndarray) -> np.ndarray:
    """Return the array ``g(-k)`` on the lattice."""
    return np.roll(np.flip(g, axis=(-2, -1)), 1, axis=(-2, -1))


def is_conjugate_symmetric(g: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = max(float(np.max(np.abs(g))), 1e-300) if g.size else 1.0
    return bool(np.max(np.abs(g - np.conj(reflect(g)))) <= rtol * scale)


@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier multiplier ``ghat(k) -> sigma(k) ghat(k)``.

    Build instances with the class methods rather than by hand.
    """

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("fractional_power", "modified_riesz", "riesz", "derivative", "biot_savart")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        p = self.params
        if self.kind == "fractional_power":
            s = float(p["s"])
            if s < 0 and p.get("zero_mode") != "annihilate":
                raise ValueError("negative fractional power needs zero_mode='annihilate'")
        elif self.kind == "modified_riesz":
            float(p["alpha"])
        elif self.kind in ("derivative", "biot_savart"):
            if p.get("axis", p.get("component")) not in (0, 1):
                raise ValueError("axis/component must be 0 or 1")

    @classmethod
    def fractional_power(cls, s: float) -> "MultiplierSpec":
        return cls("fractional_power", {"s": float(s), "zero_mode": "annihilate"})

    @classmethod
    def modified_riesz(cls, alpha: float) -> "MultiplierSpec":
        return cls("modified_riesz", {"alpha": float(alpha)})

    @classmethod
    def riesz(cls) -> "MultiplierSpec":
        return cls("riesz", {})

    @classmethod
    def derivative(cls, axis: int) -> "MultiplierSpec":
        return cls("derivative", {"axis": axis})

    @classmethod
    def biot_savart(cls, component: int) -> "MultiplierSpec":
        return cls("biot_savart", {"component": component})


def _power(kmag: np.ndarray, s: float) -> np.ndarray:
    if s == 0:
        return np.ones_like(kmag)
    out = np.zeros_like(kmag)
    nz = kmag > 0
    out[nz] = kmag[nz] ** s
    return out


def symbol(m: MultiplierSpec, grid: Grid) -> np.ndarray:
    """Symbol array ``sigma(k)`` of a multiplier on ``grid``."""
    p = m.params
    if m.kind == "fractional_power":
        return _power(grid.kmag, p["s"]).astype(complex)
    if m.kind == "modified_riesz":
        return 1j * grid.k1_odd * _power(grid.kmag, -p["alpha"])
    if m.kind == "riesz":
        return 1j * grid.k1_odd * _power(grid.kmag, -1.0)
    if m.kind == "derivative":
        k = grid.k1_odd if p["axis"] == 0 else grid.k2_odd
        return 1j * k
    # Biot-Savart: u_hat = i (k2, -k1) / |k|^2 omega_hat
    inv = 1.0 / grid.kmag2_safe
    inv[0, 0] = 0.0
    if p["component"] == 0:
        return 1j * grid.k2_odd * inv
    return -1j * grid.k1_odd * inv


def apply_multiplier(g: np.ndarray, m: MultiplierSpec, check: bool = True) -> np.ndarray:
    grid = _grid_of(g)
    if check and not is_conjugate_symmetric(g):
        raise ValueError("input coefficients are not conjugate-symmetric")
    out = symbol(m, grid) * g
    if check:
        assert is_conjugate_symmetric(out), "multiplier broke conjugate symmetry"
    return out


def _veltkamp_round(c: np.ndarray, factor: float) -> np.ndarray:
    t = c * factor
    return t - (t - c)


def biot_savart(omega_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Velocity coefficients ``u_hat = i (k2, -k1) / |k|^2 omega_hat``.

    The common factor ``i omega_hat / |k|^2`` is rounded so that the discrete
    divergence ``k1 u1_hat + k2 u2_hat`` cancels exactly in floating point.
    The zero mode of ``omega_hat`` is ignored.
    """
    grid = _grid_of(omega_hat)
    c = 1j * omega_hat / grid.kmag2_safe
    c[..., 0, 0] = 0.0
    c = _veltkamp_round(c, grid.veltkamp_factor)
    return grid.k2_odd * c, -(grid.k1_odd * c)


def divergence_hat(u1_hat: np.ndarray, u2_hat: np.ndarray) -> np.ndarray:
    grid = _grid_of(u1_hat)
    return 1j * (grid.k1_odd * u1_hat + grid.k2_odd * u2_hat)


def curl_hat(u1_hat: np.ndarray, u2_hat: np.ndarray) -> np.ndarray:
    grid = _grid_of(u1_hat)
    return 1j * (grid.k1_odd * u2_hat - grid.k2_odd * u1_hat)


def velocity_from_vorticity(omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u1_hat, u2_hat = biot_savart(forward_transform(omega))
    return inverse_transform(u1_hat), inverse_transform(u2_hat)


def gradient(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    grid = _grid_of(f)
    fh = forward_transform(f)
    return (inverse_transform(1j * grid.k1_odd * fh), inverse_transform(1j * grid.k2_odd * fh))


def dealias(g: np.ndarray) -> np.ndarray:
    """Zero every coefficient with ``max(|k1|, |k2|) > n/3``."""
    grid = _grid_of(g)
    return np.where(grid.dealias_mask, g, 0.0)


def _same_grid(*fields: np.ndarray) -> Grid:
    shapes = {np.shape(f) for f in fields}
    if len(shapes) != 1:
        raise ValueError(f"grid mismatch between fields: {sorted(shapes)}")
    return _grid_of(np.asarray(fields[0]))


def advect(u: tuple[np.ndarray, np.ndarray], f: np.ndarray, dealias: bool = True) -> np.ndarray:
    """Pseudo-spectral ``u . grad f`` for physical fields.

    With ``dealias`` set the inputs are truncated by the two-thirds rule before
    the pointwise product and the result is truncated after it.
    """
    u1, u2 = u
    grid = _same_grid(u1, u2, f)
    u1h, u2h, fh = forward_transform(u1), forward_transform(u2), forward_transform(f)
    return inverse_transform(advect_hat(u1h, u2h, fh, dealias, grid))


def advect_hat(u1h, u2h, fh, dealias_: bool = True, grid: Grid | None = None) -> np.ndarray:
    """Spectral-in, spectral-out version of :func:`advect`."""
    grid = grid or _grid_of(fh)
    if dealias_:
        m = grid.dealias_mask
        u1h, u2h, fh = u1h * m, u2h * m, fh * m
    n2 = grid.n**2
    # pack two real fields into one complex transform
    uu = ifft2(u1h + 1j * u2h) * n2
    gg = ifft2(1j * grid.k1_odd * fh + 1j * (1j * grid.k2_odd * fh)) * n2
    prod = uu.real * gg.real + uu.imag * gg.imag
    out = fft2(prod) / n2
    if dealias_:
        out = out * grid.dealias_mask
    return out


def padded_product(fh: np.ndarray, gh: np.ndarray) -> np.ndarray:
    """Coefficients of ``f * g`` on the ``n``-lattice, free of aliasing.

    Products are formed on a grid padded by a factor two; the result is
    truncated to ``|k_j| < n/2`` (Nyquist lines dropped) so that derivatives
    and truncation commute exactly.
    """
    grid = _same_grid(fh, gh)
    n = grid.n
    m = 2 * n
    fp = _pad(fh, m)
    gp = _pad(gh, m)
    prod = (np.real(ifft2(fp)) * m**2) * (np.real(ifft2(gp)) * m**2)
    return _unpad(fft2(prod) / m**2, n)


def _lattice_index(n: int) -> np.ndarray:
    """Positions of the symmetric wavenumbers ``-n/2+1 .. n/2-1`` in FFT order."""
    k = np.arange(-(n // 2) + 1, n // 2)
    return k % n, k


def _pad(gh: np.ndarray, m: int) -> np.ndarray:
    n = gh.shape[-1]
    src, k = _lattice_index(n)
    dst = k % m
    out = np.zeros(gh.shape[:-2] + (m, m), dtype=complex)
    out[..., dst[:, None], dst[None, :]] = gh[..., src[:, None], src[None, :]]
    return out


def _unpad(gh: np.ndarray, n: int) -> np.ndarray:
    m = gh.shape[-1]
    dst, k = _lattice_index(n)
    src = k % m
    out = np.zeros(gh.shape[:-2] + (n, n), dtype=complex)
    out[..., dst[:, None], dst[None, :]] = gh[..., src[:, None], src[None, :]]
    return out


def pad_physical(f: np.ndarray, factor: int = 2) -> np.ndarray:
    """Trigonometric interpolation of a real field onto a finer grid."""
    n = f.shape[-1]
    m = factor * n
    fh = forward_transform(f)
    return np.real(ifft2(_pad(fh, m))) * m**2


def lp_norm(f: np.ndarray, p: float) -> float:
    """L^p norm under the normalized measure (mean), grid max for p = inf.

    A leading axis is treated as vector components (pointwise Euclidean norm).
    """
    f = np.asarray(f)
    a = np.sqrt(np.sum(f**2, axis=0)) if f.ndim == 3 else np.abs(f)
    if p == np.inf:
        return float(np.max(a))
    if p < 1:
        raise ValueError(f"L^p exponent must be >= 1, got {p}")
    if p == 2:
        return float(np.sqrt(np.mean(a * a)))
    return float(np.mean(a**p) ** (1.0 / p))
