"""Periodic-box spectral kernel: grids, transforms, Fourier multipliers, norms.

Everything downstream (potentials, the time stepper, the experiment harness)
is built on the objects in this module.  Conventions:

* Grids are uniform tensor grids on a box ``prod_j (a_j, b_j)`` with periodic
  boundary conditions and per-axis point counts that are powers of two.
* Fourier coefficients are stored in FFT order (mode index
  ``l in {0, .., N/2-1, -N/2, .., -1}`` per axis) and normalized as averages:
  ``coeff_l = (1/N_total) * sum_k values_k * exp(-i mu_l . (x_k - a))``,
  so a constant field has ``coeff_0`` equal to that constant and multiplier
  symbols are independent of the grid size.
* The wave numbers are ``(mu_l)_j = 2 pi l_j / (b_j - a_j)``; the unmatched
  Nyquist mode ``l_j = -N_j/2`` is retained with its standard wave number
  (all symbols used here are even functions of ``mu``, so this is safe).

Grids and multipliers are immutable after construction (their arrays are
marked read-only) and safe to share across threads; transforms and multiplier
applications are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.fft as _fft

__all__ = [
    "Grid",
    "SpectralField",
    "Multiplier",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "identity_multiplier",
    "free_flow",
    "phi1",
    "phi1_multiplier",
    "low_pass_filter",
    "fractional_laplacian",
    "smooth_cutoff",
    "norm",
    "band_index",
    "embed_coeffs",
    "restrict_coeffs",
]

#: Taylor-series switch point for the phi1 kernel; below this the direct
#: formula (e^z - 1)/z loses digits to cancellation.
PHI1_SERIES_THRESHOLD = 1e-4


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Grid:
    """Uniform periodic grid on a d-dimensional box (d = 1, 2 or 3).

    Nodes along axis j are ``x_k = a_j + k h_j`` with ``h_j = (b_j - a_j)/N_j``
    for ``k = 0 .. N_j - 1``; the right endpoint is excluded (periodicity).

    Attributes
    ----------
    d : int
        Spatial dimension.
    bounds : tuple of (float, float)
        Per-axis interval ``(a_j, b_j)``.
    n : tuple of int
        Per-axis point counts (even powers of two, >= 4).
    h : tuple of float
        Per-axis spacings.
    cell_volume : float
        ``prod_j h_j``.
    volume : float
        Box volume ``prod_j (b_j - a_j)``.
    mu_squared : ndarray
        ``|mu_l|^2`` on the full lattice, FFT order, shape ``n``.
    """

    __slots__ = ("d", "bounds", "n", "h", "cell_volume", "volume",
                 "axis_nodes", "axis_mu", "mu_squared", "size")

    def __init__(self, bounds: Sequence[tuple[float, float]], n: Sequence[int]):
        bounds = tuple((float(a), float(b)) for a, b in bounds)
        n = tuple(int(m) for m in n)
        d = len(bounds)
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if len(n) != d:
            raise ValueError(f"need {d} point counts, got {len(n)}")
        for j, ((a, b), m) in enumerate(zip(bounds, n)):
            if not b > a:
                raise ValueError(f"axis {j}: empty interval ({a}, {b})")
            if m % 2 != 0 or m < 4 or not _is_power_of_two(m):
                raise ValueError(
                    f"axis {j}: point count must be an even power of two >= 4, got {m}")
        self.d = d
        self.bounds = bounds
        self.n = n
        self.h = tuple((b - a) / m for (a, b), m in zip(bounds, n))
        self.cell_volume = math.prod(self.h)
        self.volume = math.prod(b - a for a, b in bounds)
        self.size = math.prod(n)
        self.axis_nodes = tuple(
            _freeze(a + hj * np.arange(m)) for (a, _), hj, m in zip(bounds, self.h, n))
        # mode index l in FFT order: 0..N/2-1, -N/2..-1
        self.axis_mu = tuple(
            _freeze(2.0 * np.pi * _fft.fftfreq(m, d=1.0) * m / (b - a))
            for (a, b), m in zip(bounds, n))
        mu2 = np.zeros(n)
        for j, mu in enumerate(self.axis_mu):
            shape = [1] * d
            shape[j] = n[j]
            mu2 = mu2 + (mu ** 2).reshape(shape)
        self.mu_squared = _freeze(mu2)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    def nodes(self) -> list[np.ndarray]:
        """Broadcastable (sparse meshgrid) node coordinate arrays."""
        return list(np.meshgrid(*self.axis_nodes, indexing="ij", sparse=True))

    def compatible(self, other: "Grid") -> bool:
        return self.bounds == other.bounds and self.n == other.n

    def __repr__(self) -> str:
        return f"Grid(bounds={self.bounds}, n={self.n})"


def make_grid(d: int,
              bounds: Union[tuple[float, float], Sequence[tuple[float, float]]],
              n: Union[int, Sequence[int]]) -> Grid:
    """Build a periodic grid; `bounds`/`n` may be scalar-like and are broadcast.

    ``make_grid(2, (-8, 8), 256)`` is the box (-8,8)^2 with 256 points per axis.
    """
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    if np.isscalar(bounds[0]):
        bounds = [tuple(bounds)] * d
    if np.isscalar(n):
        n = [n] * d
    return Grid(bounds, n)


def forward_transform(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Node samples -> Fourier coefficients (average-normalized)."""
    if values.shape != grid.shape:
        raise ValueError(f"value shape {values.shape} does not match grid {grid.shape}")
    return _fft.fftn(values) / grid.size


def inverse_transform(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Fourier coefficients -> node samples (exact inverse of the forward map)."""
    if coeffs.shape != grid.shape:
        raise ValueError(f"coeff shape {coeffs.shape} does not match grid {grid.shape}")
    return _fft.ifftn(coeffs) * grid.size


class SpectralField:
    """Complex field with lazily synchronized node samples and coefficients.

    Either representation is derivable from the other on demand; both are
    cached once computed.  Construct via :meth:`from_values` or
    :meth:`from_coeffs`.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: Grid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("need values or coeffs")
        self.grid = grid
        self._values = values
        self._coeffs = coeffs

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError(f"value shape {values.shape} does not match grid {grid.shape}")
        return cls(grid, values=values)

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "SpectralField":
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != grid.shape:
            raise ValueError(f"coeff shape {coeffs.shape} does not match grid {grid.shape}")
        return cls(grid, coeffs=coeffs)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = inverse_transform(self.grid, self._coeffs)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = forward_transform(self.grid, self._values)
        return self._coeffs

    def copy(self) -> "SpectralField":
        return SpectralField(
            self.grid,
            values=None if self._values is None else self._values.copy(),
            coeffs=None if self._coeffs is None else self._coeffs.copy(),
        )

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if not self.grid.compatible(other.grid):
            raise ValueError("grid mismatch")
        return SpectralField.from_coeffs(self.grid, self.coeffs - other.coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if not self.grid.compatible(other.grid):
            raise ValueError("grid mismatch")
        return SpectralField.from_coeffs(self.grid, self.coeffs + other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField.from_coeffs(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Multiplier:
    """Diagonal Fourier-space operator: pointwise symbol multiplication."""

    grid: Grid
    symbol: np.ndarray

    def __post_init__(self):
        if self.symbol.shape != self.grid.shape:
            raise ValueError(
                f"symbol shape {self.symbol.shape} does not match grid {self.grid.shape}")
        _freeze(self.symbol)

    def apply(self, field: SpectralField) -> SpectralField:
        if not self.grid.compatible(field.grid):
            raise ValueError("grid mismatch between multiplier and field")
        return SpectralField.from_coeffs(field.grid, self.symbol * field.coeffs)

    def compose(self, other: "Multiplier") -> "Multiplier":
        """Composition of diagonal operators = pointwise symbol product."""
        if not self.grid.compatible(other.grid):
            raise ValueError("grid mismatch between multipliers")
        return Multiplier(self.grid, self.symbol * other.symbol)

    def __call__(self, field: SpectralField) -> SpectralField:
        return self.apply(field)


def identity_multiplier(grid: Grid) -> Multiplier:
    return Multiplier(grid, np.ones(grid.shape, dtype=complex))


def free_flow(grid: Grid, t: float) -> Multiplier:
    """Free Schrodinger propagator over time t: symbol ``exp(-i t |mu|^2)``."""
    return Multiplier(grid, np.exp(-1j * t * grid.mu_squared))


def phi1(z: np.ndarray) -> np.ndarray:
    """First exponential-integrator kernel ``(e^z - 1)/z`` with ``phi1(0) = 1``.

    For ``|z| < 1e-4`` the Taylor series ``1 + z/2 + z^2/6 + z^3/24`` is used
    to avoid catastrophic cancellation in the direct formula.
    """
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < PHI1_SERIES_THRESHOLD
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.where(small, 1.0, (np.exp(zs) - 1.0) / np.where(small, 1.0, zs))
    series = 1.0 + z * (1.0 / 2.0 + z * (1.0 / 6.0 + z / 24.0))
    return np.where(small, series, direct)


def phi1_multiplier(grid: Grid, tau: float) -> Multiplier:
    """Multiplier with symbol ``phi1(-i tau |mu|^2)``; exactly 1 at mu = 0."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return Multiplier(grid, phi1(-1j * tau * grid.mu_squared))


def smooth_cutoff(r: np.ndarray) -> np.ndarray:
    """C-infinity radial cutoff: 1 on r <= 1, 0 on r >= 2, monotone between.

    The transition is the standard partition step ``S(2 - r)`` with
    ``S(t) = rho(t)/(rho(t) + rho(1 - t))`` and ``rho(t) = exp(-1/t)`` for
    t > 0 (0 otherwise).
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    if np.any(mid):
        t = 2.0 - r[mid]
        rho_t = np.exp(-1.0 / t)
        rho_1mt = np.exp(-1.0 / (1.0 - t))
        out[mid] = rho_t / (rho_t + rho_1mt)
    return out


def low_pass_filter(grid: Grid, tau: float, shape: str = "smooth") -> Multiplier:
    """Frequency cutoff keeping ``|mu| <~ tau^{-1/2}``.

    The symbol is ``chi(sqrt(tau) |mu|)`` with chi exactly 1 for
    ``sqrt(tau) |mu| <= 1`` and exactly 0 for ``sqrt(tau) |mu| >= 2``.
    ``shape="smooth"`` uses the C-infinity transition of
    :func:`smooth_cutoff`; ``shape="sharp"`` is the indicator of the unit
    ball (an experiment option -- the discrete scheme never differentiates
    the cutoff).
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    r = np.sqrt(tau * grid.mu_squared)
    if shape == "smooth":
        sym = smooth_cutoff(r)
    elif shape == "sharp":
        sym = np.where(r <= 1.0, 1.0, 0.0)
    else:
        raise ValueError(f"unknown filter shape {shape!r} (use 'smooth' or 'sharp')")
    return Multiplier(grid, sym.astype(complex))


def fractional_laplacian(grid: Grid, gamma: float) -> Multiplier:
    """Multiplier with symbol ``|mu|^{2 gamma}`` (zero mode maps to 0)."""
    sym = np.zeros(grid.shape, dtype=complex)
    nz = grid.mu_squared > 0
    sym[nz] = grid.mu_squared[nz] ** gamma
    if gamma == 0:
        sym[~nz] = 1.0
    return Multiplier(grid, sym)


def norm(field: SpectralField, kind: Union[str, float, int] = "l2") -> float:
    """Discrete norm of a field.

    ``kind`` is ``"l2"``, ``"h1"``, ``"linf"``, or a number p >= 1 for the
    grid-quadrature Lp norm ``(h sum |values|^p)^{1/p}``.  The H1 norm is
    computed spectrally as ``sqrt(|Omega| sum (1 + |mu|^2) |coeffs|^2)``,
    i.e. the L2 norm of ``(1 - Laplacian)^{1/2}`` applied to the field.
    """
    if isinstance(kind, str):
        tag = kind.lower()
        if tag == "l2":
            # use whichever representation is already cached (Parseval)
            if field._values is not None:
                return float(np.sqrt(field.grid.cell_volume
                                     * np.sum(np.abs(field._values) ** 2)))
            return float(np.sqrt(field.grid.volume * np.sum(np.abs(field.coeffs) ** 2)))
        if tag == "h1":
            w = 1.0 + field.grid.mu_squared
            return float(np.sqrt(field.grid.volume * np.sum(w * np.abs(field.coeffs) ** 2)))
        if tag == "linf":
            return float(np.max(np.abs(field.values)))
        raise ValueError(f"unknown norm kind {kind!r}")
    p = float(kind)
    if p < 1:
        raise ValueError(f"Lp norm requires p >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(field.values)))
    return float((field.grid.cell_volume * np.sum(np.abs(field.values) ** p)) ** (1.0 / p))


# -- band embedding between nested grids -------------------------------------

def band_index(n_small: Sequence[int], n_big: Sequence[int]) -> tuple[np.ndarray, ...]:
    """Per-axis index arrays locating the small grid's modes inside the big one.

    Both index sets are in FFT order; the returned tuple is suitable for
    ``np.ix_``-style fancy indexing.  Requires ``n_big[j] >= n_small[j]``.
    """
    idx = []
    for ns, nb in zip(n_small, n_big):
        if nb < ns:
            raise ValueError(f"target band {nb} smaller than source {ns}")
        idx.append(np.concatenate([np.arange(ns // 2), np.arange(nb - ns // 2, nb)]))
    return np.ix_(*idx)


def embed_coeffs(coeffs: np.ndarray, n_big: Sequence[int],
                 out: np.ndarray | None = None) -> np.ndarray:
    """Zero-pad coefficients into a larger lattice (band-limited upsampling)."""
    if out is None:
        out = np.zeros(tuple(n_big), dtype=complex)
    out[band_index(coeffs.shape, n_big)] = coeffs
    return out


def restrict_coeffs(coeffs: np.ndarray, n_small: Sequence[int]) -> np.ndarray:
    """Crop a larger lattice's coefficients to the small grid's band."""
    return coeffs[band_index(n_small, coeffs.shape)]
