"""Periodic grids, sampled fields and the discrete Fourier machinery.

Every solver route in the package works on a centered periodic box
``[-L/2, L/2)^d`` sampled at ``n`` points per axis.  Field values are stored as
numpy arrays of shape ``grid.shape`` in C (row-major) order, so axis 0 (x1) is
the slowest index.

Transform convention: the forward DFT is unnormalized and the inverse carries
the ``1/N`` factor (numpy's default).  Wavenumbers follow the standard DFT
ordering ``0, 1, ..., n/2-1, -n/2, ..., -1`` scaled by ``2*pi/L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "ComplexField",
    "SpectralField",
    "GridMismatchError",
    "make_grid",
    "dft_forward",
    "dft_inverse",
    "wavenumbers",
    "wavenumber_mesh",
    "k_squared",
    "apply_multiplier",
    "apply_symbol",
    "spectral_laplacian",
    "spectral_bilaplacian",
    "real_part",
    "max_abs_diff",
    "l2_norm",
    "sup_norm",
]


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box centered at the origin."""

    dim: int
    n: tuple[int, ...]
    length: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if len(self.n) != self.dim or len(self.length) != self.dim:
            raise ValueError("need one n and one length per axis")
        for n in self.n:
            if not isinstance(n, (int, np.integer)) or n < 4 or not _is_pow2(int(n)):
                raise ValueError(f"points per axis must be a power of two >= 4, got {n}")
        for L in self.length:
            if not (math.isfinite(L) and L > 0):
                raise ValueError(f"box length must be positive and finite, got {L}")

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.length, self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    def axis(self, j: int) -> np.ndarray:
        """Node coordinates along axis ``j``: ``-L/2 + i*h``."""
        return -self.length[j] / 2 + self.spacing[j] * np.arange(self.n[j])

    def coords(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinate arrays shaped for broadcasting against the grid."""
        out = []
        for j in range(self.dim):
            shape = [1] * self.dim
            shape[j] = self.n[j]
            out.append(self.axis(j).reshape(shape))
        return tuple(out)

    def points(self) -> np.ndarray:
        """All node coordinates, shape ``grid.shape + (dim,)``."""
        mesh = np.meshgrid(*[self.axis(j) for j in range(self.dim)], indexing="ij")
        return np.stack(mesh, axis=-1)

    def origin_index(self) -> tuple[int, ...]:
        """Index of the node at x = 0 (always present: n is even)."""
        return tuple(n // 2 for n in self.n)


def make_grid(dim: int, n_per_axis, lengths) -> Grid:
    """Build a validated :class:`Grid`.

    Scalars for ``n_per_axis`` or ``lengths`` are broadcast to every axis.
    """
    n = np.atleast_1d(n_per_axis).tolist()
    L = np.atleast_1d(np.asarray(lengths, dtype=float)).tolist()
    if len(n) == 1:
        n = n * dim
    if len(L) == 1:
        L = L * dim
    for v in n:
        if float(v) != int(v):
            raise ValueError(f"points per axis must be an integer, got {v}")
    return Grid(int(dim), tuple(int(v) for v in n), tuple(float(v) for v in L))


def _check_values(grid: Grid, values, dtype) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size != grid.size:
        raise ValueError(f"expected {grid.size} values for grid, got {arr.size}")
    arr = arr.reshape(grid.shape).astype(dtype, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    return _frozen(arr)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if np.iscomplexobj(self.values):
            raise TypeError("ScalarField holds real values; use ComplexField")
        object.__setattr__(self, "values", _check_values(self.grid, self.values, np.float64))

    def __add__(self, other):
        _same_grid(self, other)
        return _wrap(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return _wrap(self.grid, self.values - other.values)

    def __mul__(self, c):
        return _wrap(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, np.complex128))

    @property
    def real(self) -> ScalarField:
        return ScalarField(self.grid, self.values.real)

    @property
    def imag(self) -> ScalarField:
        return ScalarField(self.grid, self.values.imag)

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.conj())

    def __add__(self, other):
        _same_grid(self, other)
        return _wrap(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return _wrap(self.grid, self.values - other.values)

    def __mul__(self, c):
        return _wrap(self.grid, self.values * c)

    __rmul__ = __mul__


Field = Union[ScalarField, ComplexField]


def _wrap(grid: Grid, values: np.ndarray) -> Field:
    if np.iscomplexobj(values):
        return ComplexField(grid, values)
    return ScalarField(grid, values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """DFT coefficients on ``grid`` in standard (unshifted) ordering."""

    grid: Grid
    coeffs: np.ndarray
    real_input: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_values(self.grid, self.coeffs, np.complex128))


def _same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def dft_forward(f: Field) -> SpectralField:
    """Unnormalized forward DFT over every axis."""
    return SpectralField(f.grid, np.fft.fftn(f.values), real_input=isinstance(f, ScalarField))


def dft_inverse(sf: SpectralField) -> ComplexField:
    """Inverse DFT including the 1/N factor."""
    return ComplexField(sf.grid, np.fft.ifftn(sf.coeffs))


def wavenumbers(grid: Grid) -> tuple[np.ndarray, ...]:
    """Per-axis angular wavenumbers ``2*pi*m/L`` in DFT order."""
    return tuple(
        2 * np.pi * np.fft.fftfreq(n, d=L / n) for n, L in zip(grid.n, grid.length)
    )


def wavenumber_mesh(grid: Grid) -> tuple[np.ndarray, ...]:
    """Wavenumbers shaped for broadcasting (same layout as :meth:`Grid.coords`)."""
    out = []
    for j, k in enumerate(wavenumbers(grid)):
        shape = [1] * grid.dim
        shape[j] = k.size
        out.append(k.reshape(shape))
    return tuple(out)


def k_squared(grid: Grid) -> np.ndarray:
    """|xi|^2 at every mode, full grid shape."""
    out = np.zeros(grid.shape)
    for k in wavenumber_mesh(grid):
        out = out + k * k
    return out


Multiplier = Union[np.ndarray, Callable[..., np.ndarray], complex, float]


def _evaluate_multiplier(grid: Grid, m: Multiplier) -> np.ndarray:
    if callable(m):
        vals = m(*wavenumber_mesh(grid))
    else:
        vals = m
    vals = np.broadcast_to(np.asarray(vals), grid.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("multiplier is not finite at every grid wavenumber")
    return vals


def apply_multiplier(sf: SpectralField, m: Multiplier) -> SpectralField:
    """Coefficient-wise product with ``m``.

    ``m`` is either an array over the modes, a scalar, or a callable receiving
    the per-axis wavenumbers (broadcastable arrays, one per axis).
    """
    vals = _evaluate_multiplier(sf.grid, m)
    return SpectralField(sf.grid, sf.coeffs * vals, real_input=False)


def apply_symbol(f: Field, m: Multiplier) -> ComplexField:
    """Forward transform, multiply, inverse transform."""
    return dft_inverse(apply_multiplier(dft_forward(f), m))


def spectral_laplacian(f: Field) -> ComplexField:
    return apply_symbol(f, -k_squared(f.grid))


def spectral_bilaplacian(f: Field) -> ComplexField:
    k2 = k_squared(f.grid)
    return apply_symbol(f, k2 * k2)


def real_part(f: ComplexField, tol: float = 1e-12) -> ScalarField:
    """Drop the imaginary part after checking it is roundoff.

    Raises if ``max|Im| > tol * max(1, max|f|)``.
    """
    scale = max(1.0, float(np.max(np.abs(f.values))))
    resid = float(np.max(np.abs(f.values.imag)))
    if resid > tol * scale:
        raise ValueError(f"imaginary residue {resid:.3e} exceeds {tol:.1e} x scale {scale:.3e}")
    return ScalarField(f.grid, f.values.real)


def max_abs_diff(a: Field, b: Field) -> float:
    _same_grid(a, b)
    return float(np.max(np.abs(a.values - b.values)))


def l2_norm(f: Field) -> float:
    """Discrete L2 norm, ``sqrt(h^d * sum |f|^2)``."""
    return float(np.sqrt(f.grid.cell_volume * np.sum(np.abs(f.values) ** 2)))


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))
