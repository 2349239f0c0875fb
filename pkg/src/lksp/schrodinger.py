"""The inner complex expectation ``v(s, x)``.

``v(s, .)`` is ``f`` propagated to imaginary time ``i*s`` by the complex heat
kernel ``(2 pi i s)^(-d/2) exp(-|x-y|^2 / (2 i s))`` and multiplied by the
angle phase ``exp(i s)``.  On the Fourier side it is the unit-modulus
multiplier ``exp(i s (1 - |xi|^2 / 2))``.

Three routes are provided: the spectral multiplier (exact on the periodic
box), direct trapezoidal quadrature against the kernel (free space, needs
``|s|`` large enough for the grid to resolve the chirp), and closed forms for
Gaussian and plane-wave data.

Branch: ``(i s)^(1/2) = |s|^(1/2) exp(i pi sign(s) / 4)``.  Negative ``s`` is
always evaluated as the complex conjugate of the ``|s|`` result, which makes
``v(-s) = conj(v(s))`` hold to the last bit for real data.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .field import (
    ComplexField,
    Grid,
    ScalarField,
    SpectralField,
    dft_forward,
    k_squared,
)

__all__ = [
    "complex_heat_kernel",
    "v_multiplier",
    "v_spectral",
    "s_min",
    "v_direct_quadrature",
    "nodes_within",
    "v_gaussian_closed_form",
    "v_planewave_closed_form",
]

# |s| >= S_MIN_FACTOR * h^2 for direct quadrature
S_MIN_FACTOR = 10.0


def complex_heat_kernel(s: float, x, y, dim: int | None = None) -> np.ndarray:
    """Principal-branch ``(2 pi i s)^(-d/2) exp(-|x-y|^2 / (2 i s))``.

    ``x`` and ``y`` are points with a trailing coordinate axis (broadcast
    against each other).  ``s = 0`` is rejected: the kernel is a delta there.
    """
    s = float(s)
    if s == 0.0 or not math.isfinite(s):
        raise ValueError("complex heat kernel needs finite nonzero s")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.shape[-1] if dim is None else int(dim)
    r2 = np.sum((x - y) ** 2, axis=-1)
    a = abs(s)
    # -|x-y|^2/(2 i a) = i |x-y|^2/(2 a)
    k = (2 * np.pi * a) ** (-d / 2) * np.exp(-1j * np.pi * d / 4) * np.exp(1j * r2 / (2 * a))
    return k if s > 0 else np.conj(k)


def v_multiplier(grid: Grid, s: float) -> np.ndarray:
    """``exp(i s (1 - |xi|^2/2))`` on every mode; unit modulus."""
    phase = 1.0 - 0.5 * k_squared(grid)
    a = abs(s)
    m = np.exp(1j * a * phase)
    return m if s >= 0 else np.conj(m)


def v_spectral(f: Union[ScalarField, SpectralField], s: float) -> ComplexField:
    """Samples of ``v(s, .)`` via the Fourier multiplier.

    ``f`` may be a sampled field or its transform.  For a sampled field and
    ``s == 0`` the input values are returned unchanged.
    """
    s = float(s)
    if not math.isfinite(s):
        raise ValueError("s must be finite")
    if isinstance(f, (ScalarField, ComplexField)):
        if s == 0.0:
            return ComplexField(f.grid, f.values)
        f_hat = dft_forward(f)
    else:
        f_hat = f
    return ComplexField(f_hat.grid, np.fft.ifftn(f_hat.coeffs * v_multiplier(f_hat.grid, s)))


def s_min(grid: Grid) -> float:
    """Smallest |s| accepted by :func:`v_direct_quadrature` on ``grid``."""
    return S_MIN_FACTOR * max(grid.spacing) ** 2


def nodes_within(grid: Grid, radius: float, center=None) -> np.ndarray:
    """Multi-indices (m, dim) of nodes with ``|x - center| <= radius``."""
    c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    pts = grid.points()
    mask = np.sum((pts - c) ** 2, axis=-1) <= radius**2
    return np.argwhere(mask)


def v_direct_quadrature(
    f: ScalarField, s: float, points, chunk: int = 256
) -> np.ndarray:
    """Trapezoidal quadrature of ``exp(i s) * int f(y) p_is(x, y) dy`` in free space.

    Parameters
    ----------
    f : ScalarField
        Sampled datum; must vanish on the box faces (compact support).
    s : float
        Imaginary time, ``|s| >= s_min(f.grid)``.
    points : array_like of int, shape (m, dim)
        Grid multi-indices of the evaluation nodes.

    Returns
    -------
    ndarray of complex, shape (m,)

    Notes
    -----
    The periodic box sums over all nodes (the trapezoid rule for a periodic
    or compactly supported integrand), without periodic images: the result is
    the free-space value.  It differs from :func:`v_spectral` by the waves that
    wrap around the box, which is what limits agreement far from the support.
    """
    grid = f.grid
    s = float(s)
    if not math.isfinite(s) or abs(s) < s_min(grid):
        raise ValueError(
            f"|s| = {abs(s):.3g} below s_min = {s_min(grid):.3g}; the kernel is under-resolved, "
            "use v_spectral"
        )
    scale = float(np.max(np.abs(f.values)))
    faces = [np.take(f.values, 0, axis=j) for j in range(grid.dim)]
    if scale > 0 and max(float(np.max(np.abs(fc))) for fc in faces) > 1e-12 * scale:
        raise ValueError("direct quadrature needs f supported inside the box (nonzero boundary face)")
    idx = np.atleast_2d(np.asarray(points, dtype=int))
    if idx.shape[1] != grid.dim:
        raise ValueError(f"points must be (m, {grid.dim}) node indices")
    pts = grid.points()
    x_eval = pts[tuple(idx.T)]
    flat_f = f.values.reshape(-1)
    nz = np.nonzero(flat_f)[0]
    y = pts.reshape(-1, grid.dim)[nz]
    fy = flat_f[nz] * grid.cell_volume
    a = abs(s)
    out = np.empty(len(x_eval), dtype=complex)
    for start in range(0, len(x_eval), chunk):
        xs = x_eval[start:start + chunk]
        K = complex_heat_kernel(a, xs[:, None, :], y[None, :, :], grid.dim)
        out[start:start + chunk] = K @ fy
    out *= np.exp(1j * a)
    return out if s > 0 else np.conj(out)


def v_gaussian_closed_form(sigma: float, s: float, x, dim: int | None = None) -> np.ndarray:
    """``v`` for ``f = exp(-|x|^2/(2 sigma^2))``.

    ``exp(i s) * prod_j (sigma^2/(sigma^2 + i s))^(1/2) exp(-x_j^2 / (2 (sigma^2 + i s)))``
    with the principal square root.  ``x`` has a trailing coordinate axis.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] if dim is None else int(dim)
    s2 = float(sigma) ** 2
    a = abs(float(s))
    z = s2 + 1j * a
    val = np.exp(1j * a) * np.sqrt(s2 / z) ** d * np.exp(-np.sum(x**2, axis=-1) / (2 * z))
    return val if s >= 0 else np.conj(val)


def v_planewave_closed_form(k, s: float, x) -> np.ndarray:
    """``v`` for ``f = exp(i k.x)``: ``exp(i s (1 - |k|^2/2)) exp(i k.x)``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    x = np.asarray(x, dtype=float)
    return np.exp(1j * s * (1 - 0.5 * np.dot(k, k))) * np.exp(1j * (x @ k))
