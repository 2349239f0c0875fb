"""Initial data for the linearized KS problem.

Four families, each sampled on a :class:`~lksp.field.Grid`:

``bump``
    ``A*exp(-1/(1-r^2))`` with ``r = |x-c|/R``; C_c^infinity.
``gaussian``
    ``exp(-|x|^2/(2 sigma^2))``; effectively compact once the box half-length
    is at least ``8*sigma`` (boundary values below ``exp(-32)``).
``trig``
    ``cos(k.x)`` for a box-compatible wavevector; an exact Fourier mode.
``holder_bump``
    ``|x|^(2+alpha) * chi(|x|)``; second derivatives are C^{0,alpha} and no
    better at the origin.

Each datum carries ``evaluate`` (values) and ``second_derivative`` (the
diagonal Hessian entry ``D_jj f``), both vectorized over a trailing
coordinate axis of length ``dim``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .field import Grid, ScalarField

__all__ = [
    "InitialDatum",
    "MarginError",
    "bump",
    "gaussian",
    "trig",
    "holder_bump",
    "sample",
    "sample_second_derivative",
    "smooth_step",
]

# face value exp(-32) ~ 1.3e-14; tail mass beyond 8 sigma ~ 1e-15
GAUSSIAN_HALF_WIDTHS = 8.0
_COMPAT_TOL = 1e-9


class MarginError(ValueError):
    """The datum does not fit in the box with the required margin."""


@dataclass(frozen=True, eq=False)
class InitialDatum:
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    second_derivative: Callable[[np.ndarray, int], np.ndarray]
    dim: Optional[int] = None  # None: defined in any dimension
    compact_support: bool = False
    support_center: Optional[tuple[float, ...]] = None
    support_radius: Optional[float] = None
    holder_alpha: float = 1.0
    smooth: bool = True
    decay_note: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))


def _as_points(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None] if x.ndim == 1 else x


def _squeeze_like(x: np.ndarray, out: np.ndarray):
    return out[0] if np.asarray(x).ndim == 1 else out


def bump(center, radius: float, amplitude: float = 1.0) -> InitialDatum:
    """Standard mollifier ``amplitude*exp(-1/(1-r^2))``, zero for r >= 1."""
    if not radius > 0:
        raise ValueError(f"bump radius must be positive, got {radius}")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    R = float(radius)
    A = float(amplitude)

    def q_of(x):
        x = _as_points(x)
        return x, np.sum((x - c) ** 2, axis=-1) / R**2

    def evaluate(x):
        pts, q = q_of(x)
        out = np.zeros(q.shape)
        inside = q < 1
        out[inside] = A * np.exp(-1.0 / (1.0 - q[inside]))
        return _squeeze_like(x, out)

    def second_derivative(x, j=0):
        # f = A g(q), q = |x-c|^2/R^2
        pts, q = q_of(x)
        out = np.zeros(q.shape)
        inside = q < 1
        qi = q[inside]
        w = 1.0 / (1.0 - qi)
        g = np.exp(-w)
        g1 = -g * w**2
        g2 = g * (w**4 - 2 * w**3)
        dj = pts[..., j][inside] - c[j]
        out[inside] = A * (g2 * 4 * dj**2 / R**4 + g1 * 2 / R**2)
        return _squeeze_like(x, out)

    return InitialDatum(
        name="bump",
        evaluate=evaluate,
        second_derivative=second_derivative,
        dim=c.size,
        compact_support=True,
        support_center=tuple(c.tolist()),
        support_radius=R,
        holder_alpha=1.0,
        smooth=True,
        params={"center": tuple(c.tolist()), "radius": R, "amplitude": A},
    )


def gaussian(sigma: float) -> InitialDatum:
    """Unit-height centered Gaussian, ``exp(-|x|^2/(2 sigma^2))``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    s2 = float(sigma) ** 2

    def evaluate(x):
        pts = _as_points(x)
        return _squeeze_like(x, np.exp(-np.sum(pts**2, axis=-1) / (2 * s2)))

    def second_derivative(x, j=0):
        pts = _as_points(x)
        g = np.exp(-np.sum(pts**2, axis=-1) / (2 * s2))
        return _squeeze_like(x, g * (pts[..., j] ** 2 / s2**2 - 1 / s2))

    return InitialDatum(
        name="gaussian",
        evaluate=evaluate,
        second_derivative=second_derivative,
        compact_support=False,
        holder_alpha=1.0,
        smooth=True,
        decay_note=f"effectively compact: box half-length >= {GAUSSIAN_HALF_WIDTHS:g} sigma",
        params={"sigma": float(sigma)},
    )


def trig(k) -> InitialDatum:
    """Plane cosine ``cos(k.x)``; ``k`` is checked against the box at sampling."""
    kv = np.atleast_1d(np.asarray(k, dtype=float))

    def evaluate(x):
        pts = _as_points(x)
        return _squeeze_like(x, np.cos(pts @ kv))

    def second_derivative(x, j=0):
        pts = _as_points(x)
        return _squeeze_like(x, -kv[j] ** 2 * np.cos(pts @ kv))

    return InitialDatum(
        name="trig",
        evaluate=evaluate,
        second_derivative=second_derivative,
        dim=kv.size,
        compact_support=False,
        holder_alpha=1.0,
        smooth=True,
        decay_note="periodic; no decay",
        params={"k": tuple(kv.tolist())},
    )


def _phi(t):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    out = np.zeros_like(t)
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _phi_derivs(t):
    t = np.asarray(t, dtype=float)
    p = _phi(t)
    pos = t > 0
    inv = np.zeros_like(t)
    inv[pos] = 1.0 / t[pos]
    return p, p * inv**2, p * (inv**4 - 2 * inv**3)


def smooth_step(t, derivatives: bool = False):
    """C^infinity step: 0 for t <= 0, 1 for t >= 1.

    ``phi(t)/(phi(t)+phi(1-t))`` with ``phi(t) = exp(-1/t)``.  With
    ``derivatives=True`` returns ``(S, S', S'')``.
    """
    t = np.asarray(t, dtype=float)
    P, P1, P2 = _phi_derivs(t)
    Q, Q1, Q2 = _phi_derivs(1.0 - t)
    # d/dt phi(1-t) = -phi'(1-t)
    Q1 = -Q1
    D = P + Q
    S = P / D
    if not derivatives:
        return S
    N = P1 * Q - P * Q1
    S1 = N / D**2
    S2 = (P2 * Q - P * Q2) / D**2 - 2 * N * (P1 + Q1) / D**3
    return S, S1, S2


def holder_bump(alpha: float, radius: float = 1.0) -> InitialDatum:
    """``|x|^(2+alpha) chi(|x|)`` with chi = 1 on ``|x| <= radius/2``, 0 beyond ``radius``.

    The radial second derivative is ``(2+alpha)(1+alpha)|x|^alpha`` near the
    origin, so ``D_jj f`` is Hölder with exponent exactly ``alpha``.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    a = float(alpha)
    R = float(radius)

    def chi(r):
        S, S1, S2 = smooth_step((r - R / 2) / (R / 2), derivatives=True)
        return 1 - S, -S1 / (R / 2), -S2 / (R / 2) ** 2

    def evaluate(x):
        pts = _as_points(x)
        r = np.sqrt(np.sum(pts**2, axis=-1))
        c, _, _ = chi(r)
        return _squeeze_like(x, r ** (2 + a) * c)

    def second_derivative(x, j=0):
        pts = _as_points(x)
        r = np.sqrt(np.sum(pts**2, axis=-1))
        c, c1, c2 = chi(r)
        F1 = (2 + a) * r ** (1 + a) * c + r ** (2 + a) * c1
        F2 = (2 + a) * (1 + a) * r**a * c + 2 * (2 + a) * r ** (1 + a) * c1 + r ** (2 + a) * c2
        d = pts.shape[-1]
        if d == 1:
            return _squeeze_like(x, F2)
        # D_jj F(r) = F'' x_j^2/r^2 + F' (1/r - x_j^2/r^3); F'/r ~ r^a -> 0 at the origin
        xj2 = pts[..., j] ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            out = F2 * xj2 / r**2 + F1 * (1 / r - xj2 / r**3)
        out = np.where(r > 0, out, 0.0)
        return _squeeze_like(x, out)

    return InitialDatum(
        name="holder_bump",
        evaluate=evaluate,
        second_derivative=second_derivative,
        compact_support=True,
        support_center=None,
        support_radius=R,
        holder_alpha=a,
        smooth=False,
        params={"alpha": a, "radius": R},
    )


def check_fits(datum: InitialDatum, grid: Grid) -> None:
    """Raise :class:`MarginError` unless ``datum`` is admissible on ``grid``."""
    if datum.dim is not None and datum.dim != grid.dim:
        raise ValueError(f"datum {datum.name} is {datum.dim}-dimensional, grid is {grid.dim}-d")
    half = np.asarray(grid.length) / 2
    if datum.compact_support:
        c = np.zeros(grid.dim) if datum.support_center is None else np.asarray(datum.support_center)
        # support ball must lie inside the box, so the x = -L/2 face is outside it
        if np.any(np.abs(c) + datum.support_radius > half):
            raise MarginError(
                f"{datum.name}: support |x-c| < {datum.support_radius:g} around {tuple(c)} "
                f"does not fit the box half-lengths {tuple(half)}"
            )
    if datum.name == "gaussian":
        need = GAUSSIAN_HALF_WIDTHS * datum.params["sigma"]
        if np.any(half < need):
            raise MarginError(
                f"gaussian: box half-length {tuple(half)} below {GAUSSIAN_HALF_WIDTHS:g} sigma = {need:g}"
            )
    if datum.name == "trig":
        k = np.asarray(datum.params["k"])
        m = k * np.asarray(grid.length) / (2 * np.pi)
        if np.any(np.abs(m - np.rint(m)) > _COMPAT_TOL * np.maximum(1.0, np.abs(m))):
            raise ValueError(f"trig: wavevector {tuple(k)} is not a multiple of 2*pi/L on this box")
        if np.any(np.abs(np.rint(m)) >= np.asarray(grid.n) / 2):
            raise ValueError(f"trig: wavevector {tuple(k)} is at or beyond the grid Nyquist mode")


def sample(datum: InitialDatum, grid: Grid) -> ScalarField:
    """Evaluate ``datum`` at every grid node after the margin checks."""
    check_fits(datum, grid)
    vals = datum.evaluate(grid.points().reshape(-1, grid.dim))
    return ScalarField(grid, vals.reshape(grid.shape))


def sample_second_derivative(datum: InitialDatum, grid: Grid, j: int = 0) -> ScalarField:
    check_fits(datum, grid)
    vals = datum.second_derivative(grid.points().reshape(-1, grid.dim), j)
    return ScalarField(grid, vals.reshape(grid.shape))


def second_difference_slope(datum: InitialDatum, hs, x0=None, j: int = 0) -> float:
    """Log-log slope of ``|f(x0+h) - 2 f(x0) + f(x0-h)| / h^2`` against ``h``."""
    dim = datum.dim or 1
    p0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float)
    e = np.zeros(dim)
    e[j] = 1.0
    hs = np.asarray(hs, dtype=float)
    q = np.array([abs(datum(p0 + h * e) - 2 * datum(p0) + datum(p0 - h * e)) / h**2 for h in hs])
    return float(np.polyfit(np.log(hs), np.log(q), 1)[0])


def by_name(name: str, dim: int, **params) -> InitialDatum:
    """Construct a datum from a name and keyword parameters (CLI entry)."""
    if name == "bump":
        center = params.get("center", (0.0,) * dim)
        center = tuple(np.broadcast_to(np.atleast_1d(center), (dim,)).tolist())
        return bump(center, params.get("radius", 1.0), params.get("amplitude", 1.0))
    if name == "gaussian":
        return gaussian(params.get("sigma", 1.0))
    if name == "trig":
        k = params.get("k", (1.0,) * dim)
        return trig(tuple(np.broadcast_to(np.atleast_1d(k), (dim,)).tolist()))
    if name == "holder_bump":
        return holder_bump(params.get("alpha", 0.5), params.get("radius", 1.0))
    raise ValueError(f"unknown datum {name!r}; choose bump, gaussian, trig or holder_bump")
