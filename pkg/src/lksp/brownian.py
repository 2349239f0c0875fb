"""Averaging ``v(s, x)`` over the Brownian time ``s ~ Normal(0, t)``.

``u(t, x) = int v(s, x) p_t(0, s) ds`` with ``p_t`` the heat density of the
one-dimensional inner Brownian motion.  Three routes:

* ``u_multiplier``: the Gaussian average of ``exp(i s a)``, ``a = 1 - |xi|^2/2``,
  is ``exp(-t a^2 / 2)``; applied mode by mode.  Exact on the periodic box.
* ``u_gauss_hermite``: substitute ``s = sqrt(2t) z`` and use a Gauss-Hermite
  rule; the two half-lines fold into ``Re v`` by conjugate symmetry.
* ``u_monte_carlo``: sample the Brownian time and average ``Re v(S, x)``.  The
  imaginary-time coordinate has no real path to sample, so the inner
  expectation is evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .field import ComplexField, Grid, ScalarField, SpectralField, dft_forward, k_squared
from .schrodinger import v_multiplier

__all__ = [
    "heat_density",
    "u_symbol",
    "u_multiplier",
    "GaussHermiteRule",
    "gauss_hermite_rule",
    "u_gauss_hermite",
    "v_at_nodes",
    "McEstimate",
    "u_monte_carlo",
    "mc_moments",
    "u_split_halves",
    "MAX_GH_ORDER",
    "MC_BLOCK",
]

MAX_GH_ORDER = 256
# samples per generator substream; fixed so results never depend on batching
MC_BLOCK = 4096


def heat_density(t: float, s):
    """``exp(-s^2/(2t)) / sqrt(2 pi t)``."""
    if not t > 0:
        raise ValueError(f"heat density needs t > 0, got {t}")
    s = np.asarray(s, dtype=float)
    return np.exp(-(s**2) / (2 * t)) / np.sqrt(2 * np.pi * t)


def u_symbol(grid: Grid, t: float) -> np.ndarray:
    """Per-mode factor ``exp(-(t/2) (1 - |xi|^2/2)^2)``."""
    a = 1.0 - 0.5 * k_squared(grid)
    return np.exp(-0.5 * t * a * a)


def _spectrum(f) -> SpectralField:
    return f if isinstance(f, SpectralField) else dft_forward(f)


def u_multiplier(f: Union[ScalarField, SpectralField], t: float) -> ScalarField:
    """Exact solution of the linearized KS problem at time ``t`` on the box.

    ``t == 0`` with a sampled field returns it unchanged.
    """
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    if t == 0 and isinstance(f, ScalarField):
        return f
    f_hat = _spectrum(f)
    u = np.fft.ifftn(f_hat.coeffs * u_symbol(f_hat.grid, t))
    scale = max(1.0, float(np.max(np.abs(u))))
    if np.max(np.abs(u.imag)) > 1e-12 * scale:
        raise ValueError("u_multiplier input is not the transform of a real field")
    return ScalarField(f_hat.grid, u.real)


@dataclass(frozen=True, eq=False)
class GaussHermiteRule:
    """Nodes/weights for ``int g(z) exp(-z^2) dz``."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, g) -> float:
        return float(np.sum(self.weights * g(self.nodes)))


def gauss_hermite_rule(order: int) -> GaussHermiteRule:
    if not (isinstance(order, (int, np.integer)) and 1 <= order <= MAX_GH_ORDER):
        raise ValueError(f"Gauss-Hermite order must be an integer in [1, {MAX_GH_ORDER}], got {order}")
    z, w = np.polynomial.hermite.hermgauss(int(order))
    # exact mirror symmetry
    z = 0.5 * (z - z[::-1])
    w = 0.5 * (w + w[::-1])
    z.setflags(write=False)
    w.setflags(write=False)
    return GaussHermiteRule(int(order), z, w)


def _brownian_times(t: float, rule: GaussHermiteRule) -> np.ndarray:
    return math.sqrt(2 * t) * rule.nodes


def _check_t(t: float) -> None:
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(
            f"t must be positive for quadrature/Monte Carlo routes, got {t} (use u_multiplier at t = 0)"
        )


def v_at_nodes(f_hat: SpectralField, s_values, block: int = 64) -> np.ndarray:
    """Stack of ``v(s_i, .)`` fields, shape ``(len(s), *grid.shape)``."""
    grid = f_hat.grid
    s_values = np.asarray(s_values, dtype=float)
    out = np.empty((s_values.size,) + grid.shape, dtype=complex)
    axes = tuple(range(1, grid.dim + 1))
    for i0 in range(0, s_values.size, block):
        ss = s_values[i0:i0 + block]
        mult = np.stack([v_multiplier(grid, s) for s in ss])
        out[i0:i0 + block] = np.fft.ifftn(f_hat.coeffs[None] * mult, axes=axes)
    return out


def u_gauss_hermite(f: Union[ScalarField, SpectralField], t: float, rule: GaussHermiteRule) -> ScalarField:
    """``(1/sqrt(pi)) sum_i w_i Re v(sqrt(2t) z_i, .)``."""
    _check_t(t)
    f_hat = _spectrum(f)
    vs = v_at_nodes(f_hat, _brownian_times(t, rule))
    u = np.tensordot(rule.weights, vs.real, axes=(0, 0)) / math.sqrt(math.pi)
    return ScalarField(f_hat.grid, u)


def u_split_halves(
    f: Union[ScalarField, SpectralField], t: float, rule: GaussHermiteRule
) -> tuple[ComplexField, ComplexField]:
    """Half-line pieces ``(int_{s<0}, int_{s>0}) v p_t ds`` from the same rule.

    A node at ``s = 0`` (odd order) is split evenly between the halves.  The
    rule is only exact for the full line, so the imaginary parts of the pieces
    are rule-dependent; their sum is real and ``u1 = conj(u2)`` exactly.
    """
    _check_t(t)
    f_hat = _spectrum(f)
    s = _brownian_times(t, rule)
    vs = v_at_nodes(f_hat, s)
    w = rule.weights / math.sqrt(math.pi)
    w_neg = np.where(s < 0, w, 0.0) + np.where(s == 0, 0.5 * w, 0.0)
    w_pos = np.where(s > 0, w, 0.0) + np.where(s == 0, 0.5 * w, 0.0)
    u1 = np.tensordot(w_neg, vs, axes=(0, 0))
    u2 = np.tensordot(w_pos, vs, axes=(0, 0))
    return ComplexField(f_hat.grid, u1), ComplexField(f_hat.grid, u2)


@dataclass(frozen=True, eq=False)
class McEstimate:
    mean: ScalarField
    std_error: ScalarField
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("McEstimate needs at least two samples")
        if np.any(self.std_error.values < 0):
            raise ValueError("standard errors must be nonnegative")


def _block_normals(seed: int, block: int, count: int) -> np.ndarray:
    # substream keyed by (seed, block index): independent of how blocks are scheduled
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss)).standard_normal(count)


def _real_v_batch(f_hat: SpectralField, s: np.ndarray) -> np.ndarray:
    """``Re v(s_k, .)`` for a batch of times, shape ``(len(s), *grid.shape)``.

    For real ``f`` the Hermitian part of ``f_hat * exp(i s a)`` is
    ``f_hat * cos(s a)``, so ``Re v`` is a real inverse transform over the
    half spectrum.
    """
    grid = f_hat.grid
    half = grid.n[-1] // 2 + 1
    a = (1.0 - 0.5 * k_squared(grid))[..., :half]
    c = f_hat.coeffs[..., :half]
    axes = tuple(range(1, grid.dim + 1))
    coeffs = c[None] * np.cos(s.reshape((-1,) + (1,) * grid.dim) * a[None])
    return np.fft.irfftn(coeffs, s=grid.shape, axes=axes)


def mc_moments(n_samples: int, seed: int, sample_fn, block_size: int = MC_BLOCK):
    """Per-point mean and unbiased variance of ``sample_fn(Z)`` over ``Z ~ N(0, 1)``.

    ``sample_fn`` maps a 1-d array of standard normals to an array of shape
    ``(len(Z), *field_shape)``.  Blocks are combined in index order with the
    pairwise (Chan) update, so the result is bit-reproducible.
    """
    if n_samples < 2:
        raise ValueError(f"need at least 2 Monte Carlo samples, got {n_samples}")
    count = 0
    mean = None
    m2 = None
    for b, start in enumerate(range(0, n_samples, block_size)):
        nb = min(block_size, n_samples - start)
        vals = sample_fn(_block_normals(seed, b, nb))
        bmean = vals.mean(axis=0)
        bm2 = ((vals - bmean) ** 2).sum(axis=0)
        if mean is None:
            mean, m2, count = bmean, bm2, nb
            continue
        tot = count + nb
        delta = bmean - mean
        mean = mean + delta * (nb / tot)
        m2 = m2 + bm2 + delta**2 * (count * nb / tot)
        count = tot
    return mean, m2 / (count - 1)


def u_monte_carlo(
    f: Union[ScalarField, SpectralField], t: float, n_samples: int, seed: int = 1,
    block_size: int = MC_BLOCK,
) -> McEstimate:
    """Monte Carlo over the Brownian time, ``S_k = sqrt(t) Z_k``.

    The same seed always yields the same ``Z_k``, so estimates at different
    ``t`` share random numbers.
    """
    _check_t(t)
    if int(n_samples) != n_samples or n_samples < 2:
        raise ValueError(f"n_samples must be an integer >= 2, got {n_samples}")
    f_hat = _spectrum(f)
    rt = math.sqrt(t)
    mean, var = mc_moments(int(n_samples), seed, lambda z: _real_v_batch(f_hat, rt * z), block_size)
    se = np.sqrt(var / n_samples)
    return McEstimate(
        mean=ScalarField(f_hat.grid, mean),
        std_error=ScalarField(f_hat.grid, se),
        n_samples=int(n_samples),
        seed=int(seed),
    )
