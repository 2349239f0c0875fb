import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lksp.field import (
    ComplexField,
    GridMismatchError,
    ScalarField,
    apply_multiplier,
    dft_forward,
    dft_inverse,
    k_squared,
    l2_norm,
    make_grid,
    max_abs_diff,
    real_part,
    spectral_bilaplacian,
    spectral_laplacian,
    wavenumbers,
)


def brute_dft(a):
    # explicit O(N^2) sum per axis
    out = np.asarray(a, dtype=complex)
    for ax, n in enumerate(a.shape):
        j = np.arange(n)
        F = np.exp(-2j * np.pi * np.outer(j, j) / n)
        out = np.moveaxis(np.tensordot(F, np.moveaxis(out, ax, 0), axes=(1, 0)), 0, ax)
    return out


@pytest.mark.parametrize("dim,n", [(1, 16), (2, 8), (3, 4)])
def test_forward_matches_brute_force_sum(dim, n):
    g = make_grid(dim, n, 3.0)
    rng = np.random.default_rng(0)
    f = ScalarField(g, rng.standard_normal(g.shape))
    assert np.allclose(dft_forward(f).coeffs, brute_dft(f.values), atol=1e-12)


def test_grid_axis_and_origin():
    g = make_grid(1, 8, 4.0)
    assert np.allclose(g.axis(0), -2.0 + 0.5 * np.arange(8))
    assert g.axis(0)[g.origin_index()[0]] == 0.0
    assert g.points().shape == (8, 1)


@pytest.mark.parametrize("bad", [dict(dim=4, n_per_axis=8, lengths=1.0),
                                 dict(dim=1, n_per_axis=100, lengths=1.0),
                                 dict(dim=1, n_per_axis=2, lengths=1.0),
                                 dict(dim=1, n_per_axis=8, lengths=-1.0)])
def test_grid_rejects_invalid(bad):
    with pytest.raises(ValueError):
        make_grid(**bad)


def test_fields_reject_nonfinite_and_mismatch():
    g = make_grid(1, 8, 1.0)
    with pytest.raises(ValueError):
        ScalarField(g, np.full(8, np.nan))
    a = ScalarField(g, np.ones(8))
    b = ScalarField(make_grid(1, 16, 1.0), np.ones(16))
    with pytest.raises(GridMismatchError):
        a + b


def test_wavenumbers_fft_ordering():
    g = make_grid(1, 8, 2 * np.pi)
    assert np.allclose(wavenumbers(g)[0], [0, 1, 2, 3, -4, -3, -2, -1])


def test_spectral_derivatives_of_plane_wave():
    g = make_grid(2, 16, 2 * np.pi)
    x, y = g.coords()
    f = ScalarField(g, np.cos(2 * x + y))
    assert max_abs_diff(spectral_laplacian(f), ComplexField(g, -5 * f.values)) < 1e-12
    assert max_abs_diff(spectral_bilaplacian(f), ComplexField(g, 25 * f.values)) < 1e-10


def test_nonfinite_multiplier_rejected():
    g = make_grid(1, 8, 1.0)
    sf = dft_forward(ScalarField(g, np.ones(8)))
    with pytest.raises(ValueError):
        apply_multiplier(sf, np.full(8, np.inf))


def test_real_part_checks_residue():
    g = make_grid(1, 8, 1.0)
    with pytest.raises(ValueError):
        real_part(ComplexField(g, np.ones(8) * 1j))


fields_1d = st.integers(2, 6).flatmap(
    lambda p: st.lists(st.floats(-1e3, 1e3), min_size=2**p, max_size=2**p)
)


@settings(max_examples=40, deadline=None)
@given(vals=fields_1d, length=st.floats(0.1, 100.0))
def test_round_trip_and_parseval(vals, length):
    g = make_grid(1, len(vals), length)
    f = ScalarField(g, np.array(vals))
    scale = max(1.0, np.max(np.abs(f.values)))
    back = dft_inverse(dft_forward(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale
    c = dft_forward(f).coeffs
    lhs = l2_norm(f) ** 2
    rhs = g.cell_volume / g.size * np.sum(np.abs(c) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * max(lhs, 1e-300) + 1e-300


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), s1=st.floats(-5, 5), s2=st.floats(-5, 5))
def test_multiplier_composition_and_realness(seed, s1, s2):
    g = make_grid(2, 8, 5.0)
    f = ScalarField(g, np.random.default_rng(seed).standard_normal(g.shape))
    sf = dft_forward(f)
    k2 = k_squared(g)
    m1, m2 = np.exp(-s1 * s1 * k2), np.exp(1j * s2 * k2)
    twice = apply_multiplier(apply_multiplier(sf, m1), m2).coeffs
    once = apply_multiplier(sf, m1 * m2).coeffs
    assert np.max(np.abs(twice - once)) <= 1e-13 * max(1.0, np.max(np.abs(once)))
    # Hermitian multiplier keeps a real field real
    out = dft_inverse(apply_multiplier(sf, m1)).values
    assert np.max(np.abs(out.imag)) <= 1e-12 * max(1.0, np.max(np.abs(f.values)))
