import math

import numpy as np
import pytest

import lksp.fd as fd
from lksp.brownian import u_multiplier
from lksp.data import bump, sample, trig
from lksp.fd import FdScheme, fd_bilaplacian, fd_integrate, fd_laplacian, max_stable_dt, spectral_radius
from lksp.field import ScalarField, make_grid, max_abs_diff


def test_laplacian_eigenvalue_on_mode():
    g = make_grid(1, 32, 2 * np.pi)
    h = g.spacing[0]
    f = sample(trig((3.0,)), g)
    lam = -(4 / h**2) * math.sin(3 * h / 2) ** 2
    assert np.max(np.abs(fd_laplacian(f).values - lam * f.values)) <= 1e-11
    assert np.max(np.abs(fd_bilaplacian(f).values - lam**2 * f.values)) <= 1e-8


def test_spectral_radius_formula():
    g = make_grid(2, 16, 8.0)
    mu = -4 * sum(1 / h**2 for h in g.spacing)
    assert spectral_radius(g) == pytest.approx((mu + 2) ** 2 / 8)
    # very coarse grid: the constant mode dominates
    assert spectral_radius(make_grid(1, 4, 1000.0)) == 0.5


def test_stability_bound_enforced():
    g = make_grid(1, 64, 20.0)
    FdScheme(g, max_stable_dt(g))
    with pytest.raises(ValueError):
        FdScheme(g, 1.01 * max_stable_dt(g))
    with pytest.raises(ValueError):
        fd_integrate(sample(bump((0.0,), 8.0), g), 1.0, dt=1.0)


def test_constant_datum_decays():
    g = make_grid(1, 32, 20.0)
    c = ScalarField(g, np.ones(g.shape))
    assert np.max(np.abs(fd_integrate(c, 1.0, 1e-3).values - math.exp(-0.5))) <= 1e-8


def test_cos_against_closed_form():
    g = make_grid(1, 256, 2 * np.pi)
    u = fd_integrate(sample(trig((1.0,)), g), 1.0)
    assert np.max(np.abs(u.values - math.exp(-1 / 8) * np.cos(g.axis(0)))) <= 1e-4


def test_dense_march_matches_step_loop(monkeypatch):
    g = make_grid(1, 64, 20.0)
    f = sample(bump((0.0,), 8.0), g)
    dense = fd_integrate(f, 0.5)
    monkeypatch.setattr(fd, "DENSE_MAX_NODES", 0)
    loop = fd_integrate(f, 0.5)
    assert max_abs_diff(dense, loop) <= 1e-13


def test_linearity():
    g = make_grid(2, 16, 12.0)
    f = sample(bump((0.0, 0.0), 4.0), g)
    x, y = g.coords()
    k = ScalarField(g, np.cos(2 * np.pi * x / 12.0) * np.sin(2 * np.pi * y / 12.0))
    lhs = fd_integrate(f * 2.0 + k * (-3.0), 0.3)
    rhs = fd_integrate(f, 0.3) * 2.0 + fd_integrate(k, 0.3) * (-3.0)
    assert max_abs_diff(lhs, rhs) <= 1e-10


def test_second_order_in_space():
    errs = []
    for n in (64, 128):
        g = make_grid(1, n, 20.0)
        f = sample(bump((0.0,), 8.0), g)
        errs.append(max_abs_diff(fd_integrate(f, 1.0), u_multiplier(f, 1.0)))
    assert 1.7 <= math.log2(errs[0] / errs[1]) <= 2.3
