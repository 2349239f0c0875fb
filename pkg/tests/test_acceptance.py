"""Acceptance criteria 1-11, one test each, one PASS/FAIL line each.

Each test records its measured values in ``RESULTS``; the conftest hook
prints them after the run.  ``python tests/test_acceptance.py`` prints the
same lines without pytest.
"""

import math

import numpy as np
import pytest

from lksp.brownian import (
    gauss_hermite_rule,
    u_gauss_hermite,
    u_monte_carlo,
    u_multiplier,
    u_symbol,
)
from lksp.data import bump, gaussian, sample, trig
from lksp.fd import fd_integrate
from lksp.field import ScalarField, make_grid, max_abs_diff, spectral_bilaplacian, spectral_laplacian, sup_norm
from lksp.schrodinger import (
    nodes_within,
    v_direct_quadrature,
    v_gaussian_closed_form,
    v_spectral,
)
from lksp.verification import (
    check_d2s_identity,
    check_ds_identity,
    check_interchange,
    check_pde_residual,
    probe_holder_blowup,
)

RESULTS = {}

L_BOX = 20.0
N_FINE = 256


def record(num, name, ok, detail):
    RESULTS[num] = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"
    return ok


def smooth_data_1d():
    g = make_grid(1, N_FINE, L_BOX)
    return {
        "bump": sample(bump((0.0,), 8.0), g),
        "gaussian": sample(gaussian(1.25), g),
        "trig": sample(trig((1.0,)), make_grid(1, N_FINE, 2 * np.pi)),
    }


def test_criterion_01_plane_wave_exactness():
    worst = 0.0
    # k = 3 would decay to 5e-14 by t = 5, under the roundoff of the other modes
    cases = [(1, 64, (1.0,)), (1, 64, (2.0,)), (2, 32, (1.0, 2.0))]
    for dim, n, k in cases:
        g = make_grid(dim, n, 2 * np.pi)
        f = sample(trig(k), g)
        kk = float(np.dot(k, k))
        # substituting e^{lam t} cos(k.x) into the PDE gives the per-mode rate
        lam = -kk * kk / 8 + kk / 2 - 0.5
        for t in (0.1, 1.0, 5.0):
            ref = math.exp(lam * t) * f.values
            rel = np.max(np.abs(u_multiplier(f, t).values - ref)) / np.max(np.abs(ref))
            worst = max(worst, rel)
    ok = worst <= 1e-12
    record(1, "plane-wave exactness", ok, f"max rel err {worst:.3e} (tol 1e-12), d in {{1,2}}, t in {{0.1,1,5}}")
    assert ok


def test_criterion_02_steady_mode():
    errs = {}
    symbol_one = True
    for dim, n, length, k in [(1, 64, 2 * math.pi * math.sqrt(2), (math.sqrt(2),)),
                              (2, 32, 2 * math.pi, (1.0, 1.0))]:
        g = make_grid(dim, n, length)
        f = sample(trig(k), g)
        m = u_symbol(g, 1.0)
        symbol_one &= bool(np.any(m == 1.0))
        for name, u in [("multiplier", u_multiplier(f, 1.0)),
                        ("gauss_hermite", u_gauss_hermite(f, 1.0, gauss_hermite_rule(64))),
                        ("monte_carlo", u_monte_carlo(f, 1.0, 10_000, seed=1).mean)]:
            errs[name] = max(errs.get(name, 0.0), max_abs_diff(u, f))
    ok = symbol_one and max(errs.values()) <= 1e-12
    detail = ", ".join(f"{k}={v:.2e}" for k, v in errs.items())
    record(2, "steady mode |k|^2=2", ok, f"{detail} (tol 1e-12); multiplier == 1 on the mode: {symbol_one}")
    assert ok


def test_criterion_03_cross_route_smooth():
    g = make_grid(1, N_FINE, L_BOX)
    f = sample(bump((0.0,), 8.0), g)
    gh = max_abs_diff(u_gauss_hermite(f, 1.0, gauss_hermite_rule(64)), u_multiplier(f, 1.0))
    idx = nodes_within(g, 2.0)
    direct = v_direct_quadrature(f, 0.5, idx)
    spectral = v_spectral(f, 0.5).values[tuple(idx.T)]
    dq = float(np.max(np.abs(direct - spectral)))
    ok = gh <= 1e-8 and dq <= 1e-6
    record(3, "cross-route agreement (bump r=8)", ok,
           f"gauss-hermite(64) vs multiplier {gh:.3e} (tol 1e-8); "
           f"direct vs spectral at s=0.5, |x|<=2: {dq:.3e} (tol 1e-6)")
    assert ok


def test_criterion_04_monte_carlo():
    g = make_grid(1, N_FINE, 2 * np.pi)
    f = sample(trig((1.0,)), g)
    ref = math.exp(-1 / 8) * np.cos(g.axis(0))
    big = u_monte_carlo(f, 1.0, 10**6, seed=1)
    z = np.abs(big.mean.values - ref) / np.maximum(big.std_error.values, 1e-300)
    coverage = float(np.mean(z <= 4))
    small = u_monte_carlo(f, 1.0, 10**4, seed=1)
    ratio = float(np.mean(small.std_error.values / big.std_error.values))
    again = u_monte_carlo(f, 1.0, 10**6, seed=1)
    same = (again.mean.values.tobytes() == big.mean.values.tobytes()
            and again.std_error.values.tobytes() == big.std_error.values.tobytes())
    ok = coverage >= 0.99 and 8 <= ratio <= 12.5 and same
    record(4, "Monte Carlo consistency", ok,
           f"within 4 se at {100 * coverage:.2f}% of nodes (min 99%); se ratio 1e4/1e6 = {ratio:.3f} "
           f"(range [8, 12.5]); byte-identical rerun: {same}")
    assert ok


def test_criterion_05_fd_oracle():
    sols, errs = {}, []
    for n in (64, 128, 256):
        g = make_grid(1, n, L_BOX)
        f = sample(bump((0.0,), 8.0), g)
        sols[n] = fd_integrate(f, 1.0).values
        errs.append(max_abs_diff(ScalarField(g, sols[n]), u_multiplier(f, 1.0)))
    # Richardson: successive differences on the shared coarse nodes
    d1 = np.max(np.abs(sols[64] - sols[128][::2]))
    d2 = np.max(np.abs(sols[128] - sols[256][::2]))
    order = math.log2(d1 / d2)
    g = make_grid(1, 64, L_BOX)
    const = fd_integrate(ScalarField(g, np.ones(g.shape)), 1.0, 1e-3)
    cerr = float(np.max(np.abs(const.values - math.exp(-0.5))))
    ok = 1.7 <= order <= 2.3 and cerr <= 1e-8
    record(5, "finite-difference oracle", ok,
           f"Richardson order {order:.3f} (range [1.7, 2.3]); errors vs multiplier "
           f"{', '.join(f'{e:.2e}' for e in errs)}; constant datum err {cerr:.2e} (tol 1e-8)")
    assert ok


def test_criterion_06_identity_suite():
    g = make_grid(1, N_FINE, L_BOX)
    parts, ok = [], True
    for name, f in [("gaussian", sample(gaussian(1.25), g)), ("bump", sample(bump((0.0,), 8.0), g))]:
        for label, check, delta, tol in [("ds", check_ds_identity, 1e-4, 1e-6),
                                         ("d2s", check_d2s_identity, 1e-3, 1e-5)]:
            r = check(f, 0.5, delta).rel_residual
            red = r / check(f, 0.5, delta / 2).rel_residual
            good = r <= tol and 3.0 <= red <= 5.0
            ok &= good
            parts.append(f"{name}/{label} {r:.2e} (tol {tol:g}, halving ratio {red:.2f}){'' if good else ' X'}")
    record(6, "identity suite", ok, "; ".join(parts))
    assert ok


def test_criterion_07_pde_residual():
    parts, ok = [], True
    rule = gauss_hermite_rule(64)
    for name, f in smooth_data_1d().items():
        for route in ("multiplier", "gauss_hermite"):
            r = check_pde_residual(f, 1.0, 1e-3, route, rule, tolerance=1e-5)
            ok &= bool(r.passed)
            parts.append(f"{name}/{route} {r.rel_residual:.2e}{'' if r.passed else ' X'}")
    record(7, "PDE residual (tol 1e-5)", ok, "; ".join(parts))
    assert ok


def test_criterion_08_interchange():
    worst = {}
    for n in (64, 128, 256):
        g = make_grid(1, n, L_BOX)
        for name, f in [("bump", sample(bump((0.0,), 8.0), g)), ("gaussian", sample(gaussian(1.25), g))]:
            worst[n] = max(worst.get(n, 0.0), check_interchange(f, 1.0, gauss_hermite_rule(64)).rel_residual)
    ok = max(worst.values()) <= 1e-10
    record(8, "interchange", ok, ", ".join(f"n={n}: {v:.2e}" for n, v in worst.items()) + " (tol 1e-10)")
    assert ok


def test_criterion_09_conjugate_symmetry():
    g = make_grid(1, N_FINE, L_BOX)
    fb = sample(bump((0.0,), 8.0), g)
    fg = sample(gaussian(1.25), g)
    idx = nodes_within(g, 4.0)
    x = g.points()
    worst = 0.0
    for s in (0.1, 1.0, 5.0):
        for f in (fb, fg):
            worst = max(worst, np.max(np.abs(v_spectral(f, -s).values - np.conj(v_spectral(f, s).values))))
            worst = max(worst, np.max(np.abs(v_direct_quadrature(f, -s, idx) - np.conj(v_direct_quadrature(f, s, idx)))))
        worst = max(worst, np.max(np.abs(v_gaussian_closed_form(1.25, -s, x) - np.conj(v_gaussian_closed_form(1.25, s, x)))))
    ok = worst <= 1e-12
    record(9, "conjugate symmetry", ok, f"max |v(-s)-conj v(s)| = {worst:.2e} over spectral, direct, closed form (tol 1e-12)")
    assert ok


def test_criterion_10_initial_condition():
    worst, exact = 0.0, True
    for f in smooth_data_1d().values():
        scale = 1 + sup_norm(f) + sup_norm(spectral_laplacian(f)) + sup_norm(spectral_bilaplacian(f))
        worst = max(worst, max_abs_diff(u_multiplier(f, 1e-6), f) / scale)
        exact &= np.array_equal(u_multiplier(f, 0.0).values, f.values)
    ok = worst <= 1e-5 and exact
    record(10, "initial-condition recovery", ok, f"t=1e-6 scaled err {worst:.2e} (tol 1e-5); t=0 exact: {exact}")
    assert ok


def test_criterion_11_holder_probe():
    parts, ok = [], True
    # below s ~ 1e-3 the cutoff's share of the window values has died out
    s_values = np.logspace(-3, -4, 9)
    for alpha in (0.5, 0.75):
        rep = probe_holder_blowup(alpha, s_values)
        good = bool(rep.passed) and rep.integral_stable
        ok &= good
        parts.append(
            f"alpha={alpha}: slope {rep.slope:.3f} (min {rep.bound_exponent - rep.margin:.3f}){'' if good else ' X'}, "
            f"resolved {rep.resolved} (doubling change {rep.doubling_change:.1e}), "
            f"integral stable {rep.integral_stable}; slope at x=0 {rep.extra['origin_slope']:.3f}"
        )
    record(11, "Hoelder probe (soft)", ok, "; ".join(parts))
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    for key in sorted(RESULTS):
        print(RESULTS[key])
