"""Linearized Kuramoto-Sivashinsky solver built on the imaginary-Brownian-time representation."""

from .brownian import (
    GaussHermiteRule,
    McEstimate,
    gauss_hermite_rule,
    heat_density,
    u_gauss_hermite,
    u_monte_carlo,
    u_multiplier,
    u_split_halves,
)
from .data import InitialDatum, MarginError, bump, by_name, check_fits, gaussian, holder_bump, sample, trig
from .fd import FdScheme, fd_integrate
from .field import (
    ComplexField,
    Grid,
    GridMismatchError,
    ScalarField,
    SpectralField,
    dft_forward,
    dft_inverse,
    l2_norm,
    make_grid,
    max_abs_diff,
    sup_norm,
)
from .schrodinger import (
    complex_heat_kernel,
    v_direct_quadrature,
    v_gaussian_closed_form,
    v_planewave_closed_form,
    v_spectral,
)
from .verification import (
    HolderProbeReport,
    ResidualReport,
    check_d2s_identity,
    check_ds_identity,
    check_interchange,
    check_pde_residual,
    probe_holder_blowup,
)

__version__ = "0.1.0"
