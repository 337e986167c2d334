import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fiolab import classes as C
from fiolab import cutoffs
from fiolab import decompose as D
from fiolab.applicator import (FioOperator, adjoint, apply_decomposed, apply_fio, apply_multiplier, inner,
                               kernel_row, multiplier_of)
from fiolab.errors import ConfigurationError, UsageError
from fiolab.grid import SampledField, forward_values, gaussian, inverse_values, make_grid


def rel(a, b):
    return np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values)


def test_identity(grid1):
    u = gaussian(grid1, 1.3, center=[0.7], k0=[2.0])
    v = apply_fio(FioOperator(C.bessel_power(0), C.linear_phase(1), grid1), u)
    assert rel(v, u) <= 1e-10


def test_composition_with_dilation():
    g = make_grid(1, 256, 16)
    u = gaussian(g, 1.0, center=[0.5])
    op = FioOperator(C.bessel_power(0), C.scaling_phase(1, 2.0), g, oversample=2)
    v = apply_fio(op, u)
    exact = np.exp(-(2 * g.x_axis - 0.5) ** 2 / 2)
    assert np.max(np.abs(v.values - exact)) <= 1e-10
    assert v.l2_norm() / u.l2_norm() == pytest.approx(2**-0.5, abs=1e-10)


@pytest.mark.parametrize("phase", [C.linear_phase(1), C.wave_phase(1, 0.8), C.shifted_phase(1, 1.5)])
@pytest.mark.parametrize("m", [0.0, -2.0, 0.5])
def test_multiplier_and_dense_agree(grid1, phase, m):
    u = gaussian(grid1, 0.8, center=[-1.0])
    op = FioOperator(C.bessel_power(m), phase, grid1)
    dense = apply_fio(op, u)
    fast = apply_multiplier(multiplier_of(op), u)
    assert rel(dense, fast) <= 1e-9


def test_multiplier_identity_and_translation():
    g = make_grid(1, 1024, 32)
    u = gaussian(g, 1.0, k0=[20.0])
    assert apply_multiplier(lambda xi: np.ones(xi.shape[:-1]), u).values == pytest.approx(u.values)
    # keep the positive-frequency part exactly
    uh = forward_values(g, u.values) * (g.xi[..., 0] > 0)
    u = SampledField(g, inverse_values(g, uh))
    t = 1.75
    v = apply_multiplier(lambda xi: np.exp(1j * t * np.abs(xi[..., 0])), u)
    shifted = apply_multiplier(lambda xi: np.exp(1j * t * xi[..., 0]), u)  # u(x + t)
    assert np.max(np.abs(v.values - shifted.values)) <= 1e-12
    oracle = np.exp(-(g.x_axis + t) ** 2 / 2) * np.exp(20j * (g.x_axis + t))
    assert np.max(np.abs(v.values - oracle)) <= 1e-10
    assert v.l2_norm() == pytest.approx(u.l2_norm(), rel=1e-12)


def test_resolvent_multiplier_is_exponential_convolution():
    g = make_grid(1, 1024, 32)
    u = gaussian(g, 1.0)
    v = apply_multiplier(lambda xi: 1.0 / (1.0 + xi[..., 0] ** 2), u)
    for x in (-3.0, -0.5, 0.0, 1.25, 4.0):
        k = int(round((x + g.L) / g.spacing))
        exact = quad(lambda y: 0.5 * np.exp(-abs(x - y)) * np.exp(-y * y / 2), -40, 40, points=[x], limit=200)[0]
        assert abs(v.values[k] - exact) <= 1e-6


def test_multiplier_input_checks(grid1):
    u = gaussian(grid1)
    with pytest.raises(UsageError), np.errstate(divide="ignore"):
        apply_multiplier(lambda xi: 1.0 / xi[..., 0], u)
    with pytest.raises(UsageError):
        multiplier_of(FioOperator(C.x_modulated(0.0), C.linear_phase(1), grid1))


def test_kernel_row_low_frequency_cutoff_discrete():
    g = make_grid(1, 128, 16)
    op = FioOperator(C.cutoff_times_power(0.0, cutoff="low"), C.linear_phase(1), g)
    # the kernel depends on x - y only; its samples are the inverse transform of chi0
    profile = inverse_values(g, cutoffs.chi0(g.xi)).real
    x0 = g.x_axis[70]
    row = kernel_row(op, [x0], g.x)
    diffs = x0 - g.x_axis
    inside = np.abs(diffs) < g.L - 1e-9
    idx = np.rint((diffs[inside] + g.L) / g.spacing).astype(int)
    assert np.max(np.abs(row[inside] - profile[idx])) <= 1e-10


def test_kernel_row_low_frequency_cutoff_continuous():
    g = make_grid(1, 1024, 128)
    op = FioOperator(C.cutoff_times_power(0.0, cutoff="low"), C.linear_phase(1), g)
    x0 = 0.5
    ys = np.linspace(-6, 6, 13)
    row = kernel_row(op, [x0], ys[:, None])
    for y, k in zip(ys, row):
        exact = quad(lambda s: cutoffs.chi0(np.array([s])) * np.cos((x0 - y) * s), 0, 2,
                     epsabs=1e-14, limit=200)[0] / np.pi
        assert abs(k - exact) <= 1e-10


def test_kernel_row_truncated_identity_concentrates():
    g = make_grid(1, 64, 8)
    op = FioOperator(C.bessel_power(0), C.linear_phase(1), g)
    row = kernel_row(op, [1.0], g.x)
    k = int(np.argmax(np.abs(row)))
    assert g.x_axis[k] == pytest.approx(1.0)
    assert abs(row[k]) == pytest.approx(1 / g.spacing)


def test_quadrature_weights_cover_frequency_box(grid2):
    op = FioOperator(C.bessel_power(0), C.linear_phase(2), grid2, oversample=2)
    q = op.quad_grid
    assert op.quadrature_weights.sum() == pytest.approx((q.N * q.dual_spacing) ** 2)
    with pytest.raises(ConfigurationError):
        FioOperator(C.bessel_power(0), C.linear_phase(2), grid2, low_cut=0)


def test_decomposed_linear_phase_pieces_are_projections():
    g = make_grid(1, 128, 8)
    u = gaussian(g, 0.3)
    dp = D.littlewood_paley(g, 5, absorb_tail=True)
    op = FioOperator(C.bessel_power(0), C.linear_phase(1), g)
    total, diag, pieces = apply_decomposed(op, u, dp, return_pieces=True)
    assert rel(total, u) <= 1e-10
    for j in range(dp.count):
        proj = apply_multiplier(dp.values(j), u)
        assert np.max(np.abs(pieces[(j, -1)] - proj.values)) <= 1e-10
    assert diag.sum_error <= 1e-12


def test_single_piece_equals_operator_with_cut_amplitude():
    g = make_grid(1, 128, 8)
    u = gaussian(g, 0.3, center=[0.4])
    dp = D.littlewood_paley(g, 5, absorb_tail=True)
    a = C.bessel_power(-0.5)
    op = FioOperator(a, C.wave_phase(1), g)
    _, _, pieces = apply_decomposed(op, u, dp, return_pieces=True)
    cut = a.times(lambda x, xi: dp.piece(3, xi), x_independent=True)
    ref = apply_fio(FioOperator(cut, C.wave_phase(1), g), u)
    assert np.max(np.abs(pieces[(3, -1)] - ref.values)) <= 1e-12


def test_decomposed_matches_direct_with_cones_2d():
    g = make_grid(2, 32, 4)
    u = gaussian(g, 0.4, center=[0.3, -0.2])
    op = FioOperator(C.bessel_power(-1.5), C.wave_phase(2), g)
    J = D.max_dyadic_level(g)
    dp = D.littlewood_paley(g, J, absorb_tail=True)
    frames = {j: D.sss_frame(2.0**-j, 2) for j in range(1, J + 1)}
    out, diag = apply_decomposed(op, u, dp, frames)
    assert rel(out, apply_fio(op, u)) <= 1e-8
    assert diag.exponent < 0  # contributions decay with j for a negative-order amplitude
    assert len(diag.pieces) == 1 + sum(f.J for f in frames.values())


def test_frame_scale_mismatch_rejected(grid2):
    op = FioOperator(C.bessel_power(0), C.wave_phase(2), grid2)
    dp = D.littlewood_paley(grid2, 3, absorb_tail=True)
    with pytest.raises(ConfigurationError):
        apply_decomposed(op, gaussian(grid2), dp, {2: D.sss_frame(0.5, 2)})


def test_incomplete_partition_rejected():
    g = make_grid(1, 128, 8)
    op = FioOperator(C.bessel_power(0), C.linear_phase(1), g)
    with pytest.raises(ConfigurationError):
        apply_decomposed(op, gaussian(g), D.littlewood_paley(g, 2))


def test_adjoint_consistency(rng):
    g = make_grid(2, 16, 4)
    op = FioOperator(C.x_modulated(-0.5, "sawtooth"), C.rough_wave_phase(2, "step"), g, oversample=2)
    u = SampledField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    v = SampledField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    lhs, rhs = inner(apply_fio(op, u), v), inner(u, adjoint(op, v))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_grid_mismatch_rejected(grid1):
    op = FioOperator(C.bessel_power(0), C.linear_phase(1), grid1)
    with pytest.raises(UsageError):
        apply_fio(op, gaussian(make_grid(1, 128, 16)))


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), st.integers(0, 2**31 - 1))
def test_linearity(alpha, beta, seed):
    g = make_grid(1, 64, 8)
    r = np.random.default_rng(seed)
    op = FioOperator(C.x_modulated(0.0, "step"), C.rough_wave_phase(1, "sawtooth"), g)
    u = SampledField(g, r.standard_normal(64) + 1j * r.standard_normal(64))
    v = SampledField(g, r.standard_normal(64))
    lhs = apply_fio(op, u * alpha + v * beta).values
    rhs = alpha * apply_fio(op, u).values + beta * apply_fio(op, v).values
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale * 10
