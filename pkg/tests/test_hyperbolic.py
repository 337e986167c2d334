import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from fiolab import hyperbolic as H
from fiolab import weights as W
from fiolab.errors import PreconditionError, UsageError
from fiolab.grid import SampledField, forward_values, gaussian, inverse_values, make_grid
from fiolab.normest import TestFamily


@pytest.fixture(scope="module")
def line():
    return make_grid(1, 1024, 32)


def smooth_bump(x):
    r2 = np.minimum(np.sum(np.atleast_1d(x) ** 2, -1) if np.ndim(x) > 1 else np.asarray(x) ** 2, 1.0)
    with np.errstate(divide="ignore"):
        return np.where(r2 < 1, np.exp(-1.0 / (1.0 - r2 + 1e-300)), 0.0)


def test_half_wave_unitary_for_random_pairs(line):
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = SampledField(line, rng.standard_normal(line.shape) + 1j * rng.standard_normal(line.shape))
        t = rng.uniform(-4, 4)
        assert abs(H.half_wave(u, t).l2_norm() - u.l2_norm()) <= 1e-10 * u.l2_norm()


def test_half_wave_group_and_identity(line):
    u = gaussian(line, 0.5, center=[1.0], k0=[2.0])
    assert np.max(np.abs(H.half_wave(u, 0.0).values - u.values)) <= 1e-14
    lhs = H.half_wave(H.half_wave(u, 0.7), 1.6).values
    assert np.max(np.abs(lhs - H.half_wave(u, 2.3).values)) <= 1e-10
    g2 = make_grid(2, 64, 8)
    v = gaussian(g2, 0.8)
    assert np.max(np.abs(H.half_wave(H.half_wave(v, -1.1), 0.4).values - H.half_wave(v, -0.7).values)) <= 1e-10


def test_half_wave_translates_positive_frequencies(line):
    uh = forward_values(line, gaussian(line, 1.0, k0=[10.0]).values) * (line.xi[..., 0] > 0)
    u = SampledField(line, inverse_values(line, uh))
    t = 2.5
    shifted = np.exp(-(line.x_axis + t) ** 2 / 2) * np.exp(10j * (line.x_axis + t))
    assert np.max(np.abs(H.half_wave(u, t).values - shifted)) <= 1e-10


def test_dalembert_zero_velocity(line):
    f0 = SampledField.from_function(line, lambda x: np.exp(-x[..., 0] ** 2))
    for t in (0.5, 1.0, 3.7):
        u = H.cauchy_second_order(H.CauchyData.zero_velocity(f0, t))
        oracle = H.dalembert(lambda z: np.exp(-z**2), None, line.x_axis, t)
        assert np.max(np.abs(u.values - oracle)) <= 1e-9


def test_dalembert_velocity_term(line):
    f1 = SampledField.from_function(line, lambda x: np.exp(-2 * x[..., 0] ** 2))
    z = np.linspace(-40, 40, 800001)
    F = cumulative_trapezoid(np.exp(-2 * z**2), z, initial=0.0)
    t = 1.3
    u = H.cauchy_second_order(H.CauchyData(f1 * 0.0, f1, t))
    oracle = H.dalembert(lambda s: 0 * s, lambda s: np.interp(s, z, F), line.x_axis, t)
    assert np.max(np.abs(u.values - oracle)) <= 1e-6


def test_zero_frequency_bin_uses_time(line):
    const = SampledField(line, np.ones(line.shape))
    u = H.cauchy_second_order(H.CauchyData(const * 0.0, const, 1.75))
    assert np.max(np.abs(u.values - 1.75)) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_energy_conserved(n):
    g = make_grid(n, 256 if n == 1 else 64, 16 if n == 1 else 8)
    f0 = gaussian(g, 0.6, center=[0.3] * n)
    f1 = gaussian(g, 0.9, center=[-0.5] * n, k0=[1.0] * n)
    e0 = H.energy(H.CauchyData(f0, f1, 0.0))
    for t in (0.4, 1.9, -3.0):
        assert H.energy(H.CauchyData(f0, f1, t)) == pytest.approx(e0, rel=1e-8)


def test_finite_speed_proxy():
    g = make_grid(1, 1024, 16)
    f0 = SampledField.from_function(g, lambda x: smooth_bump(x[..., 0]))
    u = H.cauchy_second_order(H.CauchyData.zero_velocity(f0, 2.0))
    assert H.outside_mass_fraction(u, 3.2) <= 1e-6


def test_cauchy_data_validation(line):
    f = gaussian(line)
    with pytest.raises(UsageError):
        H.CauchyData(f, gaussian(make_grid(1, 512, 32)), 1.0)
    with pytest.raises(UsageError):
        H.CauchyData(f, f, 4.5)
    assert H.CauchyData(f, f, 4.5, t_max=5.0).t == 4.5
    with pytest.raises(UsageError):
        H.cauchy_second_order(H.CauchyData.zero_velocity(gaussian(make_grid(3, 8, 2)), 1.0))


def test_loss_exponent():
    assert H.loss_exponent(1, 4.0) == 0
    assert H.loss_exponent(2, 2.0) == 0
    assert H.loss_exponent(2, 4.0) == pytest.approx(0.25)
    assert H.loss_exponent(3, 1.5) == pytest.approx(2 * (1 / 1.5 - 0.5))


def test_bessel_potential_of_plane_wave(line):
    k = 3 * line.dual_spacing
    u = SampledField.from_function(line, lambda x: np.exp(1j * k * x[..., 0]))
    v = H.bessel_potential(u, 1.5)
    assert np.max(np.abs(v.values - (1 + k * k) ** 0.75 * u.values)) <= 1e-12


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_sobolev_sweep_one_dimension_stable(p):
    fam = TestFamily({"gaussian_bumps": 3, "f_mu": 1}, mu_values=(1.0,))
    rep = H.sobolev_loss_sweep(p, 0.5, 1.0, fam, n=1)
    assert rep.loss == 0 and rep.verdict == "stable"


def test_sobolev_sweep_two_dimensions_p2_stable():
    fam = TestFamily({"gaussian_bumps": 3, "f_mu": 1}, mu_values=(1.0,))
    rep = H.sobolev_loss_sweep(2.0, 0.0, 1.0, fam, n=2, N_list=(32, 64, 128))
    assert rep.loss == 0 and rep.verdict == "stable"


@pytest.mark.slow
def test_sobolev_loss_direction_two_dimensions_p4():
    fam = TestFamily({"f_mu": 1}, mu_values=(1.0,))
    kw = dict(n=2, N_list=(64, 128, 256, 512), L=8.0, velocity=False)
    shifted = H.sobolev_loss_sweep(4.0, 0.0, 1.0, fam, shifted=True, **kw)
    plain = H.sobolev_loss_sweep(4.0, 0.0, 1.0, fam, shifted=False, **kw)
    assert shifted.loss == pytest.approx(0.25)
    assert shifted.verdict == "stable" and shifted.exponent <= 0
    assert plain.exponent >= 0.1 and plain.exponent > shifted.exponent + 0.1


def _local_builder(g):
    return H.CauchyData(gaussian(g, 0.7, center=[0.2] * g.n), gaussian(g, 0.5) * 0.5, 1.0)


@pytest.mark.parametrize("weight", [None, W.power_weight(-0.5)])
def test_weighted_local_estimate_stable(weight):
    grids = [make_grid(2, N, 8) for N in (32, 64, 128)]
    rep = H.weighted_local_estimate(_local_builder, weight, 2.0, 0.0, grids=grids)
    assert rep.loss == 1.5 and rep.verdict == "stable"
    assert all(np.isfinite(rep.ratios)) and max(rep.ratios) <= 1.0


def test_weighted_local_estimate_preconditions(line):
    f = gaussian(line)
    with pytest.raises(PreconditionError):
        H.weighted_local_estimate(H.CauchyData.zero_velocity(f, 0.0), None, 2.0, 0.0)
    with pytest.raises(UsageError):
        H.weighted_local_estimate(_local_builder, None, 2.0, 0.0)
    single = H.weighted_local_estimate(H.CauchyData.zero_velocity(f, 1.0), None, 2.0, 0.0)
    assert single.verdict == "single"


def test_default_cutoff_profile():
    chi = H.default_cutoff(3.0)
    x = np.array([[0.0], [1.5], [2.9], [3.0], [5.0]])
    assert np.allclose(chi(x)[:2], 1.0) and np.allclose(chi(x)[3:], 0.0) and 0 < chi(x)[2] < 1


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the unshifted ratio grows like N^0.13, about 1.1 per doubling, which the "
                                       "fixed 1.5 / 2.0 verdict thresholds classify as stable")
def test_sobolev_unshifted_verdict_is_growing():
    fam = TestFamily({"f_mu": 1}, mu_values=(1.0,))
    plain = H.sobolev_loss_sweep(4.0, 0.0, 1.0, fam, n=2, N_list=(64, 128, 256, 512), L=8.0, shifted=False,
                                 velocity=False)
    assert plain.verdict == "growing"
