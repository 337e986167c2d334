import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fiolab import decompose as D
from fiolab import weights as W
from fiolab.applicator import apply_multiplier
from fiolab.errors import UsageError
from fiolab.grid import SampledField, Side, gaussian, inverse_values, make_grid


@pytest.fixture(scope="module")
def fine():
    return make_grid(1, 1024, 16)


def at(grid, field, x):
    return field.values[int(np.argmin(np.abs(grid.x_axis - x)))]


def test_constant_weight_has_unit_constant(fine):
    rep = W.ap_constant(W.constant_weight(), 2, W.BallFamily.default(fine), fine)
    assert rep.value == pytest.approx(1.0, abs=1e-14)


def _quad_ap(alpha, p, center, radius):
    lo, hi = center - radius, center + radius
    pts = [0.0] if lo < 0 < hi else None

    def avg(e):
        return quad(lambda x: abs(x) ** e, lo, hi, points=pts, limit=200)[0] / (2 * radius)

    return avg(alpha) * avg(-alpha / (p - 1)) ** (p - 1)


def test_power_weight_in_class_against_quadrature(fine):
    balls = W.BallFamily.dyadic([[0.0], [0.5], [-3.0]], -6, 2)
    rep = W.ap_constant(W.power_weight(-0.5), 2, balls, fine)
    oracle = max(_quad_ap(-0.5, 2, c[0], r) for c, r in zip(balls.centers, balls.radii))
    assert oracle / 2 <= rep.value <= 2 * oracle
    origin = [v for c, r, v in rep.per_ball if c == (0.0,)]
    assert np.allclose(origin, 4.0 / 3.0, rtol=1e-10)  # scale invariance at the origin
    assert not rep.diverges()


def test_power_weight_out_of_class_diverges(fine):
    rep = W.ap_constant(W.power_weight(1.5), 2, W.BallFamily.at_origin(1), fine)
    assert rep.origin_truncated
    assert rep.diverges()


@pytest.mark.parametrize("alpha,p,n,expected", [(-0.5, 2, 1, True), (1.5, 2, 1, False), (0.0, 7.0, 3, True),
                                                (0.0, 1, 2, True), (-1.0, 2, 1, False), (1.0, 2, 1, False),
                                                (0.3, 1, 1, False), (-1.9, 3, 2, True)])
def test_power_weight_class(alpha, p, n, expected):
    assert W.power_weight_class(alpha, p, n) is expected


def test_jensen_lower_bound(fine):
    balls = W.BallFamily.dyadic([[0.0], [1.0]], -4, 2)
    for w in (W.power_weight(-0.5), W.power_weight(0.5), W.truncated_power_weight(0.9), W.log_weight(),
              W.constant_weight(3.0)):
        assert W.ap_constant(w, 2, balls, fine).value >= 1 - 1e-12
        assert W.ap_constant(w, 3, balls, fine).value >= 1 - 1e-12


def test_enlarging_family_is_monotone(fine):
    small = W.BallFamily.dyadic([[0.3]], -3, 0)
    big = small.union(W.BallFamily.dyadic([[0.0], [-2.0]], -5, 2))
    w = W.power_weight(0.7)
    assert W.ap_constant(w, 2, big, fine).value >= W.ap_constant(w, 2, small, fine).value
    u = gaussian(fine, 0.5, center=[1.0])
    assert np.all(W.maximal(u, big).values >= W.maximal(u, small).values - 1e-15)
    assert W.bmo_norm(W.log_weight(), big, fine).value >= W.bmo_norm(W.log_weight(), small, fine).value


def test_maximal_of_constant_is_constant(fine):
    u = SampledField(fine, np.ones(fine.shape))
    M = W.maximal(u, W.BallFamily.centered_dyadic(1))
    assert np.max(np.abs(M.values - 1)) <= 1e-12


def test_maximal_indicator_at_two(fine):
    u = W.cell_indicator(fine, 0.0, 1.0)
    M = W.maximal(u, W.BallFamily.all_radii(fine, 8))
    # brute force over interval radii r >= 1: the average of 1_[0,1] over [2-r, 2+r] is (r - 1)/(2r) for r <= 2
    radii = np.linspace(0.01, 8, 80001)
    overlap = np.clip(np.minimum(1.0, 2 + radii) - np.maximum(0.0, 2 - radii), 0, None)
    brute = np.max(overlap / (2 * radii))
    assert brute == pytest.approx(0.25, abs=1e-5)
    assert abs(at(fine, M, 2.0) - brute) <= fine.spacing


def test_maximal_dominates_values(fine):
    u = gaussian(fine, 0.7, center=[0.4])
    M = W.maximal(u, W.BallFamily.centered(1, [fine.spacing / 2]))
    one_cell = np.max(np.abs(np.diff(np.abs(u.values))))
    assert np.all(M.values.real >= np.abs(u.values) - one_cell)


@given(st.integers(0, 2**31 - 1))
def test_maximal_sublinear(seed):
    g = make_grid(1, 128, 8)
    r = np.random.default_rng(seed)
    u = SampledField(g, r.standard_normal(128))
    v = SampledField(g, r.standard_normal(128))
    fam = W.BallFamily.centered_dyadic(1, -3, 2).union(W.BallFamily.dyadic([[0.0], [1.5]], -2, 1))
    lhs = W.maximal(u + v, fam).values
    rhs = W.maximal(u, fam).values + W.maximal(v, fam).values
    assert np.all(lhs <= rhs + 1e-12)


def test_maximal_2d_constant():
    g = make_grid(2, 32, 4)
    M = W.maximal(SampledField(g, np.full(g.shape, 2.0)), W.BallFamily.centered(2, [0.3, 1.0]))
    assert np.max(np.abs(M.values - 2)) <= 1e-12


@pytest.mark.parametrize("box", [(-1.0, 2.5), (0.0, 1.0), (-3.3, -3.1)])
def test_smooth_average_dominated_by_maximal(box):
    g = make_grid(1, 256, 16)
    u = W.cell_indicator(g, *box)
    M = W.maximal(u, W.BallFamily.all_radii(g, 16)).values.real
    for profile in (lambda r: np.exp(-r**2), lambda r: 1.0 / (1 + r**2) ** 2, lambda r: (r < 1.5) * 1.0):
        S = W.smooth_average(u, profile).values.real
        # the additive slack covers balls wider than the largest radius in the family
        assert np.all(S <= 1.05 * M + 1e-5)


def test_maximal_errors(fine):
    u = gaussian(fine)
    with pytest.raises(UsageError):
        W.maximal(u, W.BallFamily.centered(1, []))
    with pytest.raises(UsageError):
        W.maximal(SampledField(fine, u.values, Side.FREQUENCY), W.BallFamily.centered_dyadic(1))


def test_weighted_norms(fine):
    one = SampledField(fine, np.ones(fine.shape))
    assert W.weighted_norm(one, 2) == pytest.approx(np.sqrt(32), rel=1e-14)
    u = gaussian(fine, 0.9)
    assert W.weighted_norm(u, 2, W.power_weight(0.0)) == pytest.approx(u.l2_norm(), rel=1e-12)
    ind = W.cell_indicator(fine, 0, 1)
    assert abs(W.weighted_norm(ind, 1, W.power_weight(-0.5)) - 2.0) <= 1e-3
    assert W.weighted_norm(u, np.inf) == pytest.approx(1.0)


def test_log_weight_values():
    w = W.log_weight()
    x = np.array([[0.1], [0.5], [2.0]])
    assert np.allclose(w(x), [np.log(10), 1.0, 1.0])


def test_bmo_constant_and_linear(fine):
    assert W.bmo_norm(lambda x: 0 * x[..., 0] + 3.0, W.BallFamily.default(fine), fine).value <= 1e-12
    rep = W.bmo_norm(lambda x: x[..., 0], W.BallFamily.dyadic([[0.0]], -3, 3), fine)
    for r, v in rep.trend():
        assert v == pytest.approx(r / 2, rel=1e-3)


def test_bmo_log_bounded(fine):
    # mean oscillation of log(1/|x|) on [-r, r] is 2/e for every r < 1/e
    rep = W.bmo_norm(W.log_weight(), W.BallFamily.at_origin(1, -4, 3), fine)
    trend = rep.trend(8 * fine.spacing)
    assert len(trend) >= 4
    assert max(v for _, v in trend) <= 2 / np.e + 0.01
    assert all(v == pytest.approx(2 / np.e, rel=0.05) for r, v in trend if r < 1 / np.e)


def test_bmo_rejects_infinite(fine):
    with pytest.raises(UsageError):
        W.bmo_norm(np.full(fine.shape, np.inf), W.BallFamily.at_origin(1), fine)


def test_triebel_lizorkin(fine):
    dp = D.littlewood_paley(fine, 5, absorb_tail=True)
    assert W.triebel_lizorkin_norm(SampledField(fine, np.zeros(fine.shape)), 0.5, 2, 2, None, dp) == 0
    u = gaussian(fine, 1.0, k0=[3.0])
    ratio = W.triebel_lizorkin_norm(u, 0, 2, 2, None, dp) / u.l2_norm()
    assert 1 / np.sqrt(3) <= ratio <= 1 + 1e-12


def test_triebel_lizorkin_single_annulus(fine):
    dp = D.littlewood_paley(fine, 5, absorb_tail=True)
    xi = fine.xi[..., 0]
    # spectrum inside 4 < |xi| < 8 meets the pieces j = 2 and j = 3 only
    uh = np.where((np.abs(xi) > 4.5) & (np.abs(xi) < 7.5), np.cos((np.abs(xi) - 6) * np.pi / 3) ** 4, 0)
    v = SampledField(fine, inverse_values(fine, uh))
    s, p = 0.7, 3.0
    pieces = [np.abs(apply_multiplier(dp.values(j), v).values) * 2 ** (j * s) for j in (2, 3)]
    oracle = W.weighted_norm(SampledField(fine, np.hypot(*pieces)), p)
    assert W.triebel_lizorkin_norm(v, s, p, 2, None, dp) == pytest.approx(oracle, rel=1e-12)
    lone = W.weighted_norm(SampledField(fine, pieces[1]), p)
    assert lone <= W.triebel_lizorkin_norm(v, s, p, 2, None, dp) <= lone + W.weighted_norm(
        SampledField(fine, pieces[0]), p)
    with pytest.raises(UsageError):
        W.triebel_lizorkin_norm(v, 0, 2, np.inf, None, dp)


def test_ball_family_rules():
    fam = W.BallFamily.dyadic([[0.0], [1.0]], -2, 1)
    assert len(fam) == 8 and sorted(set(fam.radii)) == [0.25, 0.5, 1.0, 2.0]
    with pytest.raises(UsageError):
        W.BallFamily.explicit([[0.0]], [-1.0])
    g = make_grid(2, 16, 4)
    assert len(W.BallFamily.default(g)) == 25 * 12
