import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from eulerfronts.errors import DomainError, MonotoneCausticError, SingularParameterError
from eulerfronts.exact_solution import SolutionFamily, branches
from eulerfronts.singularity import caustic, caustic_times, cusp, fold_x_range, loop_integral, shock_front

T_STAR = 2 ** (2 / 3) * 2.25


@pytest.fixture(scope="module")
def front(ref_family, ref_cusp):
    return shock_front(ref_family, (ref_cusp.t, 2 * ref_cusp.t), steps=201)


def test_caustic_time_at_unit_density(ref_family):
    assert caustic_times(ref_family, 1.0, "+")[0] == pytest.approx(4.0, rel=1e-13)
    assert caustic_times(ref_family, 1.0, "-")[0] == pytest.approx(-4.0, rel=1e-13)
    c = caustic(ref_family, "+", [1.0])
    assert c.t[0] == pytest.approx(4.0, rel=1e-14)


@pytest.mark.parametrize("branch", ["+", "-"])
def test_caustic_is_fold_locus(ref_family, branch):
    c = caustic(ref_family, branch, np.geomspace(0.05, 20, 200))
    assert c.residual(ref_family) < 1e-8
    np.testing.assert_allclose(ref_family.g(c.rho, c.t), c.x, rtol=1e-12, atol=1e-12)


def test_caustic_mirror_symmetry(ref_family):
    rho = np.geomspace(0.1, 10, 30)
    plus, minus = caustic(ref_family, "+", rho), caustic(ref_family, "-", rho)
    np.testing.assert_allclose(plus.t, -minus.t, rtol=1e-13)
    np.testing.assert_allclose(plus.x, minus.x, rtol=1e-13)


def test_caustic_general_alpha_matches_quadratic_roots(ref_curve):
    fam = SolutionFamily.from_alpha((0.4, -0.3, 1.2, 0.8), ref_curve)
    rho = np.geomspace(0.2, 5, 15)
    for br in "+-":
        c = caustic(fam, br, rho)
        np.testing.assert_allclose(caustic_times(fam, rho, br), c.t, rtol=1e-9, atol=1e-9)
        assert c.residual(fam) < 1e-8


def test_caustic_bad_branch(ref_family):
    with pytest.raises(ValueError):
        caustic(ref_family, "x")


def test_alpha3_zero_has_no_cusp(ref_curve):
    fam = SolutionFamily.from_alpha((0.0, 0.0, 1.0, 0.0), ref_curve)
    c = caustic(fam, "+", np.geomspace(0.1, 10, 20))
    assert len(c) == 0
    with pytest.raises(MonotoneCausticError):
        cusp(fam)


def test_caustic_requires_alpha2(ref_curve):
    with pytest.raises(SingularParameterError):
        caustic(SolutionFamily.from_alpha((1.0, 0.0, 0.0, 1.0), ref_curve))


def test_cusp_reference_values(ref_cusp):
    assert ref_cusp.rho == pytest.approx(0.5, abs=1e-6)
    assert ref_cusp.t == pytest.approx(T_STAR, abs=1e-6)
    assert ref_cusp.x == pytest.approx(6.378350315092791, abs=1e-6)
    assert ref_cusp.opens == "forward"


def test_cusp_against_direct_minimization(ref_family, ref_cusp):
    def t_of(log_r):
        return caustic(ref_family, "+", [np.exp(log_r)]).t[0]

    res = minimize_scalar(t_of, bracket=(np.log(0.1), np.log(0.4), np.log(3.0)), tol=1e-12)
    assert np.exp(res.x) == pytest.approx(ref_cusp.rho, abs=1e-6)
    assert res.fun == pytest.approx(ref_cusp.t, abs=1e-6)


def test_backward_cusp_on_other_branch(ref_family):
    c = cusp(ref_family, "-")
    assert c.opens == "backward"
    assert c.t == pytest.approx(-T_STAR, abs=1e-6)
    with pytest.raises(MonotoneCausticError):
        shock_front(ref_family, (-10, 0), branch="-")


def test_window_without_cusp(ref_family):
    with pytest.raises(MonotoneCausticError):
        cusp(ref_family, rho_window=(1.0, 10.0))


def test_branch_count_around_cusp(ref_family, ref_cusp):
    xs = np.linspace(ref_cusp.x - 5, ref_cusp.x + 5, 41)
    assert all(len(branches(ref_family, 0.9 * ref_cusp.t, x)) == 1 for x in xs)
    lo, hi = fold_x_range(ref_family, 1.1 * ref_cusp.t, ref_cusp)
    assert len(branches(ref_family, 1.1 * ref_cusp.t, 0.5 * (lo + hi))) == 3
    assert fold_x_range(ref_family, 0.9 * ref_cusp.t, ref_cusp) is None


def test_potential_gradients(ref_curve):
    fam = SolutionFamily.from_alpha((0.4, -0.3, 1.2, 0.8), ref_curve)
    rng = np.random.default_rng(2)
    for rho, t in zip(rng.uniform(0.3, 4, 50), rng.uniform(-4, 4, 50)):
        assert fam.H_rho(rho, t) == pytest.approx(rho * fam.g_rho(rho, t), rel=1e-8, abs=1e-8)
        assert fam.H_t(rho, t) == pytest.approx(rho * (fam.g_t(rho, t) - fam.U(rho, t)), rel=1e-8, abs=1e-8)
        h = 1e-5
        fd_r = (fam.H(rho + h, t) - fam.H(rho - h, t)) / (2 * h)
        fd_t = (fam.H(rho, t + h) - fam.H(rho, t - h)) / (2 * h)
        assert fd_r == pytest.approx(rho * fam.g_rho(rho, t), rel=1e-6, abs=1e-6)
        assert fd_t == pytest.approx(rho * (fam.g_t(rho, t) - fam.U(rho, t)), rel=1e-6, abs=1e-6)


def test_potential_mixed_partials(ref_family):
    # closedness of the mass-flux form on the surface
    h = 1e-4
    for rho, t in [(0.4, 1.0), (1.5, -2.0), (3.0, 5.0)]:
        a = (ref_family.H_rho(rho, t + h) - ref_family.H_rho(rho, t - h)) / (2 * h)
        b = (ref_family.H_t(rho + h, t) - ref_family.H_t(rho - h, t)) / (2 * h)
        assert a == pytest.approx(b, rel=1e-6)


def test_loop_integral_matches_potential_difference(ref_family):
    for t, r1, r2 in [(5.0, 0.2, 1.5), (0.0, 0.5, 2.0)]:
        diff = ref_family.H(r2, t) - ref_family.H(r1, t)
        assert loop_integral(ref_family, t, r1, r2) == pytest.approx(diff, rel=1e-9)


def test_front_starts_after_cusp(front, ref_cusp):
    assert len(front) == 200
    assert np.all(front.t > ref_cusp.t)
    assert front.cusp == ref_cusp


def test_front_born_at_cusp(ref_family, ref_cusp):
    eps = 1e-3
    f = shock_front(ref_family, (ref_cusp.t + eps, ref_cusp.t + 2 * eps), steps=2)
    x_limit = 2 * f.x[0] - f.x[1]
    assert abs(x_limit - ref_cusp.x) < 1e-4
    assert abs(f.rho1[0] - ref_cusp.rho) < 0.1 and abs(f.rho2[0] - ref_cusp.rho) < 0.1
    assert f.rho1[0] < ref_cusp.rho < f.rho2[0]


def test_front_between_caustic_branches(ref_family, ref_cusp, front):
    for t, x in zip(front.t[::10], front.x[::10]):
        lo, hi = fold_x_range(ref_family, t, ref_cusp)
        assert lo < x < hi


def test_front_rankine_hugoniot_slope(ref_family, front):
    slope = np.gradient(front.x, front.t)[1:-1]
    speed = front.speed(ref_family)[1:-1]
    assert np.max(np.abs(slope / speed - 1)) < 1e-3


def test_front_densities_spread(front):
    assert np.all(np.diff(front.rho1) < 0)
    assert np.all(np.diff(front.rho2) > 0)


def test_front_residuals_and_loop(ref_family, front):
    assert front.residual_g.max() < 1e-10 and front.residual_H.max() < 1e-10
    scale = max(1.0, abs(ref_family.H(front.cusp.rho, front.cusp.t)))
    for t, r1, r2 in zip(front.t[::20], front.rho1[::20], front.rho2[::20]):
        assert abs(loop_integral(ref_family, t, r1, r2)) < 1e-8 * scale


def test_front_empty_before_cusp(ref_family, ref_cusp):
    f = shock_front(ref_family, (0.0, 0.5 * ref_cusp.t), steps=5)
    assert len(f) == 0


def test_front_leaving_domain(ref_curve):
    from eulerfronts.process import adiabatic_process

    narrow = adiabatic_process(ref_curve.model, 0.0, (0.3, 0.8))
    fam = SolutionFamily.from_alpha((0, 0, 1, 1), narrow)
    with pytest.raises(DomainError):
        shock_front(fam, (T_STAR, 5 * T_STAR), steps=5)
