import numpy as np
import pytest

from eulerfronts.errors import DomainError, SingularParameterError
from eulerfronts.exact_solution import SolutionFamily
from eulerfronts.geometry_verify import (
    RHO,
    T,
    U,
    TwoForm,
    V_fields,
    Z_fields,
    bracket_XY,
    build_normalized_forms,
    characteristic_fields,
    check_ansatz_pde,
    check_solution_annihilates_forms,
    constant_chart,
    family_chart,
    identity_residuals,
    lie_bracket_integrability,
    mutated_ansatz_partials,
    operator_W,
    operator_W_from_forms,
    pairing_matrix,
    pullback_residual,
    raw_forms,
    run_verification,
    sample_points,
    span_rank,
)
from eulerfronts.process import adiabatic_process, cubic_pressure, is_characteristically_integrable, isothermal_process
from eulerfronts.thermo import critical_point_vdw, ideal_gas_model, van_der_waals_model

PT = np.array([0.3, -1.2, 0.7, 1.6])


def test_two_form_requires_antisymmetry():
    with pytest.raises(DomainError):
        TwoForm(np.eye(4))


def test_wedge_of_basis_forms():
    dt_dx = TwoForm.from_components({(0, 1): 1.0})
    du_drho = TwoForm.from_components({(2, 3): 1.0})
    dt_du = TwoForm.from_components({(0, 2): 1.0})
    dx_drho = TwoForm.from_components({(1, 3): 1.0})
    assert dt_dx.wedge(du_drho) == 1.0
    assert dt_du.wedge(dx_drho) == -1.0
    assert dt_dx.wedge(dt_dx) == 0.0
    assert dt_dx.wedge(du_drho) == du_drho.wedge(dt_dx)


def test_form_evaluation_and_contraction():
    w = TwoForm.from_components({(0, 1): 2.0, (2, 3): -1.0})
    a, b = np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0])
    assert w(a, b) == 2.0 and w(b, a) == -2.0
    np.testing.assert_array_equal(w.contract(a), [0, 2.0, 0, 0])


def test_forms_wedge_identities(ref_curve):
    w1, w2 = build_normalized_forms(ref_curve, PT)
    assert abs(w1.wedge(w2)) < 1e-12
    assert abs(w1.wedge(w1) + w2.wedge(w2)) < 1e-12
    r1, r2 = raw_forms(ref_curve, PT)
    assert abs(r1.wedge(r2)) < 1e-12


def test_pairing_determinant(ref_curve):
    rho = PT[RHO]
    det = np.linalg.det(pairing_matrix(*raw_forms(ref_curve, PT)))
    assert det == pytest.approx(-4 * ref_curve.dp(rho), rel=1e-12)
    w1, w2 = build_normalized_forms(ref_curve, PT)
    # normalized pair: w1^w1 = -w2^w2 and w1^w2 = 0, so P is diagonal and traceless
    P = pairing_matrix(w1, w2)
    assert abs(P[0, 1]) < 1e-12 and abs(P[0, 0] + P[1, 1]) < 1e-12


def test_operator_W_properties(ref_curve):
    W = operator_W(ref_curve, PT).matrix
    np.testing.assert_allclose(W @ W, np.eye(4), atol=1e-12)
    assert abs(np.trace(W)) < 1e-12
    w1, w2 = build_normalized_forms(ref_curve, PT)
    np.testing.assert_allclose(operator_W_from_forms(w1, w2), W, atol=1e-12)
    # contraction identity X -| w2 = (W X) -| w1
    for i in range(4):
        e = np.eye(4)[i]
        np.testing.assert_allclose(w2.contract(e), w1.contract(W @ e), atol=1e-12)


def test_characteristic_fields_are_eigenvectors(ref_curve):
    W = operator_W(ref_curve, PT).matrix
    f = characteristic_fields(ref_curve, PT)
    for s in (1, -1):
        for vec in f.pair(s):
            np.testing.assert_allclose(W @ vec, s * vec, atol=1e-12)


def test_W_singular_at_zero_amplitude():
    flat = cubic_pressure(1.0, 0.0)
    with pytest.raises(SingularParameterError):
        operator_W(flat, [0.0, 0.0, 0.0, 0.0])


def test_non_hyperbolic_point_rejected():
    a, b = 1.0, 0.1
    _, Tc = critical_point_vdw(a, b)
    curve = isothermal_process(van_der_waals_model(a, b), 0.85 * Tc, (0.5, 9.0))
    rho = next(r for r in np.linspace(0.5, 9, 200) if curve.dp(r) < 0)
    with pytest.raises(DomainError):
        build_normalized_forms(curve, [0, 0, 0, rho])


def test_bracket_closed_form(ref_curve):
    t, x, u, rho = PT
    A, dA = ref_curve.A(rho), ref_curve.dA(rho)
    for s in (1, -1):
        br = bracket_XY(ref_curve, PT, s)
        expected = s * rho * dA / (u - s * rho * A) ** 2
        np.testing.assert_allclose(br, [expected, 0, 0, 0], rtol=1e-6, atol=1e-12)


def test_span_rank():
    assert span_rank([[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0]]) == 2
    assert span_rank([[1, 0, 0, 0], [0, 0, 1e-3, 0]]) == 2


@pytest.mark.parametrize("n", [3, 5])
def test_integrability_verdicts(n):
    pts = sample_points(1, 30)
    cubic = cubic_pressure(2.0, 5.0, (0.2, 5.0))
    assert lie_bracket_integrability(cubic, pts) == {"+": True, "-": True}
    assert is_characteristically_integrable(cubic)
    ideal = adiabatic_process(ideal_gas_model(n, 1.0), 0.0)
    assert lie_bracket_integrability(ideal, pts) == {"+": False, "-": False}
    assert not is_characteristically_integrable(ideal)


def test_ansatz_pde_and_mutant(ref_family):
    pts = sample_points(0, 100)[:, [T, U, RHO]]
    assert check_ansatz_pde(ref_family, pts) < 1e-9
    assert check_ansatz_pde(ref_family, pts, mutated_ansatz_partials) > 1e-3


def test_solution_pullback(ref_family):
    pts = sample_points(0, 100)[:, [RHO, T]]
    assert check_solution_annihilates_forms(ref_family, pts) < 1e-8
    shifted = family_chart(ref_family, lambda r, t: (0.01 * r, 0.01, 0.0))
    assert check_solution_annihilates_forms(ref_family, pts, shifted) > 1e-8


def test_constant_state_pullback(ref_curve):
    chart = constant_chart(1.0, 0.5)
    for t, x in [(0.0, 0.0), (2.0, -3.0)]:
        assert pullback_residual(ref_curve, chart, t, x)[0] < 1e-12


def test_V_fields_tangent_and_eigen(ref_curve):
    fam = SolutionFamily.from_alpha((0.4, -0.3, 1.2, 0.8), ref_curve)
    rho, t = 1.3, 0.7
    u = float(fam.U(rho, t))
    pt = np.array([t, float(fam.g(rho, t)), u, rho])
    # F = a0 + a1 rho + a2 rho t - u (rho + a3)
    a0, a1, a2, a3 = fam.alpha
    dF = (a2 * rho, 0.0, -(rho + a3), a1 + a2 * t - u)
    W = operator_W(ref_curve, pt).matrix
    vp, vm = V_fields(ref_curve, pt, dF)
    for s, v in ((1, vp), (-1, vm)):
        assert abs(np.dot(dF, v)) < 1e-12 * np.linalg.norm(v)
        np.testing.assert_allclose(W @ v, s * v, atol=1e-12 * np.linalg.norm(v))
    zp, zm = Z_fields(fam, rho, t)
    np.testing.assert_allclose(zp, -np.delete(vp, U) / (rho + a3), rtol=1e-12, atol=1e-14)


def test_identity_residuals_small(ref_curve):
    res = identity_residuals(ref_curve, sample_points(0, 100))
    for k, v in res.items():
        if k == "eigenvalues":
            continue
        tol = 1e-8 if k == "eigenspace angle" else 1e-12
        assert v < tol, k


def test_run_verification_all_pass_and_deterministic(ref_family):
    a = run_verification(ref_family, seed=0, samples=100)
    b = run_verification(ref_family, seed=0, samples=100)
    assert all(r.passed for r in a), [r.row() for r in a if not r.passed]
    assert [(r.name, r.value) for r in a if "runtime" not in r.name] == [
        (r.name, r.value) for r in b if "runtime" not in r.name
    ]


def test_sample_points_reproducible():
    np.testing.assert_array_equal(sample_points(7, 10), sample_points(7, 10))
    assert not np.array_equal(sample_points(7, 10), sample_points(8, 10))
