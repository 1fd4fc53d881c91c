import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfresolvent.benchmark import EXAMPLE, exact_resolvent
from nfresolvent.errors import AnnihilationError, EigenvalueHitError, TruncationError
from nfresolvent.kernel import GridFunction
from nfresolvent.resolvent import (
    MixedSeriesParams,
    MixedSolver,
    annihilated_resolvent_eval,
    check_eigen_guard,
    error_profile,
    exact_reference,
    resolvent_defect,
    resolvent_eval,
    solve_equation,
)


@pytest.fixture(scope="module")
def solver(stack200, spec200, f_identity):
    return MixedSolver(stack200, spec200, f_identity, 3, 200)


def y_err(solver, lam, m, N, x=1.0):
    return abs(solver.solve(MixedSeriesParams(lam, m, N), x) - exact_reference(lam, x))


def test_params_validation():
    with pytest.raises(ValueError):
        MixedSeriesParams(1.0, -1, 3)
    with pytest.raises(ValueError):
        MixedSeriesParams(1.0, 1, 0)
    with pytest.raises(ValueError):
        MixedSeriesParams(1.0, 1, 3, (0.1, 0.2))
    with pytest.raises(ValueError):
        MixedSeriesParams(float("nan"), 1, 3)
    p = MixedSeriesParams(2, 1, 3, [0.5])
    assert p.alpha == 0.5 and isinstance(p.lam, float)


def test_exact_reference_values():
    assert exact_reference(4.0, 1.0) == pytest.approx(math.sin(2) / (2 * math.cos(2)), rel=1e-15)
    assert exact_reference(4.0, 1.0) == pytest.approx(-1.09252, abs=1e-5)
    assert exact_reference(-4.0, 1.0) == pytest.approx(0.48201, abs=1e-5)
    assert exact_reference(0.0, 0.3) == 0.3
    with pytest.raises(EigenvalueHitError):
        exact_reference(math.pi**2 / 4, 1.0)


def test_resolvent_at_zero_lambda_is_kernel(stack200, spec200):
    for m in (1, 2, 3):
        assert resolvent_eval(stack200, spec200, MixedSeriesParams(0.0, m, 17), 0.3, 0.7) == 0.3


@pytest.mark.parametrize("x, t", [(1.0, 1.0), (0.3, 0.7), (0.8, 0.25)])
def test_resolvent_closed_form(stack200, spec200, x, t):
    ref = exact_resolvent(4.0, x, t)
    r = resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, 3, 150), x, t)
    assert abs(r - ref) <= 1e-9


def test_resolvent_numeric_matches_analytic(stack200, spec200):
    for m in (0, 1, 2, 3):
        num = resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, m, 6), 0.6, 0.9)
        ana = EXAMPLE.resolvent(4.0, m, 6, 0.6, 0.9)
        assert abs(num - ana) <= 1e-10


def test_more_neumann_terms_improve_resolvent(stack200, spec200):
    ref = EXAMPLE.resolvent(4.0, 2, 400, 1.0, 1.0)
    assert abs(ref - exact_resolvent(4.0, 1.0, 1.0)) <= 1e-9
    r1 = resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, 1, 6), 1.0, 1.0)
    r2 = resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, 2, 6), 1.0, 1.0)
    assert abs(r2 - ref) < abs(r1 - ref)


def test_solve_examples(solver):
    assert y_err(solver, 2.0, 0, 3) == pytest.approx(4.9e-4, rel=0.05)
    assert y_err(solver, 2.0, 3, 6) <= 3 * 3.4e-12 and y_err(solver, 2.0, 3, 6) >= 3.4e-12 / 3
    # (approx2) at λ=4, N=6: 8.3e-7 by the closed-form series, far from the m=0 value 1.3e-4
    analytic = abs(EXAMPLE.solve(4.0, 1, 6, 1.0)[0] - exact_reference(4.0, 1.0))
    assert y_err(solver, 4.0, 1, 6) == pytest.approx(analytic, rel=1e-3)
    assert analytic == pytest.approx(8.34e-7, rel=1e-2)


def test_solve_at_zero_lambda_is_f(stack200, spec200, f_identity):
    x = np.linspace(0, 1, 11)
    for m in (0, 1, 3):
        y = solve_equation(stack200, spec200, f_identity, MixedSeriesParams(0.0, m, 6), x)
        assert np.array_equal(y, x)


def test_solve_equation_wrapper_matches_solver(stack200, spec200, f_identity, solver):
    p = MixedSeriesParams(5.0, 2, 5)
    assert solve_equation(stack200, spec200, f_identity, p, 0.4) == pytest.approx(
        solver.solve(p, 0.4), abs=1e-15)


def test_truncation_errors(stack200, spec200, f_identity):
    with pytest.raises(TruncationError):
        solve_equation(stack200, spec200, f_identity, MixedSeriesParams(1.0, 5, 3), 0.5)
    with pytest.raises(TruncationError):
        resolvent_eval(stack200, spec200, MixedSeriesParams(1.0, 1, 500), 0.5, 0.5)


def test_increasing_m_gains_factor_ten(solver):
    errs = [y_err(solver, 2.0, m, 6) for m in (1, 2, 3)]
    assert errs[0] >= 10 * errs[1] and errs[1] >= 10 * errs[2]


@pytest.mark.parametrize("lam", [5.0, 20.0])
@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("N", [4, 6])
def test_negative_lambda_parity(solver, lam, m, N):
    ratio = y_err(solver, -lam, m, N) / y_err(solver, lam, m, N)
    assert 0.1 <= ratio <= 10


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50), st.integers(0, 3), st.integers(1, 40), st.sampled_from([2.0, 0.5, 4.0]))
def test_linearity_in_f(stack200, spec200, f_identity, lam, m, N, scale):
    try:
        check_eigen_guard(spec200.lambdas, lam)
    except EigenvalueHitError:
        return
    solver1 = MixedSolver(stack200, spec200, f_identity, m, N)
    solver2 = MixedSolver(stack200, spec200, f_identity.scaled(scale), m, N)
    x = np.array([0.0, 0.37, 1.0])
    p = MixedSeriesParams(lam, m, N)
    y1 = solver1.solve(p, x)
    y2 = solver2.solve(p, x)
    np.testing.assert_allclose(y2, scale * y1, rtol=1e-12, atol=1e-300)


def test_eigen_guard_examples(solver, stack200, spec200):
    with pytest.raises(EigenvalueHitError) as info:
        solver.solve(MixedSeriesParams(2.46740110027234, 1, 6), 1.0)
    assert info.value.k == 1
    assert "offending k = 1" in str(info.value)
    with pytest.raises(EigenvalueHitError):
        resolvent_eval(stack200, spec200, MixedSeriesParams(float(spec200.lambdas[3]), 2, 2), 0.5, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.floats(-9e-13, 9e-13), st.integers(0, 3), st.integers(1, 10))
def test_eigen_guard_always_errors(spec200, solver, k, rel, m, N):
    lam = float(spec200.lambdas[k - 1]) * (1 + rel)
    with pytest.raises(EigenvalueHitError) as info:
        solver.solve(MixedSeriesParams(lam, m, N), 0.5)
    assert info.value.k == k


def test_annihilated_alpha_zero_matches_plain(stack200, spec200):
    for x, t in ((1.0, 1.0), (0.2, 0.9)):
        a = annihilated_resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, 2, 6, (0.0,)), x, t)
        b = resolvent_eval(stack200, spec200, MixedSeriesParams(4.0, 2, 6), x, t)
        assert abs(a - b) <= 1e-13


def test_annihilated_term_vanishes(stack200, spec200):
    l2 = float(spec200.lambdas[1])
    p5 = MixedSeriesParams(3.0, 2, 1, (1 / l2,))
    p6 = MixedSeriesParams(3.0, 2, 2, (1 / l2,))
    a = annihilated_resolvent_eval(stack200, spec200, p5, 0.4, 0.8)
    b = annihilated_resolvent_eval(stack200, spec200, p6, 0.4, 0.8)
    assert a == b


def test_annihilated_validation(stack200, spec200):
    with pytest.raises(AnnihilationError):
        annihilated_resolvent_eval(stack200, spec200, MixedSeriesParams(2.0, 1, 3, (0.5,)), 0.5, 0.5)
    with pytest.raises(ValueError):
        annihilated_resolvent_eval(stack200, spec200, MixedSeriesParams(2.0, 0, 3, (0.1,)), 0.5, 0.5)
    with pytest.raises(ValueError):
        annihilated_resolvent_eval(stack200, spec200, MixedSeriesParams(2.0, 1, 3), 0.5, 0.5)


def test_annihilated_solution_consistent_with_resolvent(stack200, spec200, f_identity, solver):
    # y = f + λ ∫ R f: the annihilated solution must equal the large-N solution as N grows
    l2 = float(spec200.lambdas[1])
    lam = 30.0
    p = MixedSeriesParams(lam, 2, 150, (1 / l2,))
    assert abs(solver.solve(p, 0.7) - exact_reference(lam, 0.7)) <= 1e-9


def test_error_profile(stack200, spec200, f_identity):
    grid = np.linspace(0, 1, 101)
    prof = error_profile(stack200, spec200, f_identity, 4.0, 0, 5, grid)
    assert np.argmax(prof.errors) == 100
    assert not prof.at_rounding_floor
    deep = error_profile(stack200, spec200, f_identity, 0.0, 3, 6, grid)
    assert deep.at_rounding_floor and deep.max_error == 0.0


def test_defect_decreases_in_N(stack200, spec200):
    for m in (1, 2):
        d = [abs(resolvent_defect(stack200, spec200, MixedSeriesParams(4.0, m, N), 0.5, 0.3))
             for N in (5, 10, 20, 40)]
        assert all(a > b for a, b in zip(d, d[1:])), d
