from fractions import Fraction

import numpy as np
import pytest

from nfresolvent.errors import (
    AsymmetricKernelError,
    DomainError,
    ExprError,
    KernelEvaluationError,
    TruncationError,
)
from nfresolvent.kernel import (
    GridFunction,
    Kernel,
    apply_kernel,
    build_iterated,
    iterated_values,
    kernel_matrix,
    off_grid_eval,
    split_gauss,
)
from nfresolvent.quadrature import gauss_legendre

# K̃_2 and K̃_3 as printed for the min kernel (t <= x), evaluated exactly
KT2_11 = Fraction(1) - Fraction(1, 2) - Fraction(1, 6)
KT3_11 = (Fraction(1, 3) - Fraction(1, 6) - Fraction(1, 6) + Fraction(1, 24)
          + Fraction(1, 12) + Fraction(1, 120))
J1_1 = Fraction(1, 2) - Fraction(1, 6)
J2_1 = Fraction(5, 24) - Fraction(1, 12) + Fraction(1, 120)


def kt2(x, t):
    return x * t - x**2 * t / 2 - t**3 / 6


def kt3(x, t):
    return x * t / 3 - x**3 * t / 6 - x * t**3 / 6 + x**4 * t / 24 + x**2 * t**3 / 12 + t**5 / 120


def test_oracle_arithmetic():
    assert KT2_11 == Fraction(1, 3)
    assert KT3_11 == Fraction(2, 15)
    assert J2_1 == Fraction(2, 15)


def test_symmetry_detection():
    assert Kernel.builtin("min").symmetric
    assert Kernel.from_expression("exp(-abs(x-t))").symmetric
    k = Kernel.from_expression("x-t")
    assert not k.symmetric
    with pytest.raises(AsymmetricKernelError):
        k.require_symmetric()


def test_resolve_builtin_or_expression():
    assert Kernel.resolve("min").name == "min"
    assert Kernel.resolve("x*t").name == "x*t"
    with pytest.raises(ExprError):
        Kernel.resolve("x*t-q")


def test_domain_check():
    k = Kernel.builtin("min")
    r = gauss_legendre(10)
    g = GridFunction.sample(r, lambda x: x)
    with pytest.raises(DomainError):
        off_grid_eval(k, r, g, 1.5)


def test_nan_kernel_propagates():
    k = Kernel.from_expression("log(x-t)")
    with pytest.raises(KernelEvaluationError):
        build_iterated(k, gauss_legendre(10), 1, scheme="plain")


def test_k1_plain_equals_pointwise():
    k = Kernel.from_expression("exp(x*t)")
    r = gauss_legendre(16)
    st = build_iterated(k, r, 1, scheme="plain")
    np.testing.assert_array_equal(st.matrix(1), np.exp(np.outer(r.nodes, r.nodes)))


def test_k1_product_close_to_pointwise_for_smooth_kernel():
    k = Kernel.from_expression("exp(x*t)")
    r = gauss_legendre(40)
    np.testing.assert_allclose(kernel_matrix(k, r), np.exp(np.outer(r.nodes, r.nodes)), atol=1e-12)


def test_iterated_pointwise_min_kernel():
    k = Kernel.builtin("min")
    vals = iterated_values(k, 3, np.array([1.0, 0.7, 0.2]), 0.4)
    x = np.array([1.0, 0.7, 0.2])
    np.testing.assert_allclose(vals[1], np.where(x >= 0.4, kt2(x, 0.4), kt2(0.4, x)), atol=1e-15)
    np.testing.assert_allclose(vals[2], np.where(x >= 0.4, kt3(x, 0.4), kt3(0.4, x)), atol=1e-15)


def test_stack_value_at_corner(stack200):
    assert abs(stack200.value(2, 1.0, 1.0) - float(KT2_11)) <= 1e-8
    assert abs(stack200.value(3, 1.0, 1.0) - float(KT3_11)) <= 1e-8


def test_stack_matrices_against_polynomials(stack200, rule200):
    x = rule200.nodes
    X, T = np.meshgrid(x, x, indexing="ij")
    k2 = np.where(X >= T, kt2(X, T), kt2(T, X))
    k3 = np.where(X >= T, kt3(X, T), kt3(T, X))
    np.testing.assert_allclose(stack200.matrix(2), k2, atol=1e-11)
    np.testing.assert_allclose(stack200.matrix(3), k3, atol=1e-11)


def test_apply_kernel_J(stack200, f_identity, rule200):
    x = rule200.nodes
    J1 = apply_kernel(stack200, 1, f_identity).values
    J2 = apply_kernel(stack200, 2, f_identity).values
    np.testing.assert_allclose(J1, x / 2 - x**3 / 6, atol=1e-12)
    np.testing.assert_allclose(J2, 5 / 24 * x - x**3 / 12 + x**5 / 120, atol=1e-12)
    last = np.argmax(x)
    assert abs(J1[last] - float(J1_1)) <= 1e-2  # node nearest 1 is not 1
    assert abs(off_grid_eval(stack200.kernel, rule200, f_identity, 1.0) - float(J1_1)) <= 1e-8
    zero = GridFunction(rule200, np.zeros(200))
    assert not np.any(apply_kernel(stack200, 3, zero).values)


def test_apply_kernel_index_out_of_range(stack200, f_identity):
    with pytest.raises(TruncationError):
        apply_kernel(stack200, 5, f_identity)
    with pytest.raises(TruncationError):
        apply_kernel(stack200, 0, f_identity)


def test_off_grid_eval_consistency(stack200, rule200, f_identity, min_kernel):
    J1 = apply_kernel(stack200, 1, f_identity).values
    for i in (0, 57, 199):
        assert abs(off_grid_eval(min_kernel, rule200, f_identity, rule200.nodes[i]) - J1[i]) <= 1e-13
    zero = GridFunction(rule200, np.zeros(200))
    assert off_grid_eval(min_kernel, rule200, zero, 0.3) == 0.0


def test_invalid_depth(min_kernel, rule200):
    with pytest.raises(ValueError):
        build_iterated(min_kernel, rule200, 0)


def test_semigroup_identity(min_kernel, rule200, stack200):
    w = rule200.weights
    k1, k2, k3 = stack200.matrix(1), stack200.matrix(2), stack200.matrix(3)
    scale = np.abs(k3).max()
    assert np.abs(k2 @ (w[:, None] * k1) - k3).max() <= 1e-11 * scale
    assert np.abs(k1 @ (w[:, None] * k2) - k3).max() <= 1e-11 * scale
    st3 = build_iterated(min_kernel, rule200, 3)
    assert np.abs(st3.matrix(3) - k3).max() <= 1e-11 * scale


def test_stack_symmetric(stack200):
    for n in range(1, stack200.depth + 1):
        m = stack200.matrix(n)
        assert np.abs(m - m.T).max() <= 1e-10 * np.abs(m).max()


def test_trace_consistency(stack200, rule200):
    # ∫∫ K² by tensor quadrature split along the diagonal (each triangle smooth)
    pts, wts = split_gauss(0.0, 1.0, rule200.nodes[:, None], 40)
    K = np.minimum(rule200.nodes[:, None], pts)
    double = rule200.weights @ (wts * K * K).sum(axis=1)
    assert double == pytest.approx(1 / 6, rel=1e-13)
    trace = rule200.weights @ np.diag(stack200.matrix(2))
    assert abs(trace - double) <= 1e-8 * double


def test_plain_scheme_is_only_second_order(min_kernel):
    r = gauss_legendre(200)
    st = build_iterated(min_kernel, r, 1, scheme="plain")
    x = r.nodes
    J1 = st.matrix(1) @ (r.weights * x)
    err = np.abs(J1 - (x / 2 - x**3 / 6)).max()
    assert 1e-9 < err < 1e-4


def test_grid_function_helpers(rule200):
    g = GridFunction.from_expression(rule200, "sin(pi*x)")
    assert g(0.5) == pytest.approx(1.0, abs=1e-15)
    h = GridFunction(rule200, g.values)
    assert h(0.5) == pytest.approx(1.0, abs=1e-12)
    assert g.scaled(2.0)(0.5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        GridFunction(rule200, np.zeros(3))
