import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nfresolvent.jacobi import jacobi_eigh, round_robin_pairs


@pytest.mark.parametrize("n", [2, 4, 6, 10])
def test_round_robin_covers_all_pairs_once(n):
    rounds = round_robin_pairs(n)
    assert len(rounds) == n - 1
    seen = set()
    for p, q in rounds:
        assert sorted(np.concatenate([p, q]).tolist()) == list(range(n))
        for a, b in zip(p, q):
            assert a < b
            seen.add((int(a), int(b)))
    assert len(seen) == n * (n - 1) // 2


def test_odd_size_rejected():
    with pytest.raises(ValueError):
        round_robin_pairs(5)


def test_small_known():
    w, v = jacobi_eigh([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-15)
    assert abs(abs(v[0, 0]) - 2**-0.5) < 1e-15


def test_empty_and_scalar():
    w, v = jacobi_eigh(np.zeros((0, 0)))
    assert w.size == 0
    w, v = jacobi_eigh([[5.0]])
    assert w.tolist() == [5.0] and v.tolist() == [[1.0]]


def test_non_square_rejected():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 25).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False))
    )
)
def test_matches_lapack(a):
    a = a + a.T
    w, v = jacobi_eigh(a)
    ref = np.linalg.eigvalsh(a)
    scale = max(1.0, np.abs(ref).max())
    np.testing.assert_allclose(w, ref, atol=1e-11 * scale)
    np.testing.assert_allclose(v.T @ v, np.eye(len(w)), atol=1e-12)
    np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-11 * scale)


def test_larger_matrix():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((81, 81))
    a = a + a.T
    w, v = jacobi_eigh(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-11)
