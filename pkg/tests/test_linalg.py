import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bpdyn.errors import InfeasibleOnSupport, NonFiniteInput
from bpdyn.linalg import bilinear_form, factorize, pseudo_solve, weighted_gram, weighted_l2_min


def test_single_constraint_forces_q():
    q, e = weighted_l2_min([[1.0]], [1.0], [5.0])
    np.testing.assert_allclose(q, [1.0])
    assert e == pytest.approx(0.2)


def test_two_column_split():
    q, e = weighted_l2_min([[1.0, 1.0]], [1.0], [1.0, 3.0])
    np.testing.assert_allclose(q, [0.25, 0.75])
    assert e == pytest.approx(0.25)


def test_zero_weight_is_hard_zero():
    q, _ = weighted_l2_min([[1.0, 1.0, 1.0]], [2.0], [1.0, 0.0, 1.0])
    np.testing.assert_allclose(q, [1.0, 0.0, 1.0])


def test_zero_support_infeasible():
    with pytest.raises(InfeasibleOnSupport):
        weighted_l2_min([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0], [1.0, 0.0])


def test_nonfinite_rejected():
    with pytest.raises(NonFiniteInput):
        weighted_l2_min([[1.0, np.nan]], [1.0], [1.0, 1.0])


@pytest.mark.parametrize(
    "L, c, expected",
    [
        (np.eye(2), [3.0, 4.0], [3.0, 4.0]),
        ([[1.0, 0.0], [0.0, 0.0]], [2.0, 0.0], [2.0, 0.0]),
        ([[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0], [1 / 3, 1 / 3]),
    ],
)
def test_pseudo_solve(L, c, expected):
    np.testing.assert_allclose(pseudo_solve(np.array(L), c), expected, atol=1e-14)


def test_singular_goes_through_eigen():
    g = factorize(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert g.kind == "eigen" and g.rank == 1


def test_bilinear_form_examples():
    assert bilinear_form(np.eye(2), [1, 0], [1, 0]) == 1.0
    assert bilinear_form(2 * np.eye(2), [1, 0], [0, 1]) == 0.0
    L = weighted_gram([[1.0, 1.0]], [1.0, 3.0])
    assert bilinear_form(L, [1.0], [1.0]) == pytest.approx(0.25)


def _problem(draw_seed, m, n):
    rng = np.random.default_rng(draw_seed)
    A = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    w = np.exp(rng.uniform(-4, 4, n))
    return A, b, w


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 5), extra=st.integers(0, 5))
def test_kkt_and_minimality(seed, m, extra):
    n = m + extra
    A, b, w = _problem(seed, m, n)
    q, e = weighted_l2_min(A, b, w)
    np.testing.assert_allclose(A @ q, b, atol=1e-8 * (1 + np.abs(b).max()))
    # stationarity: q / w lies in the row space of A
    lam, *_ = np.linalg.lstsq(A.T, q / w, rcond=None)
    np.testing.assert_allclose(A.T @ lam, q / w, atol=1e-7 * (1 + np.abs(q / w).max()))
    assert e == pytest.approx(np.sum(q**2 / w), rel=1e-9)
    # any other feasible point costs at least as much
    rng = np.random.default_rng(seed + 1)
    _, _, vt = np.linalg.svd(A)
    for _ in range(5):
        z = q + rng.standard_normal(n - m) @ vt[m:] if n > m else q
        assert np.sum(z**2 / w) >= e * (1 - 1e-10) - 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-5, 5)), arrays(np.float64, 3, elements=st.floats(-5, 5)))
def test_bilinear_symmetric(M, u):
    L = M @ M.T + 1e-3 * np.eye(3)
    v = u[::-1] + 1.0
    a, b = bilinear_form(L, u, v), bilinear_form(L, v, u)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a), abs(b))


def test_extreme_weight_spread_still_feasible():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 1.0])
    w = np.array([1e-15, 1.0, 1e3])
    q, _ = weighted_l2_min(A, b, w)
    np.testing.assert_allclose(A @ q, b, atol=1e-8)
