import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergspec.bergman import (
    BasisElement,
    WeightedSpaceParams,
    basis_eval,
    log_normalization,
    measure_log_constant,
    monomial_norm_sq,
    norm_change_coeff,
    printed_norm_change_coeff,
    projection_kernel,
    projection_kernel_sum,
)
from bergspec.lattice import Partition, enumerate_multi_indices
from bergspec.oracle import BallQuadrature, ball_inner_product, radial_integral, toeplitz_matrix_bruteforce
from bergspec.symbols import SymbolClass, identity_symbol


def random_ball_points(rng, n, count, radius=0.9):
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(count) ** (1 / (2 * n)))[:, None]


def test_params_validation():
    with pytest.raises(ValueError):
        WeightedSpaceParams(2, -1.0)
    with pytest.raises(ValueError):
        WeightedSpaceParams(0, 0.0)


def test_log_normalization_examples():
    assert log_normalization(WeightedSpaceParams(1, 0), (0,)) == 0.0
    assert math.isclose(log_normalization(WeightedSpaceParams(1, 0), (1,)), 0.5 * math.log(2), rel_tol=1e-14)
    assert math.isclose(log_normalization(WeightedSpaceParams(2, 1), (1, 1)), 0.5 * math.log(20), rel_tol=1e-14)


@given(st.integers(1, 4), st.floats(-0.9, 5), st.lists(st.integers(0, 12), min_size=4, max_size=4))
def test_basis_constant_gamma_quotient(n, lam, raw):
    alpha = tuple(raw[:n])
    p = WeightedSpaceParams(n, lam)
    want = math.gamma(n + sum(alpha) + lam + 1) / (math.prod(math.factorial(a) for a in alpha) * math.gamma(n + lam + 1))
    e = BasisElement.make(p, alpha)
    assert math.isclose(math.exp(2 * e.log_norm_const), want, rel_tol=1e-12)


def test_log_space_no_overflow_at_large_degree():
    p = WeightedSpaceParams(4, 2.5)
    v = log_normalization(p, (50, 50, 50, 50))
    assert math.isfinite(v) and v > 100


def test_measure_constant_examples():
    assert math.isclose(measure_log_constant(WeightedSpaceParams(1, 0)), math.log(1 / math.pi), rel_tol=1e-14)
    assert math.isclose(measure_log_constant(WeightedSpaceParams(2, 0)), math.log(2 / math.pi**2), rel_tol=1e-14)
    assert math.isclose(measure_log_constant(WeightedSpaceParams(2, 1)), math.log(6 / math.pi**2), rel_tol=1e-14)


def test_basis_eval_examples():
    p1 = WeightedSpaceParams(1, 0)
    assert basis_eval(BasisElement.make(p1, (0,)), 0.3) == pytest.approx(1.0)
    assert basis_eval(BasisElement.make(p1, (1,)), 0.5) == pytest.approx(math.sqrt(2) * 0.5, rel=1e-14)
    p2 = WeightedSpaceParams(2, 0)
    got = basis_eval(BasisElement.make(p2, (1, 1)), (0.3, 0.4j))
    assert got == pytest.approx(math.sqrt(12) * 0.3 * 0.4j, rel=1e-14)
    with pytest.raises(ValueError):
        basis_eval(BasisElement.make(p2, (1, 1)), (0.8, 0.7))


def test_projection_kernel_examples():
    rng = np.random.default_rng(1)
    z, w = random_ball_points(rng, 3, 2)
    assert projection_kernel(WeightedSpaceParams(3, 1.5), 0, z, w) == pytest.approx(1.0)
    z, w = random_ball_points(rng, 2, 2)
    want = 3 * np.sum(z * np.conj(w))
    assert projection_kernel(WeightedSpaceParams(2, 0), 1, z, w) == pytest.approx(want, rel=1e-14)
    assert projection_kernel(WeightedSpaceParams(1, 0), 2, (0.5,), (0.5,)) == pytest.approx(3 * 0.0625, rel=1e-14)
    with pytest.raises(ValueError):
        projection_kernel(WeightedSpaceParams(1, 0), 1, (1.0,), (0.5,))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kernel_sum_identity(n):
    rng = np.random.default_rng(n)
    for lam in (0.0, 1.0, 2.5, -0.5):
        p = WeightedSpaceParams(n, lam)
        z = random_ball_points(rng, n, 10)
        w = random_ball_points(rng, n, 10)
        for ell in range(9):
            a = projection_kernel(p, ell, z, w)
            b = projection_kernel_sum(p, ell, z, w)
            assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@pytest.mark.parametrize("n,lam", [(1, 0.0), (2, 1.0), (3, 2.5), (3, -0.5)])
def test_orthonormality_by_oracle(n, lam):
    N = 6 if n < 3 else 5
    k = Partition.maximal(n)
    M = toeplitz_matrix_bruteforce(identity_symbol(SymbolClass.SEPARATELY_RADIAL, k), lam, N).entries
    assert np.max(np.abs(M - np.eye(len(M)))) < 1e-9


@pytest.mark.parametrize("n,lam", [(1, 0.0), (1, 2.5), (2, 0.0), (2, 1.0)])
def test_reproducing_property(n, lam):
    rng = np.random.default_rng(7)
    p = WeightedSpaceParams(n, lam)
    q = BallQuadrature.tensor(n, 5, radial_nodes=14, angular=(12,) * n)
    zeta, w = q.nodes(lam)
    pts = random_ball_points(rng, n, 10)
    for alpha in enumerate_multi_indices(n, 5):
        e = BasisElement.make(p, alpha)
        e_vals = e(zeta)
        for ell in range(6):
            for z in pts:
                got = np.sum(w * projection_kernel(p, ell, z[None, :], zeta)[:] * e_vals)
                want = e(z) if sum(alpha) == ell else 0.0
                assert abs(got - want) < 1e-8


def test_norm_change_examples():
    assert norm_change_coeff(WeightedSpaceParams(3, 1.7), 0) == pytest.approx(1.0)
    assert norm_change_coeff(WeightedSpaceParams(2, 0), 1) == pytest.approx(1 / 3, rel=1e-14)
    assert norm_change_coeff(WeightedSpaceParams(2, 0), 2) == pytest.approx(1 / 6, rel=1e-14)
    with pytest.raises(ValueError):
        norm_change_coeff(WeightedSpaceParams(1, 0), 1)
    # |z_1|^2 over B^2 against dv_0, by integration
    q = BallQuadrature.tensor(2, 2)
    val = ball_inner_product(q, lambda z: z[:, 0], lambda z: z[:, 0], 0.0).real
    assert val == pytest.approx(1 / 3, rel=1e-12)


def test_printed_constant_deviates_for_n_at_least_two():
    # documented deviation: the alternative constant only agrees in one dimension
    p = WeightedSpaceParams(2, 0)
    assert printed_norm_change_coeff(p, 1) == pytest.approx(1.0)
    assert norm_change_coeff(p, 1) == pytest.approx(1 / 3)
    for lam in (0.0, 1.0, 2.5):
        for ell in range(5):
            p1 = WeightedSpaceParams(1, lam)
            exact_1d = math.exp(math.lgamma(1 + lam + 1) + math.lgamma(ell + 1) - math.lgamma(1 + ell + lam + 1))
            assert printed_norm_change_coeff(p1, ell) == pytest.approx(exact_1d, rel=1e-13)
            for n in (2, 3):
                if ell > 0:
                    pn = WeightedSpaceParams(n, lam)
                    assert abs(printed_norm_change_coeff(pn, ell) - norm_change_coeff(pn, ell)) > 1e-3


def random_poly(rng, nvars, deg):
    """Random polynomial as {exponent: coefficient} of total degree <= deg."""
    terms = {}
    for alpha in enumerate_multi_indices(nvars, deg):
        if rng.random() < 0.6:
            terms[alpha] = complex(rng.standard_normal(), rng.standard_normal())
    return terms or {(0,) * nvars: 1.0}


def eval_poly(terms, z):
    out = np.zeros(z.shape[0], dtype=complex)
    for alpha, c in terms.items():
        out += c * np.prod(z ** np.asarray(alpha), axis=-1)
    return out


def norm_change_case(rng, n, lam, ell, j):
    h = random_poly(rng, n - 1, 3)
    rest = [i for i in range(n) if i != j]
    angular = tuple(1 if i == j else 8 for i in range(n))
    q_full = BallQuadrature.tensor(n, 7, radial_nodes=12, angular=angular)
    f = lambda z: z[:, j] ** ell * eval_poly(h, z[:, rest])
    lhs = ball_inner_product(q_full, f, f, lam).real
    q_small = BallQuadrature.tensor(n - 1, 3, radial_nodes=12, angular=(8,) * (n - 1))
    g = lambda w: eval_poly(h, w)
    rhs = ball_inner_product(q_small, g, g, lam + ell + 1).real
    return lhs, norm_change_coeff(WeightedSpaceParams(n, lam), ell) * rhs


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("lam", [0.0, 1.0, 2.5])
def test_norm_change_against_oracle(n, lam):
    rng = np.random.default_rng(int(10 * lam) + n)
    for ell in range(5):
        lhs, rhs = norm_change_case(rng, n, lam, ell, j=int(rng.integers(n)))
        assert abs(lhs - rhs) <= 1e-7 * abs(lhs)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(-0.9, 4.0), st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_monomial_norm_matches_oracle(n, lam, raw):
    alpha = tuple(raw[:n])
    q = BallQuadrature.tensor(n, sum(alpha))
    got = radial_integral(q, lambda r: np.prod(r ** (2 * np.asarray(alpha)), axis=-1), lam)
    assert got == pytest.approx(monomial_norm_sq(WeightedSpaceParams(n, lam), alpha), rel=1e-9)
