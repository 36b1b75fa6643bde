import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergspec.gamma import (
    build_gamma_sequence,
    gamma_at_label,
    gamma_degenerate,
    gamma_quasi_radial,
    gamma_radial,
    gamma_separately_radial,
    gamma_weighted,
)
from bergspec.lattice import Partition, all_compositions, enumerate_multi_indices, fiber_labels, group_norms
from bergspec.quadrature import QuadratureError, QuadratureRule, log_dirichlet, simplex_integrate
from bergspec.symbols import (
    CallableProfile,
    Monomial,
    PolynomialInRho,
    SymbolClass,
    SymbolSpec,
    identity_symbol,
    parse_symbol,
)

CLASSES = list(SymbolClass)


def partitions_for(cls, n):
    if cls is SymbolClass.SEPARATELY_RADIAL:
        return [Partition.maximal(n)]
    if cls is SymbolClass.RADIAL:
        return [Partition.minimal(n)]
    parts = all_compositions(n)
    if cls in (SymbolClass.WEIGHTED, SymbolClass.DEGENERATE):
        parts = [k for k in parts if k.m >= 2]
    return parts


def dirichlet(lam, b):
    return math.exp(log_dirichlet(lam, b))


# simplex quadrature

def test_simplex_integrate_examples():
    assert simplex_integrate(QuadratureRule(1, 4), lambda r: np.ones(r.shape[0]), 0.0, [0.0]) == pytest.approx(1.0)
    assert simplex_integrate(QuadratureRule(2, 8), lambda r: r[:, 0], 0.0, [1.0, 0.0]) == pytest.approx(1 / 12, rel=1e-13)


def test_simplex_integrate_dirichlet_random():
    rng = np.random.default_rng(3)
    one = lambda r: np.ones(r.shape[0])
    for _ in range(20):
        b = rng.uniform(-0.5, 4, size=2)
        lam = rng.uniform(-0.5, 4)
        want = math.gamma(b[0] + 1) * math.gamma(b[1] + 1) * math.gamma(lam + 1) / math.gamma(b.sum() + lam + 3)
        assert simplex_integrate(QuadratureRule(2, 64), one, lam, b) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rule_exact_up_to_degree(m):
    q = 5
    rule = QuadratureRule(m, q)
    rng = np.random.default_rng(m)
    lam, base = 0.7, rng.uniform(0, 2, size=m)
    rho, w, _ = rule.points(lam, base)
    assert np.all(w > 0)
    for d in enumerate_multi_indices(m, 2 * q - 2):
        got = simplex_integrate(rule, lambda r, d=d: np.prod(r ** np.asarray(d), axis=-1), lam, base)
        want = dirichlet(lam, base + np.asarray(d))
        assert got == pytest.approx(want, rel=1e-13)


def test_simplex_rejects_bad_exponents():
    with pytest.raises(ValueError):
        simplex_integrate(QuadratureRule(1, 4), lambda r: r[:, 0], -1.0, [0.0])
    with pytest.raises(ValueError):
        simplex_integrate(QuadratureRule(1, 4), lambda r: r[:, 0], 0.0, [-1.5])
    with pytest.raises(QuadratureError):
        simplex_integrate(QuadratureRule(1, 4), lambda r: np.full(r.shape[0], np.nan), 0.0, [0.0])


# gamma examples

def test_quasi_radial_examples():
    a = SymbolSpec.quasi_radial(Partition((2, 1)), Monomial((1, 0)))
    assert gamma_quasi_radial(a, 0, (0, 0)) == pytest.approx(0.5, rel=1e-13)
    r2 = SymbolSpec.radial(2, Monomial((1,)))
    assert [gamma_radial(r2, 0, l) for l in range(3)] == pytest.approx([2 / 3, 3 / 4, 4 / 5], rel=1e-13)


def test_separately_radial_examples():
    a = SymbolSpec.separately_radial(2, Monomial((1, 0)))
    assert gamma_separately_radial(a, 0, (0, 0)) == pytest.approx(1 / 3, rel=1e-13)
    assert gamma_separately_radial(a, 0, (0, 1)) == pytest.approx(1 / 4, rel=1e-13)
    assert gamma_separately_radial(identity_symbol(SymbolClass.SEPARATELY_RADIAL, Partition.maximal(3)), 1.5, (2, 0, 7)) == pytest.approx(1.0)


def test_radial_examples():
    a = SymbolSpec.radial(2, PolynomialInRho.univariate([1, -1]))
    for ell in range(6):
        assert gamma_radial(a, 0, ell) == pytest.approx(1 / (ell + 3), rel=1e-12)
    b = SymbolSpec.radial(3, Monomial((1,)))
    assert gamma_radial(b, 1, 2) == pytest.approx(5 / 7, rel=1e-13)


def test_weighted_examples():
    a = SymbolSpec.weighted(Partition((1, 1)), Monomial((1,)))
    assert gamma_weighted(a, 0, (0, 5)) == pytest.approx(0.5, rel=1e-13)
    assert gamma_weighted(a, 0, (3, 0)) == gamma_weighted(a, 0, (3, 9)) == pytest.approx(0.8, rel=1e-13)
    for a1 in range(6):
        for lam in (0.0, 1.0, 2.5):
            assert gamma_weighted(a, lam, (a1, 2)) == pytest.approx((a1 + 1) / (a1 + lam + 2), rel=1e-12)


def test_degenerate_examples():
    a = SymbolSpec.degenerate(Partition((1, 1)), Monomial((1,)))
    assert gamma_degenerate(a, 0, (0, 1)) == pytest.approx(0.25, rel=1e-13)
    assert gamma_degenerate(a, 0, (0, 0)) == pytest.approx(1 / 3, rel=1e-13)
    sep = SymbolSpec.separately_radial(2, Monomial((1, 0)))
    for alpha in enumerate_multi_indices(2, 6):
        assert gamma_degenerate(a, 0.5, alpha) == pytest.approx(gamma_separately_radial(sep, 0.5, alpha), rel=1e-11)


def test_weighted_never_reads_alpha_dprime():
    class Guarded(tuple):
        def __getitem__(self, i):
            if isinstance(i, int) and i >= 2:
                raise AssertionError("alpha'' was read")
            return tuple.__getitem__(self, i)

    a = SymbolSpec.weighted(Partition((1, 1, 2)), Monomial((1, 2)))
    alpha = Guarded((1, 2, 3, 4))
    assert gamma_weighted(a, 0.3, alpha) == gamma_weighted(a, 0.3, (1, 2, 0, 0))


def random_weighted(rng):
    k = [Partition((1, 1)), Partition((2, 1)), Partition((1, 1, 1)), Partition((1, 2)), Partition((1, 1, 2))][rng.integers(5)]
    exps = tuple(float(x) for x in rng.uniform(0, 3, size=k.m - 1))
    return SymbolSpec.weighted(k, Monomial(exps, float(rng.uniform(0.5, 2))))


def test_alpha_dprime_independence_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = random_weighted(rng)
        npr = a.reduced_partition.n
        for alpha in enumerate_multi_indices(a.n, 8):
            other = alpha[:npr] + tuple(int(x) for x in rng.integers(0, 9, size=a.n - npr))
            assert gamma_weighted(a, 1.0, alpha) == gamma_weighted(a, 1.0, other)


@pytest.mark.parametrize("cls", CLASSES)
def test_identity_symbol_is_one(cls):
    for n in range(1, 5):
        for k in partitions_for(cls, n):
            a = identity_symbol(cls, k)
            for lam in (0.0, 1.0, 2.5):
                gs = build_gamma_sequence(a, lam, 6)
                assert max(abs(v - 1) for v in gs.values.values()) < 1e-11


def test_identity_prefactor_stable_at_high_degree():
    for cls in CLASSES:
        k = partitions_for(cls, 3)[0]
        a = identity_symbol(cls, k)
        s = tuple([150 // k.m] * (k.m - 1) + [150 - (150 // k.m) * (k.m - 1)])
        assert gamma_at_label(a, 2.5, s) == pytest.approx(1.0, abs=1e-11)


# class consistency

def test_radial_equals_quasi_with_minimal_partition():
    prof = PolynomialInRho.univariate([0.2, -1, 3])
    r = SymbolSpec.radial(3, prof)
    q = SymbolSpec.quasi_radial(Partition((3,)), prof)
    for ell in range(9):
        assert gamma_radial(r, 1.3, ell) == pytest.approx(gamma_quasi_radial(q, 1.3, (ell,)), abs=1e-11)


def test_separately_radial_equals_quasi_with_maximal_partition():
    prof = Monomial((0.5, 1.0, 2.0))
    s = SymbolSpec.separately_radial(3, prof)
    q = SymbolSpec.quasi_radial(Partition((1, 1, 1)), prof)
    for alpha in enumerate_multi_indices(3, 5):
        assert gamma_separately_radial(s, 0.4, alpha) == pytest.approx(gamma_quasi_radial(q, 0.4, alpha), abs=1e-11)


@pytest.mark.parametrize("blocks", [(1, 1), (2, 1), (1, 2), (1, 1, 1), (2, 2)])
def test_degenerate_equals_quasi_with_constant_last_radius(blocks):
    k = Partition(blocks)
    coeffs = {(1,) * (k.m - 1): 1.0, (0,) * (k.m - 1): 0.25, (2,) + (0,) * (k.m - 2): -0.5}
    d = SymbolSpec.degenerate(k, PolynomialInRho(coeffs, arity=k.m - 1))
    q = SymbolSpec.quasi_radial(k, PolynomialInRho({e + (0,): c for e, c in coeffs.items()}, arity=k.m))
    for lam in (0.0, 2.5):
        for s in fiber_labels(k, 6):
            assert gamma_at_label(d, lam, s) == pytest.approx(gamma_quasi_radial(q, lam, s), abs=1e-11)


# general properties

@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 4), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 10), st.integers(0, 10))
def test_linearity(lam, c1, c2, s1, s2):
    k = Partition((2, 1))
    pa = PolynomialInRho({(1, 0): 1.0, (0, 2): 0.5}, arity=2)
    pb = PolynomialInRho({(0, 0): 1.0, (1, 1): -2.0}, arity=2)
    ga = gamma_quasi_radial(SymbolSpec.quasi_radial(k, pa), lam, (s1, s2))
    gb = gamma_quasi_radial(SymbolSpec.quasi_radial(k, pb), lam, (s1, s2))
    gc = gamma_quasi_radial(SymbolSpec.quasi_radial(k, pa.scaled(c1) + pb.scaled(c2)), lam, (s1, s2))
    assert gc == pytest.approx(c1 * ga + c2 * gb, abs=1e-12 * (1 + abs(c1) + abs(c2)) * 10)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 4), st.floats(0.1, 5), st.floats(0.1, 5))
def test_positivity_and_contractivity(lam, w1, w2):
    # 0 <= a <= 1 pointwise on the simplex
    f = lambda r: np.clip(np.sin(w1 * r[..., 0]) ** 2 * np.cos(w2 * r[..., 1]) ** 2, 0, 1)
    a = SymbolSpec.quasi_radial(Partition((1, 1)), CallableProfile(f, 2))
    for s in fiber_labels(a.partition, 4):
        g = gamma_quasi_radial(a, lam, s, nodes=40)
        assert -1e-15 <= g <= 1 + 1e-12


def test_quadrature_matches_closed_form_real_exponents():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        k = [Partition((1,)), Partition((2,)), Partition((1, 1)), Partition((2, 1)), Partition((1, 1, 1))][rng.integers(5)]
        a = SymbolSpec.quasi_radial(k, Monomial(tuple(rng.uniform(0, 5, size=k.m))))
        lam = float(rng.uniform(-0.5, 3))
        s = tuple(int(x) for x in rng.integers(0, 6, size=k.m))
        c = gamma_quasi_radial(a, lam, s, method="closed")
        q = gamma_quasi_radial(a, lam, s, method="quadrature")
        worst = max(worst, abs(q - c) / abs(c))
    assert worst < 1e-10


def test_callable_quadrature_matches_polynomial():
    poly = PolynomialInRho({(2, 1): 1.0, (0, 0): 0.3}, arity=2)
    k = Partition((1, 2))
    a = SymbolSpec.quasi_radial(k, poly)
    b = SymbolSpec.quasi_radial(k, CallableProfile(poly, 2, "poly"))
    for s in fiber_labels(k, 5):
        assert gamma_quasi_radial(b, 0.5, s) == pytest.approx(gamma_quasi_radial(a, 0.5, s), rel=1e-12)


def test_quadrature_error_reports_both_estimates():
    a = SymbolSpec.radial(1, PolynomialInRho.univariate([0] * 10 + [1]))
    with pytest.raises(QuadratureError) as info:
        build_gamma_sequence(a, 0, 2, method="quadrature", nodes=2)
    err = info.value
    assert err.coarse != err.fine and err.label is not None


def test_closed_form_refuses_callable():
    a = SymbolSpec.radial(2, CallableProfile(lambda r: r[..., 0], 1))
    with pytest.raises(ValueError):
        gamma_radial(a, 0, 1, method="closed")


# sequences

def test_build_sequence_examples():
    gs = build_gamma_sequence(identity_symbol(SymbolClass.QUASI_RADIAL, Partition((2, 1))), 0, 3)
    assert len(gs.values) == 10 and all(v == pytest.approx(1) for v in gs.values.values())
    gs = build_gamma_sequence(SymbolSpec.radial(2, Monomial((1,))), 0, 2)
    assert [gs[(l,)] for l in range(3)] == pytest.approx([2 / 3, 3 / 4, 4 / 5])
    w = SymbolSpec.weighted(Partition((1, 1)), Monomial((1,)))
    gs = build_gamma_sequence(w, 0, 2)
    assert gs.alpha_dprime_independent
    assert gs[(0, 0)] == gs[(0, 1)] == gs[(0, 2)] and gs[(1, 0)] == gs[(1, 1)]


def test_sequence_values_per_label_match_multi_indices():
    a = SymbolSpec.quasi_radial(Partition((2, 1)), PolynomialInRho({(1, 1): 1.0, (2, 0): 0.3}, arity=2))
    gs = build_gamma_sequence(a, 0.5, 4)
    for alpha in enumerate_multi_indices(3, 4):
        assert gs.at_multi_index(alpha) == gs[group_norms(alpha, a.partition)]


def test_threaded_build_is_identical(monkeypatch):
    a = SymbolSpec.quasi_radial(Partition((1, 1, 1)), CallableProfile(lambda r: np.exp(-r.sum(-1)), 3))
    serial = build_gamma_sequence(a, 0.5, 3, workers=1)
    monkeypatch.setenv("BERGSPEC_THREADS", "4")
    threaded = build_gamma_sequence(a, 0.5, 3)
    assert serial.values == threaded.values


def test_symbol_validation():
    with pytest.raises(ValueError):
        SymbolSpec.quasi_radial(Partition((2, 1)), Monomial((1,)))
    with pytest.raises(ValueError):
        SymbolSpec(SymbolClass.RADIAL, Partition((1, 1)), Monomial((1,)))
    with pytest.raises(ValueError):
        SymbolSpec.weighted(Partition((2,)), Monomial(()))
    with pytest.raises(ValueError):
        SymbolSpec.quasi_radial(Partition((1, 1)), Monomial((-1.5, 0)))
    with pytest.raises(ValueError):
        gamma_radial(SymbolSpec.radial(1, Monomial((1,))), -1.0, 0)


def test_parse_symbol_forms():
    a = parse_symbol("radial:poly:1,-1", n=2)
    assert a.cls is SymbolClass.RADIAL and a.profile.coefficients == {(0,): 1.0, (1,): -1.0}
    b = parse_symbol("quasi:mono:2*1,0.5", Partition((2, 1)))
    assert b.profile.coeff == 2.0 and b.profile.exponents == (1.0, 0.5)
    c = parse_symbol("weighted:poly:1@1;0.5@0", Partition((1, 1)))
    assert c.profile.coefficients == {(0,): 0.5, (1,): 1.0}
    d = parse_symbol("sep:one", n=3)
    assert d.partition == Partition.maximal(3)
    assert parse_symbol(b.describe(), Partition((2, 1))) == b
    with pytest.raises(ValueError):
        parse_symbol("bogus:one", n=2)
