import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gl3kuz.errors import AllZeroFrequencies, BadTwist, NotCoprimeSplit, NotPrimitive, TooLarge
from gl3kuz.fourier import (DirichletCharacter, TransformSpec, bound_coro, bound_peter1, bound_twist, char_eval,
                            chartwist_lhs, chartwist_rhs, gauss_sum, pair_sum_closed, pair_sum_direct,
                            primitive_characters, s_hat_fast, s_hat_multiplicative, s_hat_naive, s_hat_semifast,
                            simple_pair_abs, simple_pair_sum)
from gl3kuz.kloosterman import s_gl3


def e(x):
    return cmath.exp(2j * math.pi * x)


def brute_transform(D1, D2, freq, a=1, b=1, d=1):
    x1, x2, y1, y2, z1, z2 = freq
    tot = 0
    for n1, m1, l1 in itertools.product(range(D1), repeat=3):
        for n2, m2, l2 in itertools.product(range(D2), repeat=3):
            S = complex(s_gl3(a * m1 * d, b * n2 * l2, n1 * l1, m2 * d, D1, D2, exact=False))
            tot += S * e(-(n1 * x1 + m1 * y1 + l1 * z1) / D1 - (n2 * x2 + m2 * y2 + l2 * z2) / D2)
    return tot / (D1 * D2) ** 3


def test_characters():
    chi = DirichletCharacter(5, 4, 1)
    assert char_eval(chi, 1) == 1
    assert chi(5) == 0
    assert abs(chi(2) - 1j) < 1e-15
    for x, y in itertools.product(range(1, 5), repeat=2):
        assert abs(chi(x * y) - chi(x) * chi(y)) < 1e-14
    assert chi.is_primitive and not chi.is_quadratic
    assert not DirichletCharacter(5, 4, 0).is_primitive
    assert DirichletCharacter(5, 4, 2).is_quadratic
    assert [c.order for c in primitive_characters(7)] == [2, 3, 3, 6, 6]
    assert primitive_characters(3, nonquadratic=True) == []
    with pytest.raises(BadTwist):
        DirichletCharacter(6, 2)


def test_gauss_sums():
    assert abs(gauss_sum(DirichletCharacter(5, 2)) - math.sqrt(5)) < 1e-12
    for p in (3, 5, 7, 11, 13):
        for chi in primitive_characters(p):
            assert abs(abs(gauss_sum(chi)) - math.sqrt(p)) < 1e-12
    with pytest.raises(NotPrimitive):
        gauss_sum(DirichletCharacter(5, 4, 0))


def test_transform_trivial_moduli():
    for tier in (s_hat_naive, s_hat_fast, s_hat_semifast):
        assert abs(complex(tier(TransformSpec(1, 1))) - 1) < 1e-15


def test_transform_matches_six_fold_loop():
    for freq in ((0,) * 6, (1, 0, 1, 1, 0, 1), (1, 1, 1, 1, 1, 1)):
        want = brute_transform(2, 2, freq)
        for tier in (s_hat_naive, s_hat_fast, s_hat_semifast):
            assert abs(complex(tier(TransformSpec(2, 2, freq))) - want) < 1e-12
    freq = (1, 2, 0, 1, 2, 0)
    want = brute_transform(3, 2, freq, a=2)
    assert abs(complex(s_hat_fast(TransformSpec(3, 2, freq, a=2))) - want) < 1e-12


def test_fast_matches_naive_random():
    rng = np.random.default_rng(3)
    for D1, D2 in ((4, 4), (6, 5), (8, 3), (7, 7)):
        for _ in range(10):
            freq = tuple(int(v) if rng.random() > 0.5 else 0 for v in rng.integers(0, 8, 6))
            spec = TransformSpec(D1, D2, freq, a=1, b=1, d=int(rng.integers(1, 4)))
            n, f = s_hat_naive(spec), s_hat_fast(spec)
            assert abs(n.approx - f.approx) <= 1e-6 * max(abs(n.approx), 1 / (D1 * D2))


def test_twisted_zero_frequency_vanishes():
    chi = DirichletCharacter(5, 4, 1)
    v = s_hat_fast(TransformSpec(125, 125, twist=chi))
    assert abs(v) <= 1e-8 * 5 ** 5
    # nonzero at a lattice frequency, so the zero above is not an artefact
    assert abs(s_hat_fast(TransformSpec(125, 125, (25, 25, 25, 50, 25, 25), twist=chi))) > 0.5


def test_twisted_fast_matches_semifast():
    for chi in (DirichletCharacter(5, 4, 1), DirichletCharacter(5, 4, 2)):
        for freq in ((25, 25, 25, 50, 25, 25), (25, 0, 50, 75, 0, 100), (1, 0, 0, 0, 0, 0)):
            spec = TransformSpec(125, 125, freq, a=2, b=3, twist=chi)
            assert abs(complex(s_hat_fast(spec)) - complex(s_hat_semifast(spec))) < 1e-9


def test_twist_preconditions():
    chi = DirichletCharacter(5, 4, 1)
    with pytest.raises(BadTwist):
        TransformSpec(25, 125, twist=chi)
    with pytest.raises(BadTwist):
        TransformSpec(125, 125, d=5, twist=chi)
    with pytest.raises(TooLarge):
        s_hat_naive(TransformSpec(125, 125, twist=chi))


def test_multiplicative_transform():
    spec = TransformSpec(1, 1)
    assert abs(complex(s_hat_multiplicative(spec, 1, 1, 1, 1)) - 1) < 1e-15
    for freq in ((1, 2, 3, 4, 5, 0), (0, 1, 0, 2, 3, 1), (2, 2, 2, 2, 2, 2)):
        spec = TransformSpec(6, 6, freq, a=5, b=1, d=1)
        got = s_hat_multiplicative(spec, 2, 3, 2, 3, evaluator=s_hat_naive)
        assert abs(complex(got) - complex(s_hat_naive(spec))) < 1e-8
    with pytest.raises(NotCoprimeSplit):
        s_hat_multiplicative(TransformSpec(4, 4), 2, 2, 2, 2)


def test_twisted_multiplicative():
    chi = DirichletCharacter(5, 4, 1)
    for t1, t2 in ((2, 3), (3, 2)):
        spec = TransformSpec(125 * t1, 125 * t2, (25 * t1, 25 * t2, 25 * t1, 50 * t2, 0, 25), twist=chi, a=1, b=1)
        prod = s_hat_multiplicative(spec, t1, 125, t2, 125)
        assert abs(complex(prod) - complex(s_hat_fast(spec))) < 1e-6 * max(1.0, abs(prod))


def test_bound_examples():
    assert bound_peter1(2, 3, 3, (1, 0, 0, 0, 0, 0)).bound_value == 3
    assert bound_twist(5, 3, 3, (1, 0, 0, 0, 0, 0)).bound_value == 3 * 5 ** 5
    assert bound_coro(5, 125, 125, (1, 0, 0, 0, 0, 0)).bound_value == pytest.approx(10 * 5 ** 5)
    with pytest.raises(AllZeroFrequencies):
        bound_peter1(2, 1, 1, (0,) * 6)


def test_peter1_small_grid():
    for a1, a2 in ((1, 1), (1, 2), (2, 2)):
        D1, D2 = 2 ** a1, 2 ** a2
        for freq in itertools.product(range(3), repeat=6):
            if not any(freq):
                continue
            v = abs(s_hat_fast(TransformSpec(D1, D2, freq)))
            assert v <= bound_peter1(2, a1, a2, freq).bound_value * (1 + 1e-9)


def test_pair_sum_closed_form():
    for D in (1, 4, 6, 9, 12):
        for x, z in itertools.product(range(D), repeat=2):
            closed = pair_sum_closed(x, z, D)
            for u in range(D):
                assert abs(closed[u] - complex(pair_sum_direct(u, x, z, D))) < 1e-9


def test_simple_identity():
    for q, alpha in ((2, 3), (3, 2), (5, 1)):
        D = q ** alpha
        for B in range(1, D + 1):
            for x, z in ((0, 0), (q, 0), (1, q), (q, q ** 2)):
                got = simple_pair_sum(B, x, z, q, alpha)
                assert abs(abs(got) - simple_pair_abs(B, x, z, q, alpha)) < 1e-9


def test_chartwist_identity():
    rng = np.random.default_rng(5)
    for p, alpha in ((5, 2), (7, 2), (5, 3)):
        S = rng.normal(size=p ** alpha) + 1j * rng.normal(size=p ** alpha)
        for chi in primitive_characters(p):
            for x in (0, 1, 7, p ** alpha - 3):
                assert abs(chartwist_lhs(chi, S, x, alpha) - chartwist_rhs(chi, S, x, alpha)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=6, max_size=6), st.sampled_from([(3, 3), (4, 2), (5, 4)]))
def test_fast_and_semifast_agree(freq, moduli):
    spec = TransformSpec(*moduli, tuple(freq))
    f, s = s_hat_fast(spec), s_hat_semifast(spec)
    assert abs(f.approx - s.approx) <= 1e-9
