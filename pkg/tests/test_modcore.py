import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gl3kuz.errors import NoSolution, NotCoprime
from gl3kuz.modcore import (ExpSum, divisors, e_frac, euler_phi, factorize, invmod, mobius,
                            primitive_root, ramanujan_sum, reduce_cyclotomic, solve_unimodular,
                            solve_unimodular_many, tau3, valuation)


def test_e_frac_basic_values():
    assert e_frac(0, 7) == 1
    assert e_frac(1, 2) == -1
    assert abs(e_frac(1, 3) + e_frac(2, 3) + 1) < 1e-15


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 500))
def test_e_frac_periodic_exactly(a, q):
    assert e_frac(a + q, q) == e_frac(a, q)


def test_invmod():
    assert invmod(3, 7).value == 5
    assert invmod(1, 11).value == 1
    with pytest.raises(NotCoprime):
        invmod(2, 4)


def test_solve_unimodular_examples():
    assert tuple(int(r) for r in solve_unimodular(1, 0, 9)) == (1, 0)
    assert tuple(int(r) for r in solve_unimodular(2, 3, 6)) == (2, 1)
    with pytest.raises(NoSolution):
        solve_unimodular(2, 4, 6)


def test_solve_unimodular_is_lexicographically_least():
    for D in range(1, 13):
        for B in range(D):
            for C in range(D):
                if math.gcd(math.gcd(B, C), D) != 1:
                    continue
                Y, Z = solve_unimodular(B, C, D)
                best = min((y, z) for y in range(D) for z in range(D) if (y * B + z * C - 1) % D == 0)
                assert (Y.value, Z.value) == best


def test_vectorised_solver_solves():
    for D in (1, 6, 12, 25):
        B, C = np.meshgrid(np.arange(D), np.arange(D))
        B, C = B.ravel(), C.ravel()
        keep = np.gcd(np.gcd(B, C), D) == 1
        Y, Z = solve_unimodular_many(B[keep], C[keep], D)
        assert np.all((Y * B[keep] + Z * C[keep] - 1) % D == 0)


def test_valuation():
    assert valuation(12, 2) == 2
    assert valuation(0, 5) == math.inf
    assert valuation(7, 7) == 1
    assert valuation(-18, 3) == 2


def test_ramanujan_examples():
    assert ramanujan_sum(5, 5) == 4
    assert ramanujan_sum(5, 1) == -1
    assert ramanujan_sum(6, 3) == -2


def test_ramanujan_matches_unit_sum():
    for q in range(1, 201):
        units = [a for a in range(q) if math.gcd(a, q) == 1]
        ph = np.exp(2j * np.pi * np.outer(np.arange(-200, 201), units) / q).sum(axis=1)
        want = [ramanujan_sum(q, n) for n in range(-200, 201)]
        assert np.max(np.abs(ph - want)) < 1e-9


def test_arithmetic_functions():
    assert factorize(360) == ((2, 3), (3, 2), (5, 1))
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert euler_phi(36) == 12
    assert tau3(125) == 10
    assert primitive_root(5) == 2 and primitive_root(7) == 3


def test_cyclotomic_reduction_detects_zero():
    # sum of all primitive 5th roots plus 1 vanishes
    assert reduce_cyclotomic([1, 1, 1, 1, 1], 5) == [0, 0, 0, 0]
    assert reduce_cyclotomic([3, 1, 1, 1, 1], 5) == [2, 0, 0, 0]
    s = ExpSum.from_counts([1, 1, 1, 1, 1], 5)
    assert s.is_exact_zero()
    assert ExpSum.from_counts([3, 1, 1, 1, 1], 5).exact_int() == 2


@settings(max_examples=50)
@given(st.lists(st.integers(-5, 5), min_size=12, max_size=12))
def test_exact_and_float_accumulation_agree(counts):
    s = ExpSum.from_counts(counts, 12)
    f = ExpSum.from_numerators(np.repeat(np.arange(12), np.abs(counts)), 12,
                               weights=np.repeat(np.sign(counts), np.abs(counts)), exact=False)
    assert abs(s.approx - f.approx) <= s.abs_error + f.abs_error + 1e-12
