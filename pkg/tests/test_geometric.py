import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from gl3kuz.archimedean import TestFunction
from gl3kuz.errors import BadLevel, NotCoprime
from gl3kuz.geometric import (KuznetsovRHSSpec, assemble_rhs, norm_squared, sigma4_moduli, sigma4_moduli_param,
                              sigma5_moduli, sigma5_moduli_param, sigma6_moduli, sigma6_tail_ledger, tail_shape)
from gl3kuz.kloosterman import s_gl3


def test_spec_validation():
    with pytest.raises(BadLevel):
        KuznetsovRHSSpec(0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        KuznetsovRHSSpec(5, 0, 1, 1, 1)


def test_norm_matches_dense_grid():
    F = TestFunction((0.6, 1.5, 0.8, 1.9), plateau=0.2)
    a1, b1, a2, b2 = F.support
    y1 = np.linspace(a1, b1, 2001)
    y2 = np.linspace(a2, b2, 2001)
    Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
    g = np.abs(F(Y1, Y2)) ** 2 / (Y1 * Y2) ** 3
    dense = trapezoid(trapezoid(g, y2, axis=1), y1)
    assert norm_squared(F) > 0
    assert norm_squared(F) == pytest.approx(dense, rel=1e-6)
    assert norm_squared(TestFunction.zero()) == 0


def test_delta_kronecker():
    F = TestFunction()
    diag = assemble_rhs(KuznetsovRHSSpec(97, 1, 2, 1, 2, F))
    assert diag.delta_term == norm_squared(F)
    assert assemble_rhs(KuznetsovRHSSpec(97, 1, 2, 2, 1, F)).delta_term == 0
    assert assemble_rhs(KuznetsovRHSSpec(97, 1, 1, 1, 3, F)).delta_term == 0


def test_sigma5_empty_at_large_prime_level():
    for N in (11, 13):
        spec = KuznetsovRHSSpec(N, 1, 1, 1, 1)
        assert sigma5_moduli(spec) == []
        X = N ** 0.8
        dilated = KuznetsovRHSSpec(N, 1, 1, 1, 1, TestFunction().dilate(X, X))
        assert sigma5_moduli(dilated) == []


def test_modulus_conditions():
    spec = KuznetsovRHSSpec(2, 3, 1, 2, 5, TestFunction().dilate(20, 20))
    for D1, D2 in sigma4_moduli(spec):
        assert D1 % (2 * D2) == 0 and spec.n2 * D1 == spec.m1 * D2 ** 2
    for D1, D2 in sigma5_moduli(spec):
        assert D1 % 2 == 0 and D2 % D1 == 0 and spec.n1 * D2 == spec.m2 * D1 ** 2
    assert all(D1 % 2 == 0 and D2 % 2 == 0 for D1, D2 in sigma6_moduli(spec))


def test_parametrizations_agree():
    F = TestFunction().dilate(30, 30)
    for N, idx in ((1, (1, 1, 1, 1)), (2, (3, 2, 1, 4)), (3, (2, 6, 4, 4)), (5, (1, 3, 3, 1))):
        spec = KuznetsovRHSSpec(N, *idx, F)
        assert sorted(sigma4_moduli(spec)) == sorted(sigma4_moduli_param(spec))
        assert sorted(sigma5_moduli(spec)) == sorted(sigma5_moduli_param(spec))
    with pytest.raises(NotCoprime):
        sigma4_moduli_param(KuznetsovRHSSpec(2, 2, 1, 1, 1, F))


def test_tail_ledger():
    assert sigma6_tail_ledger(KuznetsovRHSSpec(5, 1, 1, 1, 1), 4.9, 4.9) == 0
    total = sigma6_tail_ledger(KuznetsovRHSSpec(5, 1, 1, 1, 1), 25, 25)
    direct = sum(abs(complex(s_gl3(1, 1, 1, 1, D1, D2, level=5)))
                 for D1 in range(5, 26, 5) for D2 in range(5, 26, 5))
    assert total == pytest.approx(direct, rel=1e-12)
    assert total == pytest.approx(284.72, abs=0.01)
    assert total / tail_shape(5, 25, 25) < 1
    with pytest.raises(NotCoprime):
        sigma6_tail_ledger(KuznetsovRHSSpec(5, 5, 1, 1, 1), 25, 25)
