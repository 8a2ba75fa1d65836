import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gl3kuz.errors import BadLevel, BadModuli, NotCoprimeSplit, UnsupportedCell
from gl3kuz.kloosterman import (CellSumSpec, KloostermanSpec, bound_larsen, bound_stevens, cell_sum_plucker,
                                classical_kloosterman, convert_cell, enumerate_quadruples, multiplicative_split,
                                prime_level_closed_form, quadruple_table, s_gl3, s_gl3_table, s_tilde)
from gl3kuz.modcore import ramanujan_sum, valuation


def e(x):
    return cmath.exp(2j * math.pi * x)


def brute_quadruples(N, D1, D2):
    # representatives 1 <= B_j <= D_j: the congruence is mod D1 D2, so the choice matters
    out = []
    for B1, C1, B2, C2 in itertools.product(range(1, D1 + 1), range(D1), range(1, D2 + 1), range(D2)):
        if B1 % N or math.gcd(math.gcd(B1, C1), D1) != 1 or math.gcd(math.gcd(B2, C2), D2) != 1:
            continue
        if (D1 * C2 + B1 * B2 + D2 * C1) % (D1 * D2) == 0:
            out.append((B1 % D1, C1, B2 % D2, C2))
    return out


def brute_tilde(m1, n1, n2, D1, D2):
    E = D2 // D1
    tot = 0
    for C1 in range(D1):
        if math.gcd(C1, D1) != 1:
            continue
        c1bar = pow(C1, -1, D1) if D1 > 1 else 0
        for C2 in range(D2):
            if math.gcd(C2, E) != 1:
                continue
            c2bar = pow(C2, -1, E) if E > 1 else 0
            tot += e(n1 * c1bar * C2 / D1 + n2 * c2bar / E + m1 * C1 / D1)
    return tot


def test_classical_examples():
    assert classical_kloosterman(1, 1, 2).exact_int() == 1
    assert classical_kloosterman(1, 1, 3).exact_int() == -1
    for c in (1, 7, 12, 30):
        assert classical_kloosterman(0, 0, c).exact_int() == sum(math.gcd(x, c) == 1 for x in range(c))


def test_classical_weil_bound():
    for p in (2, 3, 5, 7, 11, 101, 197, 199):
        assert abs(classical_kloosterman(1, 1, p)) <= 2 * math.sqrt(p) + 1e-12


def test_tilde_examples():
    assert s_tilde(3, 4, 5, 1, 1).exact_int() == 1
    assert s_tilde(1, 1, 1, 1, 5).exact_int() == -1
    assert abs(complex(s_tilde(1, 1, 1, 2, 4)) - brute_tilde(1, 1, 1, 2, 4)) < 1e-12
    with pytest.raises(BadModuli):
        s_tilde(1, 1, 1, 3, 4)


def test_tilde_matches_brute_force():
    for D1, D2 in ((2, 6), (3, 9), (4, 8), (3, 12), (5, 10)):
        for m1, n1, n2 in itertools.product((-1, 0, 2), repeat=3):
            assert abs(complex(s_tilde(m1, n1, n2, D1, D2)) - brute_tilde(m1, n1, n2, D1, D2)) < 1e-10


def test_gl3_prime_level_examples():
    assert s_gl3(1, 5, 5, 1, 5, 5, level=5).exact_int() == 20
    assert s_gl3(1, 1, 1, 1, 5, 5, level=5).exact_int() == 5
    assert s_gl3(1, 7, 7, 1, 7, 7, level=7).exact_int() == 42
    assert s_gl3(1, 1, 1, 1, 7, 7, level=7).exact_int() == 7
    assert s_gl3(1, 1, 7, 1, 7, 7, level=7).exact_int() == 0


def test_gl3_degenerates_to_classical():
    for c in (1, 2, 5, 6, 9):
        for m1, m2, n1, n2 in ((1, 1, 1, 1), (2, -1, 3, 0), (0, 4, -2, 1)):
            got = complex(s_gl3(m1, m2, n1, n2, c, 1))
            assert abs(got - complex(classical_kloosterman(m1, n1, c))) < 1e-10


def test_gl3_rejects_bad_level():
    with pytest.raises(BadLevel):
        s_gl3(1, 1, 1, 1, 4, 6, level=4)


def test_quadruple_counts():
    assert len(list(enumerate_quadruples(1, 1, 1))) == 1
    # the documented count of 30 is wrong: both the brute force and the zero-index sum give 20
    assert len(quadruple_table(5, 5, 5)) == 20
    assert s_gl3(0, 0, 0, 0, 5, 5, level=5).exact_int() == 20
    for N, D1, D2 in ((2, 2, 4), (1, 6, 4), (3, 9, 3), (2, 8, 4)):
        got = sorted((q.B1.value % D1, q.C1.value, q.B2.value % D2, q.C2.value)
                     for q in enumerate_quadruples(N, D1, D2))
        assert got == sorted(brute_quadruples(N, D1, D2))


def test_quadruples_satisfy_constraints():
    for N, D1, D2 in ((1, 8, 4), (2, 8, 16), (3, 9, 27), (5, 25, 5)):
        q = quadruple_table(N, D1, D2)
        assert np.all((D1 * q.C2 + q.B1 * q.B2 + D2 * q.C1) % (D1 * D2) == 0)
        assert np.all(q.B1 % N == 0)
        assert np.all((q.Y1 * q.B1 + q.Z1 * q.C1) % D1 == 1 % D1)
        assert np.all((q.Y2 * q.B2 + q.Z2 * q.C2) % D2 == 1 % D2)
        assert q.B1.min() >= 1 and q.B1.max() <= D1 and q.B2.min() >= 1 and q.B2.max() <= D2
        p = {8: 2, 9: 3, 25: 5}[D1]
        a1, a2 = round(math.log(D1, p)), round(math.log(D2, p))
        assert all(valuation(int(b), p) <= a2 for b in q.B1)
        assert all(valuation(int(b), p) <= a1 for b in q.B2)


def _summand(q, i, Y1, Z1, Y2, Z2, m1, m2, n1, n2):
    D1, D2 = q.D1, q.D2
    u1 = (Y1 * D2 - Z1 * int(q.B2[i])) % D1
    u2 = (Y2 * D1 - Z2 * int(q.B1[i])) % D2
    return e((m1 * int(q.B1[i]) + n1 * u1) / D1 + (m2 * int(q.B2[i]) + n2 * u2) / D2)


def test_summand_independent_of_auxiliaries():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 150:
        N = int(rng.choice([1, 2, 3]))
        D1 = N * int(rng.integers(1, 50 // N + 1))
        D2 = N * int(rng.integers(1, 50 // N + 1))
        q = quadruple_table(N, D1, D2)
        if len(q) == 0:
            continue
        i = int(rng.integers(len(q)))
        m1, m2, n1, n2 = (int(v) for v in rng.integers(-20, 20, 4))
        base = _summand(q, i, int(q.Y1[i]), int(q.Z1[i]), int(q.Y2[i]), int(q.Z2[i]), m1, m2, n1, n2)
        # every other solution of Y B + Z C = 1, found by brute force
        B1, C1, B2, C2 = (int(getattr(q, f)[i]) for f in ("B1", "C1", "B2", "C2"))
        sols1 = [(y, z) for y in range(D1) for z in range(D1) if (y * B1 + z * C1 - 1) % D1 == 0]
        sols2 = [(y, z) for y in range(D2) for z in range(D2) if (y * B2 + z * C2 - 1) % D2 == 0]
        for (y1, z1), (y2, z2) in zip(sols1[:: max(1, len(sols1) // 4)], sols2[:: max(1, len(sols2) // 4)]):
            assert abs(_summand(q, i, y1, z1, y2, z2, m1, m2, n1, n2) - base) < 1e-10
        checked += 1


def test_periodicity_transpose_signs():
    for N, D1, D2 in ((1, 4, 6), (2, 4, 2), (3, 3, 9)):
        for m1, m2, n1, n2 in itertools.product((-1, 1, 2), repeat=4):
            S = s_gl3(m1, m2, n1, n2, D1, D2, level=N)
            assert S.exact_equals(s_gl3(m1 + D1, m2 - D2, n1 + 2 * D1, n2 + D2, D1, D2, level=N))
            if N == 1:
                assert S.exact_equals(s_gl3(n2, n1, m2, m1, D2, D1))
            assert S.exact_equals(s_gl3(m1, -m2, n1, -n2, D1, D2, level=N))
            conj = s_gl3(-m1, -m2, -n1, -n2, D1, D2, level=N)
            assert abs(complex(S).conjugate() - complex(conj)) < 1e-10


def test_documented_sign_law_fails():
    # s(m1, m2, n1, n2) = s(-m1, m2, n1, -n2) does not hold in general
    assert not s_gl3(-3, 0, 3, 0, 8, 4, level=2).exact_equals(s_gl3(3, 0, 3, 0, 8, 4, level=2))


def test_twist_law():
    for D1, D2 in ((5, 7), (8, 9), (4, 10)):
        for a, b in ((3, 7), (11, 13)):
            if math.gcd(D1 * D2, a * b) != 1:
                continue
            for m1, m2, n1, n2 in ((1, 2, 3, 4), (1, 1, 1, 1), (0, 3, 2, 5)):
                assert s_gl3(a * m1, b * m2, n1, n2, D1, D2).exact_equals(s_gl3(m1, m2, a * n1, b * n2, D1, D2))


def test_prime_level_closed_form():
    for N in (2, 3, 5, 7, 11):
        for n1 in range(N):
            for m2 in range(N):
                want = N - 1 + ramanujan_sum(N, n1) * ramanujan_sum(N, m2)
                assert prime_level_closed_form(N, 1, m2, n1, 1) == want
                assert s_gl3(1, m2, n1, 1, N, N, level=N).exact_int() == want


def test_table_matches_direct():
    T = s_gl3_table(2, 4, 6)
    for m1, n1, m2, n2 in ((1, 3, 5, 2), (0, 0, 0, 0), (2, 1, 4, 3)):
        assert abs(T[m1, n1, m2, n2] - complex(s_gl3(m1, m2, n1, n2, 4, 6, level=2))) < 1e-9


def test_multiplicative_split():
    spec = KloostermanSpec(1, 1, 1, 1, 1, 1, 1)
    a, b = multiplicative_split(spec, 1, 1, 1, 1)
    assert complex(a.value()) * complex(b.value()) == 1
    for spec, split in ((KloostermanSpec(1, 1, 2, 3, 1, 6, 6), (2, 3, 2, 3)),
                        (KloostermanSpec(2, 3, 1, 1, 5, 12, 18), (4, 3, 2, 9)),
                        (KloostermanSpec(3, 1, 1, 2, 2, 15, 6), (3, 5, 3, 2))):
        f, g = multiplicative_split(spec, *split)
        assert abs(complex(f.value()) * complex(g.value()) - complex(spec.value())) < 1e-9
    with pytest.raises(NotCoprimeSplit):
        multiplicative_split(KloostermanSpec(1, 1, 1, 1, 1, 4, 4), 2, 2, 2, 2)


def test_bounds_positive_and_examples():
    for N in (3, 5, 7):
        assert bound_stevens(1, 1, 1, 1, N, N) == pytest.approx(N ** 1.5)
        assert abs(s_gl3(1, 1, 1, 1, N, N, level=N)) / N ** 1.5 <= 1
    for D2 in range(1, 20):
        assert bound_larsen(1, 1, 1, 1, D2) >= abs(ramanujan_sum(D2, 1))
    assert bound_larsen(2, 3, 4, 3, 12) > 0


def test_cell_conversions():
    assert abs(cell_sum_plucker(CellSumSpec("w6", 1, 1, 1, 1, 3, 3, level=2))) == 0
    assert abs(cell_sum_plucker(CellSumSpec("w5", 1, 1, 1, 1, 2, 5))) == 0
    with pytest.raises(UnsupportedCell):
        CellSumSpec("w7", 1, 1, 1, 1, 1, 1)
    for n1, n2, m1, m2 in itertools.product((-1, 1, 2), repeat=4):
        spec = CellSumSpec("w6", n1, n2, m1, m2, 2, 2, level=2)
        want = s_gl3(m2, -m1, n1, -n2, 2, 2, level=2)
        assert abs(complex(cell_sum_plucker(spec)) - complex(want)) < 1e-8
        assert abs(complex(convert_cell(spec).value()) - complex(want)) < 1e-12


def test_w5_w4_cells_match_tilde():
    # w5: n1 A2 = m2 B1^2 with N | B1 | A2
    spec = CellSumSpec("w5", 2, 3, 1, 2, 2, 4, level=2)
    conv = convert_cell(spec)
    assert conv.delta
    assert abs(complex(cell_sum_plucker(spec)) - complex(s_tilde(1, 2, 3, 2, 4))) < 1e-8
    spec = CellSumSpec("w4", 1, 2, 2, 1, 4, 2, level=1)
    assert convert_cell(spec).delta
    assert abs(complex(cell_sum_plucker(spec)) - complex(s_tilde(-1, -2, -1, 2, 4))) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(1, 4, 6), (2, 4, 2), (3, 6, 3), (1, 5, 5)]),
       st.lists(st.integers(-30, 30), min_size=4, max_size=4))
def test_exact_and_float_modes_agree(shape, idx):
    N, D1, D2 = shape
    ex = s_gl3(*idx, D1, D2, level=N)
    fl = s_gl3(*idx, D1, D2, level=N, exact=False)
    assert abs(ex.approx - fl.approx) <= ex.abs_error + fl.abs_error
