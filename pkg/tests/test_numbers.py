"""Tests for the exact-numerics kernel.

Oracle values were derived independently (hand computation of kernels of
exponent matrices, direct interval evaluation at high precision) and frozen
here.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithmso.errors import IncompleteBasis
from arithmso.numbers import (
    Config,
    LogLinearForm,
    RealAlgebraic,
    TriState,
    baker_gap_constant,
    integer_kernel,
    inv_log_independence,
    log_sign,
    mult_relation_basis,
    mult_relation_basis_algebraic,
)


# ---------------------------------------------------------------------------
# multiplicative relation bases


class TestMultRelationBasis:
    def test_2_3_6(self):
        # [DERIVED] 2 * 3 * 6^-1 = 1 is the only primitive relation.
        b = mult_relation_basis([2, 3, 6])
        assert b.complete
        assert b.vectors == ((1, 1, -1),)

    def test_4_8(self):
        # [DERIVED] 4^3 = 8^2 = 64.
        b = mult_relation_basis([4, 8])
        assert b.complete
        assert b.vectors == ((3, -2),)

    def test_independent(self):
        b = mult_relation_basis([2, 3])
        assert b.complete
        assert b.vectors == ()

    def test_rationals(self):
        # [DERIVED] (2/3)^1 * (3/2)^1 = 1.
        b = mult_relation_basis([Fraction(2, 3), Fraction(3, 2)])
        assert b.vectors == ((1, 1),)

    def test_relation_replay(self):
        # [TRIVIAL] every reported vector really is a relation
        zs = [6, 10, 15, 900]
        b = mult_relation_basis(zs)
        for vec in b.vectors:
            prod = Fraction(1)
            for z, e in zip(zs, vec):
                prod *= Fraction(z) ** e
            assert prod == 1

    def test_algebraic_perfect_power(self):
        # [DERIVED] sqrt(2)^2 = 2.
        s2 = RealAlgebraic.nth_root(2, 2)
        b = mult_relation_basis_algebraic([s2, RealAlgebraic.from_rational(2)])
        assert (2, -1) in b.vectors or (-2, 1) in b.vectors


class TestIntegerKernel:
    def test_kernel_rank(self):
        # columns = exponent vectors of 2,3,6 over primes (2,3)
        rows = [(1, 0, 1), (0, 1, 1)]
        basis = integer_kernel(rows, 3)
        assert len(basis) == 1

    @given(
        st.lists(
            st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)),
            min_size=1,
            max_size=4,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_kernel_vectors_annihilate(self, rows):
        # [TRIVIAL] kernel vectors must satisfy A x = 0
        basis = integer_kernel(rows, 3)
        for vec in basis:
            for row in rows:
                assert sum(v * a for v, a in zip(vec, row)) == 0


# ---------------------------------------------------------------------------
# sign of log-linear forms


def _form(constant, *terms):
    return LogLinearForm(constant, [(Fraction(c), b) for c, b in terms])


class TestLogSign:
    def test_exact_zero(self):
        # log 2 + log 3 - log 6 = 0
        f = _form(0, (1, 2), (1, 3), (-1, 6))
        assert log_sign(f) == 0

    def test_negative(self):
        # 3 log 2 - 2 log 3 = log(8/9) < 0
        f = _form(0, (3, 2), (-2, 3))
        assert log_sign(f) == -1

    def test_positive_with_constant(self):
        # 1 - log 2 > 0
        f = _form(1, (-1, 2))
        assert log_sign(f) == 1

    def test_constant_only(self):
        assert log_sign(_form(Fraction(-7, 3))) == -1
        assert log_sign(_form(0)) == 0

    def test_algebraic_base(self):
        # log sqrt(2) - (1/2) log 2 = 0 needs the algebraic relation basis
        s2 = RealAlgebraic.nth_root(2, 2)
        f = LogLinearForm(0, [(Fraction(1), s2), (Fraction(-1, 2), Fraction(2))])
        rel = mult_relation_basis_algebraic([s2, RealAlgebraic.from_rational(2)])
        assert log_sign(f, relations=rel) == 0

    def test_incomplete_basis_raises_on_potential_zero(self):
        s2 = RealAlgebraic.nth_root(2, 2)
        f = LogLinearForm(0, [(Fraction(1), s2), (Fraction(-1, 2), Fraction(2))])
        with pytest.raises(IncompleteBasis):
            log_sign(f, config=Config(precision_cap_bits=256))

    @given(
        st.integers(-3, 3),
        st.integers(-4, 4),
        st.integers(-4, 4),
        st.integers(-4, 4),
    )
    @settings(max_examples=80, deadline=None)
    def test_antisymmetry(self, a0, a1, a2, a3):
        f = _form(a0, (a1, 2), (a2, 3), (a3, 5))
        assert log_sign(-f) == -log_sign(f)

    @given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-6, 6))
    @settings(max_examples=60, deadline=None)
    def test_relation_invariance(self, a1, a2, k):
        # adding k * (log 2 + log 3 - log 6) never changes the sign
        f = _form(0, (a1, 2), (a2, 3))
        g = _form(0, (a1 + k, 2), (a2 + k, 3), (-k, 6))
        assert log_sign(f) == log_sign(g)


class TestInvLogIndependence:
    def test_2_3(self):
        assert inv_log_independence([2, 3]).is_true

    def test_2_3_6(self):
        # rank of the relation lattice is 1 = d - 2, still independent
        assert inv_log_independence([2, 3, 6]).is_true

    def test_2_4_false(self):
        # perfect-power pair forces 1/log 2, 1/log 4 rationally dependent
        assert inv_log_independence([2, 4]).is_false

    def test_2_3_5_unknown(self):
        # rank 0 < d - 2 = 1: independence is open, must not be claimed
        assert inv_log_independence([2, 3, 5]).is_unknown


# ---------------------------------------------------------------------------
# two-term gap constants


class TestBakerGapConstant:
    def test_same_sign_trivial(self):
        g = baker_gap_constant(2, 3, 1, 1)
        assert g.C == 0
        assert g.flag == "certified"

    def test_2_3_shape(self):
        g = baker_gap_constant(2, 3, 1, -1)
        assert g.flag == "heuristic"
        assert g.C >= 1
        # [DERIVED] axis minima are log 3 and log 2 for this instance
        assert abs(float(g.M1) - 1.0986122886681098) < 1e-6
        assert abs(float(g.M2) - 0.6931471805599453) < 1e-6

    def test_gap_inequality_on_grid(self):
        # [DERIVED] |2^a - 3^b| > max(2^a, 3^b) / (max(a,b)+2)^C on a grid
        g = baker_gap_constant(2, 3, 1, -1)
        for a in range(0, 31):
            for b in range(0, 20):
                diff = abs(2**a - 3**b)
                if diff == 0:
                    assert a == 0 and b == 0
                    continue
                n = max(a, b)
                assert diff * (n + 2) ** g.C > max(2**a, 3**b)

    def test_trusted_flag(self):
        cfg = Config(baker_trusted=True)
        g = baker_gap_constant(2, 3, 1, -1, config=cfg)
        assert g.flag == "certified"


# ---------------------------------------------------------------------------
# exact real arithmetic


class TestRealAlgebraic:
    def test_ordering(self):
        s2 = RealAlgebraic.nth_root(2, 2)
        s3 = RealAlgebraic.nth_root(3, 2)
        assert s2 < s3
        assert s2 * s2 == RealAlgebraic.from_rational(2)
        assert (s3 * s3 - s2 * s2).sign() == 1

    def test_rational_detection(self):
        r = RealAlgebraic.nth_root(8, 3)
        assert r.is_rational()
        assert r.as_fraction() == 2

    def test_enclosure_tightens(self):
        s2 = RealAlgebraic.nth_root(2, 2)
        lo, hi = s2.enclosure(200)
        assert hi - lo <= Fraction(1, 2**200)
        assert lo * lo <= 2 <= hi * hi


class TestTriState:
    def test_lattice(self):
        assert TriState.true("x").is_true
        assert TriState.false("x").is_false
        assert TriState.unknown("x").is_unknown
        assert not TriState.unknown("x").is_true
