"""Tests for words, predicates, characteristic/order words and factors."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithmso.errors import OracleUnknown
from arithmso.numbers import LogLinearForm, log_sign
from arithmso.words import (
    Alphabet,
    InfiniteWord,
    Predicate,
    RealSequence,
    bitvec_alphabet,
    characteristic_word,
    factor_complexity_prefix,
    occurs_in_prefix,
    order_word,
    order_word_of_sequences,
    recurrence_bound,
)


def fib_word(n: int) -> tuple:
    s = (0,)
    while len(s) < n:
        s = tuple(x for a in s for x in ((0, 1) if a == 0 else (0,)))
    return s[:n]


def oracle_from_prefix(prefix: tuple):
    def oracle(f):
        f = tuple(f)
        return any(prefix[i:i + len(f)] == f for i in range(len(prefix) - len(f)))
    return oracle


@pytest.fixture
def fibonacci():
    p = fib_word(4000)
    return InfiniteWord(
        Alphabet((0, 1)),
        lambda n: p[n],
        {"occurrence_oracle": oracle_from_prefix(p), "uniformly_recurrent": True},
    )


class TestAlphabet:
    def test_bitvec(self):
        a = bitvec_alphabet(2)
        assert a.letters == ((0, 0), (0, 1), (1, 0), (1, 1))
        assert a.index((1, 0)) == 2

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            Alphabet([0, 0])


class TestInfiniteWord:
    def test_periodic(self):
        w = InfiniteWord.from_periodic((1,), (0, 1))
        assert w.prefix(6) == (1, 0, 1, 0, 1, 0)
        assert w[2:5] == (1, 0, 1)

    def test_suffix_periodic_metadata(self):
        w = InfiniteWord.from_periodic((1,), (0, 1))
        s = w.suffix(2)
        u, v = s.metadata["ultimately_periodic"]
        assert s.prefix(4) == (1, 0, 1, 0)
        assert InfiniteWord.from_periodic(u, v).prefix(4) == s.prefix(4)

    def test_occurs_periodic(self):
        w = InfiniteWord.from_periodic((), (0, 1))
        assert w.occurs((1, 0))
        assert not w.occurs((1, 1))

    def test_occurs_without_oracle_raises(self):
        w = InfiniteWord(Alphabet((0, 1)), lambda n: 0)
        with pytest.raises(OracleUnknown):
            w.occurs((0,))


class TestPredicate:
    def test_geometric_enumeration(self):
        p = Predicate.geometric(3, 2)
        assert [p.element(i) for i in range(4)] == [3, 6, 12, 24]
        assert p.member(12) and not p.member(13)
        assert p.elements_below(25) == [3, 6, 12, 24]

    def test_geometric_procyclic(self):
        # [DERIVED] 2^n mod 10 cycles 2,4,8,6 from n=1 with period 4
        p = Predicate.geometric(1, 2)
        N, per = p.procyclic(10)
        assert per == 4
        for n in range(N, N + 20):
            assert pow(2, n + per, 10) == pow(2, n, 10)

    def test_non_increasing_rejected(self):
        p = Predicate(lambda: iter([3, 3, 4]))
        with pytest.raises(ValueError):
            p.element(1)


class TestCharacteristicAndOrderWords:
    def test_characteristic_2_3(self):
        # [DERIVED] positions 0..9 for {2^n} and {3^n}:
        # 1 is in both, 2/4/8 in the first, 3/9 in the second
        cw = characteristic_word([Predicate.geometric(1, 2), Predicate.geometric(1, 3)])
        assert cw.prefix(10) == (
            (0, 0), (1, 1), (1, 0), (0, 1), (1, 0),
            (0, 0), (0, 0), (0, 0), (1, 0), (0, 1),
        )

    def test_order_word_2_3(self):
        # [DERIVED] merged values 1,2,3,4,8,9,16,27 give the letters below
        ow = order_word([Predicate.geometric(1, 2), Predicate.geometric(1, 3)])
        assert ow.prefix(8) == (
            (1, 1), (1, 0), (0, 1), (1, 0), (1, 0), (0, 1), (1, 0), (0, 1),
        )
        vals = [ow.metadata["values"](n) for n in range(8)]
        assert vals == [1, 2, 3, 4, 8, 9, 16, 27]

    def test_order_word_of_sequences_matches_integer_merge(self):
        def geom(rho):
            return RealSequence(
                lambda n: LogLinearForm(0, [(Fraction(n), Fraction(rho))]),
                lambda a, b: log_sign(a - b),
            )

        ows = order_word_of_sequences([geom(2), geom(3)])
        ow = order_word([Predicate.geometric(1, 2), Predicate.geometric(1, 3)])
        assert ows.prefix(30) == ow.prefix(30)


class TestFactors:
    def test_occurs_in_prefix(self):
        w = InfiniteWord.from_periodic((), (0, 1))
        assert occurs_in_prefix(w, (1, 0), 6) == [1, 3]

    def test_recurrence_bound_periodic(self):
        w = InfiniteWord.from_periodic((), (0, 1))
        assert recurrence_bound(w, 1) == 2

    def test_recurrence_bound_fibonacci(self, fibonacci):
        # [DERIVED] the Fibonacci word has no factor 11, so every window of
        # length 3 contains both letters; 00 forbids R(1)=2
        assert recurrence_bound(fibonacci, 1) == 3

    def test_factor_complexity_fibonacci(self, fibonacci):
        # Sturmian words have complexity n + 1
        for n in range(1, 8):
            assert factor_complexity_prefix(fibonacci, n, 2000) == n + 1

    @given(st.integers(1, 5), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_complexity_monotone_in_prefix(self, n, scale):
        w = InfiniteWord.from_periodic((0,), (0, 1, 1))
        small = factor_complexity_prefix(w, n, n + 3 * scale)
        large = factor_complexity_prefix(w, n, n + 3 * scale + 9)
        assert small <= large
