"""Tests for Muller automata, journeys, the journey monoid and transducers."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithmso.errors import OutputFinite
from arithmso.automata import (
    Journey,
    MullerAcceptance,
    MullerAutomaton,
    Transducer,
    accept_lasso,
    bottom_sccs,
    decompose_run,
    idempotence_constants,
    journey_monoid,
    journey_of,
    run_transducer,
)
from arithmso.words import Alphabet, Factorization, InfiniteWord


def inf_ones_automaton() -> MullerAutomaton:
    """Accepts words over {0,1} with infinitely many 1s (state = last letter)."""
    alph = Alphabet((0, 1))
    delta = {(q, a): a for q in (0, 1) for a in (0, 1)}
    return MullerAutomaton((0, 1), 0, alph,
                           delta, MullerAcceptance.from_family([{1}, {0, 1}]))


def random_automaton(rng, nstates, nletters=2) -> MullerAutomaton:
    alph = Alphabet(tuple(range(nletters)))
    states = tuple(range(nstates))
    delta = {(q, a): rng.randrange(nstates) for q in states for a in alph}
    subsets = [frozenset(s) for r in range(1, nstates + 1)
               for s in itertools.combinations(states, r)]
    fam = [s for s in subsets if rng.random() < 0.4]
    return MullerAutomaton(states, 0, alph, delta,
                           MullerAcceptance.from_family(fam))


class TestJourney:
    def test_empty_word(self):
        A = inf_ones_automaton()
        j = journey_of(A, (), 1)
        assert (j.source, j.target, j.visited) == (1, 1, frozenset())

    def test_two_step_cycle(self):
        d = {("q0", "a"): "q1", ("q0", "b"): "q0",
             ("q1", "a"): "q1", ("q1", "b"): "q0"}
        A = MullerAutomaton(("q0", "q1"), "q0", Alphabet(("a", "b")), d,
                            MullerAcceptance.from_family([{"q0", "q1"}]))
        j = journey_of(A, ("a", "b"), "q0")
        assert (j.source, j.target) == ("q0", "q0")
        assert j.visited == frozenset({"q0", "q1"})

    @given(st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_composition_law(self, seed):
        rng = random.Random(seed)
        A = random_automaton(rng, rng.randint(1, 5))
        v = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
        w = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
        for q in A.states:
            jv = journey_of(A, v, q)
            assert jv.compose(journey_of(A, w, jv.target)) == journey_of(A, v + w, q)

    def test_invariant_enforced(self):
        with pytest.raises(ValueError):
            Journey(0, 1, frozenset({0}))


class TestJourneyMonoid:
    def test_single_state(self):
        d = {(0, 'a'): 0}
        A = MullerAutomaton((0,), 0, Alphabet(('a',)), d,
                            MullerAcceptance.from_family([{0}]))
        M = journey_monoid(A)
        assert len(M) <= 2

    def test_morphism_matches_direct_trace_exhaustive(self):
        # exhaustive over all words of length <= 6 for sample automata
        for seed in (1, 7, 23):
            rng = random.Random(seed)
            A = random_automaton(rng, rng.randint(2, 5))
            M = journey_monoid(A)
            for n in range(7):
                for w in itertools.product((0, 1), repeat=n):
                    x = M.morphism(w)
                    for q in A.states:
                        assert x.journey(q) == journey_of(A, w, q)

    def test_morphism_is_homomorphism(self):
        rng = random.Random(5)
        A = random_automaton(rng, 3)
        M = journey_monoid(A)
        for _ in range(100):
            v = tuple(rng.randrange(2) for _ in range(rng.randint(0, 6)))
            w = tuple(rng.randrange(2) for _ in range(rng.randint(0, 6)))
            assert M.morphism(v + w) == M.compose(M.morphism(v), M.morphism(w))

    def test_same_class_iff_same_journey_map(self):
        rng = random.Random(11)
        A = random_automaton(rng, 3)
        M = journey_monoid(A)
        for _ in range(100):
            v = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
            w = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
            same_map = all(
                journey_of(A, v, q) == journey_of(A, w, q) for q in A.states)
            assert (M.morphism(v) == M.morphism(w)) == same_map


class _AbstractMonoid:
    """Adapter so idempotence_constants can run on a bare monoid table."""

    def __init__(self, elements, identity, table):
        class E:
            def __init__(self, i):
                self.index = i

            def __eq__(self, other):
                return self.index == other.index

            def __hash__(self):
                return hash(self.index)

        self.elements = [E(i) for i in elements]
        self.identity = self.elements[identity]
        self._table = table

    def compose(self, x, y):
        return self.elements[self._table[(x.index, y.index)]]

    def power(self, x, k):
        out = self.identity
        for _ in range(k):
            out = self.compose(out, x)
        return out


class TestIdempotenceConstants:
    def test_cyclic_group_z3(self):
        M = _AbstractMonoid(range(3), 0, {(i, j): (i + j) % 3
                                          for i in range(3) for j in range(3)})
        L, m = idempotence_constants(M)
        assert m == 3 and L == 0

    def test_idempotent_monoid(self):
        # {identity, e} with e*e = e
        M = _AbstractMonoid(range(2), 0, {(0, 0): 0, (0, 1): 1,
                                          (1, 0): 1, (1, 1): 1})
        L, m = idempotence_constants(M)
        assert m == 1 and L <= 1

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_power_law_on_journey_monoids(self, seed):
        rng = random.Random(seed)
        A = random_automaton(rng, rng.randint(1, 4))
        M = journey_monoid(A)
        L, m = idempotence_constants(M)
        for x in M.elements:
            for k in range(L + m, 3 * (L + m) + 1):
                assert M.power(x, k) == M.power(x, L + ((k - L) % m))


class TestRunsAndSccs:
    def test_decompose_block_size_one(self):
        A = inf_ones_automaton()
        w = InfiniteWord.from_periodic((), (0, 1))
        js = decompose_run(A, w, Factorization(lambda n: (w.letter_at(n),)))
        got = [next(js) for _ in range(6)]
        assert all(len(j.visited) == 1 for j in got)
        assert all(got[i].target == got[i + 1].source for i in range(5))

    def test_coarsenings_agree(self):
        A = inf_ones_automaton()
        w = InfiniteWord.from_periodic((), (0, 1, 1))
        fine = decompose_run(A, w, Factorization(lambda n: (w.letter_at(n),)))
        coarse = decompose_run(A, w, Factorization(lambda n: w[3 * n:3 * n + 3]))
        for _ in range(5):
            j3 = next(coarse)
            merged = next(fine).compose(next(fine)).compose(next(fine))
            assert j3 == merged

    def test_bottom_flags(self):
        d = {(0, 'a'): 1, (1, 'a'): 1}
        A = MullerAutomaton((0, 1), 0, Alphabet(('a',)), d,
                            MullerAcceptance.from_family([{1}]))
        got = {frozenset(c): b for c, b in bottom_sccs(A)}
        assert got == {frozenset({0}): False, frozenset({1}): True}

    @given(st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_bottom_matches_reachability(self, seed):
        rng = random.Random(seed)
        A = random_automaton(rng, 8)
        comps = bottom_sccs(A)
        assert set().union(*(c for c, _ in comps)) == set(A.states)
        for comp, bottom in comps:
            leaves = any(A.step(q, a) not in comp for q in comp for a in A.alphabet)
            assert bottom == (not leaves)


class TestAcceptLasso:
    def test_inf_ones(self):
        A = inf_ones_automaton()
        assert accept_lasso(A, (), (1, 0))
        assert not accept_lasso(A, (), (0,))

    def test_unrolling_invariance(self):
        rng = random.Random(3)
        for _ in range(60):
            A = random_automaton(rng, rng.randint(1, 5))
            u = tuple(rng.randrange(2) for _ in range(rng.randint(0, 4)))
            v = tuple(rng.randrange(2) for _ in range(rng.randint(1, 4)))
            assert accept_lasso(A, u, v) == accept_lasso(A, u + v, v)

    @given(st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_agrees_with_long_simulation(self, seed):
        rng = random.Random(seed)
        A = random_automaton(rng, rng.randint(1, 5))
        u = tuple(rng.randrange(2) for _ in range(rng.randint(0, 4)))
        v = tuple(rng.randrange(2) for _ in range(rng.randint(1, 4)))
        # explicit simulation: long run, keep the tail infinity set
        word = list(u) + list(v) * (10 * len(A.states) + 10)
        q = A.initial
        trace = [q]
        for a in word:
            q = A.step(q, a)
            trace.append(q)
        # infinity set = states occurring in the final |Q|*|v| window repeatedly
        window = len(A.states) * len(v)
        tail = trace[-3 * window:]
        inf_set = {q for q in set(tail) if tail.count(q) >= 3}
        assert accept_lasso(A, u, v) == A.acceptance.contains(frozenset(inf_set))

    def test_complement_flips(self):
        A = inf_ones_automaton()
        assert not accept_lasso(A.complement(), (), (1, 0))
        assert accept_lasso(A.complement(), (), (0,))


class TestTransducer:
    def test_identity(self):
        T = Transducer((0,), 0, {(0, 0): (0, (0,)), (0, 1): (0, (1,))},
                       Alphabet((0, 1)))
        w = InfiniteWord.from_periodic((1,), (0, 1))
        assert run_transducer(T, w).prefix(7) == w.prefix(7)

    def test_delete_zeros(self):
        T = Transducer((0,), 0, {(0, 0): (0, ()), (0, 1): (0, (1,))},
                       Alphabet((1,)))
        w = InfiniteWord.from_periodic((), (0, 1))
        assert run_transducer(T, w).prefix(5) == (1,) * 5

    def test_duplicate(self):
        T = Transducer((0,), 0, {(0, 0): (0, (0, 0)), (0, 1): (0, (1, 1))},
                       Alphabet((0, 1)))
        w = InfiniteWord.from_periodic((0,), (1,))
        assert run_transducer(T, w).prefix(6) == (0, 0, 1, 1, 1, 1)

    def test_stall_surfaces(self):
        T = Transducer((0,), 0, {(0, 0): (0, ()), (0, 1): (0, ())},
                       Alphabet((0, 1)))
        w = InfiniteWord.from_periodic((), (0, 1))
        with pytest.raises(OutputFinite):
            run_transducer(T, w, progress_budget=50).letter_at(0)
