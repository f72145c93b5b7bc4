"""Deterministic Muller automata, transducers, journeys, the journey monoid.

Acceptance is a membership object: explicit families for hand-built automata,
predicate-backed tests (with on-demand materialization) for compiled ones.
Complementation flips the membership test either way.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

from .errors import AlphabetMismatch, OutputFinite, ResourceExceeded
from .words import Alphabet, InfiniteWord

__all__ = [
    "MullerAcceptance",
    "MullerAutomaton",
    "Journey",
    "JourneyMonoid",
    "MonoidElement",
    "Transducer",
    "journey_of",
    "journey_monoid",
    "idempotence_constants",
    "decompose_run",
    "bottom_sccs",
    "accept_lasso",
    "run_transducer",
]


class MullerAcceptance:
    """Membership test for the accepting family F of infinity sets."""

    def __init__(self, test: Callable[[frozenset], bool],
                 family: Optional[frozenset] = None):
        self._test = test
        self._family = family

    @staticmethod
    def from_family(family: Iterable[Iterable]) -> "MullerAcceptance":
        fam = frozenset(frozenset(s) for s in family)
        return MullerAcceptance(lambda s: s in fam, fam)

    @staticmethod
    def from_predicate(test: Callable[[frozenset], bool]) -> "MullerAcceptance":
        return MullerAcceptance(test)

    def contains(self, infinity_set: Iterable) -> bool:
        return self._test(frozenset(infinity_set))

    def negate(self) -> "MullerAcceptance":
        return MullerAcceptance(lambda s: not self._test(s))

    def family(self, states: Sequence, cap: int = 1 << 22) -> frozenset:
        """The explicit family over the given state set (materialized once)."""
        if self._family is not None:
            return self._family
        states = list(states)
        if 2 ** len(states) > cap:
            raise ResourceExceeded(
                f"cannot materialize acceptance family over {len(states)} states")
        out = []
        for mask in range(1, 2 ** len(states)):
            s = frozenset(q for i, q in enumerate(states) if mask >> i & 1)
            if self._test(s):
                out.append(s)
        self._family = frozenset(out)
        return self._family


class MullerAutomaton:
    """(Q, q_init, delta, F) with total deterministic transitions."""

    def __init__(self, states: Iterable, initial, alphabet: Alphabet,
                 delta: Dict[tuple, object], acceptance: MullerAcceptance):
        self.states = tuple(states)
        self.initial = initial
        self.alphabet = alphabet
        self.delta = dict(delta)
        self.acceptance = acceptance
        state_set = set(self.states)
        if initial not in state_set:
            raise ValueError("initial state not in state set")
        for q in self.states:
            for a in alphabet:
                if (q, a) not in self.delta:
                    raise ValueError(f"delta not total: missing ({q!r}, {a!r})")
                if self.delta[(q, a)] not in state_set:
                    raise ValueError("delta leaves the state set")

    def step(self, q, a):
        try:
            return self.delta[(q, a)]
        except KeyError:
            raise AlphabetMismatch(f"letter {a!r} unknown") from None

    def run(self, w: Sequence, q=None):
        """The state reached from q (default initial) after reading w."""
        q = self.initial if q is None else q
        for a in w:
            q = self.step(q, a)
        return q

    def complement(self) -> "MullerAutomaton":
        return MullerAutomaton(self.states, self.initial, self.alphabet,
                               self.delta, self.acceptance.negate())

    def reachable(self) -> "MullerAutomaton":
        """Restriction to the states reachable from the initial state."""
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            q = stack.pop()
            for a in self.alphabet:
                r = self.step(q, a)
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        states = [q for q in self.states if q in seen]
        delta = {(q, a): self.delta[(q, a)] for q in states for a in self.alphabet}
        return MullerAutomaton(states, self.initial, self.alphabet, delta,
                               self.acceptance)


@dataclass(frozen=True)
class Journey:
    """(source, target, visited): visited covers the proper suffix of a path."""

    source: object
    target: object
    visited: frozenset

    def __post_init__(self):
        if self.visited and self.target not in self.visited:
            raise ValueError("target must lie in a non-empty visited set")

    @staticmethod
    def empty(q) -> "Journey":
        return Journey(q, q, frozenset())

    def compose(self, other: "Journey") -> "Journey":
        if self.target != other.source:
            raise ValueError("journeys do not chain")
        if not other.visited and other.source == other.target:
            return Journey(self.source, self.target, self.visited)
        return Journey(self.source, other.target, self.visited | other.visited)


def journey_of(A: MullerAutomaton, w: Sequence, q) -> Journey:
    """The journey the word w makes from state q."""
    source = q
    visited = set()
    for a in w:
        q = A.step(q, a)
        visited.add(q)
    return Journey(source, q, frozenset(visited))


class MonoidElement:
    """An equivalence class of words, keyed by its full journey map."""

    __slots__ = ("journeys", "key", "index")

    def __init__(self, journeys: Dict[object, Journey], order: Sequence):
        self.journeys = journeys
        self.key = tuple(journeys[q] for q in order)
        self.index: Optional[int] = None

    def journey(self, q) -> Journey:
        return self.journeys[q]

    def __eq__(self, other):
        return isinstance(other, MonoidElement) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


class JourneyMonoid:
    """Quotient of finite words by equality of journey maps."""

    def __init__(self, A: MullerAutomaton, elements: Sequence[MonoidElement],
                 identity: MonoidElement, generators: Dict[object, MonoidElement],
                 compose_table: Dict[tuple, MonoidElement]):
        self.automaton = A
        self.elements = tuple(elements)
        self.identity = identity
        self.generators = generators
        self._table = compose_table

    def compose(self, x: MonoidElement, y: MonoidElement) -> MonoidElement:
        return self._table[(x.index, y.index)]

    def morphism(self, w: Sequence) -> MonoidElement:
        x = self.identity
        for a in w:
            x = self.compose(x, self.generators[a])
        return x

    def power(self, x: MonoidElement, k: int) -> MonoidElement:
        out = self.identity
        base = x
        while k:
            if k & 1:
                out = self.compose(out, base)
            base = self.compose(base, base)
            k >>= 1
        return out

    def __len__(self):
        return len(self.elements)


def _compose_maps(order, x: MonoidElement, y: MonoidElement) -> MonoidElement:
    return MonoidElement(
        {q: x.journeys[q].compose(y.journeys[x.journeys[q].target]) for q in order},
        order,
    )


def journey_monoid(A: MullerAutomaton, max_elements: int = 1 << 20) -> JourneyMonoid:
    """Closure of the letter journey-maps under composition."""
    order = A.states
    identity = MonoidElement({q: Journey.empty(q) for q in order}, order)
    gens = {
        a: MonoidElement({q: journey_of(A, (a,), q) for q in order}, order)
        for a in A.alphabet
    }
    elements: Dict[MonoidElement, MonoidElement] = {identity: identity}
    for g in gens.values():
        elements.setdefault(g, g)
    frontier = list(elements)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens.values():
                y = _compose_maps(order, x, g)
                if y not in elements:
                    elements[y] = y
                    nxt.append(y)
        frontier = nxt
        if len(elements) > max_elements:
            raise ResourceExceeded("journey monoid exceeded the element cap")
    elems = list(elements)
    for i, x in enumerate(elems):
        x.index = i
    table = {}
    for x in elems:
        for y in elems:
            table[(x.index, y.index)] = elements[_compose_maps(order, x, y)]
    canonical_gens = {a: elements[g] for a, g in gens.items()}
    return JourneyMonoid(A, elems, elements[identity], canonical_gens, table)


def idempotence_constants(M: JourneyMonoid) -> Tuple[int, int]:
    """Minimal (L, m) with x^(L+m) = x^L for every monoid element."""
    preperiods, periods = [], []
    for x in M.elements:
        seen: Dict[int, int] = {}
        y = x
        k = 1
        while y.index not in seen:
            seen[y.index] = k
            y = M.compose(y, x)
            k += 1
        first = seen[y.index]
        preperiods.append(first)
        periods.append(k - first)
    big_m = math.lcm(*periods) if periods else 1
    max_l = max(preperiods, default=0)

    def ok(L: int, m: int) -> bool:
        return all(M.power(x, L + m) == M.power(x, L) for x in M.elements if L + m > 0)

    best = None
    for m in sorted(d for d in range(1, big_m + 1) if big_m % d == 0):
        for L in range(max_l + 1):
            if ok(L, m):
                if best is None or L + m < best[0] + best[1]:
                    best = (L, m)
                break
    assert best is not None
    return best


def decompose_run(A: MullerAutomaton, word: InfiniteWord, factorization):
    """Yield the journey of each factorization block along the run."""
    q = A.initial
    pos = 0
    n = 0
    while True:
        block = factorization.block(n)
        for i, a in enumerate(block):
            if word.letter_at(pos + i) != a:
                raise ValueError(f"factorization disagrees with word at {pos + i}")
        j = journey_of(A, block, q)
        yield j
        q = j.target
        pos += len(block)
        n += 1


def bottom_sccs(A: MullerAutomaton) -> list[tuple[frozenset, bool]]:
    """Tarjan SCCs of the full transition graph, with bottom flags."""
    index: Dict[object, int] = {}
    low: Dict[object, int] = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[frozenset] = []
    counter = [0]

    def succs(q):
        return [A.step(q, a) for a in A.alphabet]

    for root in A.states:
        if root in index:
            continue
        work = [(root, iter(succs(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            q, it = work[-1]
            advanced = False
            for r in it:
                if r not in index:
                    index[r] = low[r] = counter[0]
                    counter[0] += 1
                    stack.append(r)
                    on_stack.add(r)
                    work.append((r, iter(succs(r))))
                    advanced = True
                    break
                if r in on_stack:
                    low[q] = min(low[q], index[r])
            if advanced:
                continue
            work.pop()
            if work:
                p, _ = work[-1]
                low[p] = min(low[p], low[q])
            if low[q] == index[q]:
                comp = []
                while True:
                    r = stack.pop()
                    on_stack.discard(r)
                    comp.append(r)
                    if r == q:
                        break
                sccs.append(frozenset(comp))

    out = []
    for comp in sccs:
        bottom = all(A.step(q, a) in comp for q in comp for a in A.alphabet)
        out.append((comp, bottom))
    return out


def accept_lasso(A: MullerAutomaton, u: Sequence, v: Sequence) -> bool:
    """Does A accept u · v^omega?"""
    v = tuple(v)
    if not v:
        raise ValueError("lasso period must be non-empty")
    q = A.run(u)
    seen = {q: 0}
    trail = [q]
    journeys = []
    while True:
        j = journey_of(A, v, q)
        journeys.append(j)
        q = j.target
        if q in seen:
            start = seen[q]
            cycle_visited = frozenset().union(*(j.visited for j in journeys[start:]))
            return A.acceptance.contains(cycle_visited)
        seen[q] = len(trail)
        trail.append(q)


class Transducer:
    """Deterministic transducer: step(r, a) = (r', output word over Gamma)."""

    def __init__(self, states: Iterable, initial,
                 step: Dict[tuple, tuple], output_alphabet: Alphabet):
        self.states = tuple(states)
        self.initial = initial
        self.step = dict(step)
        self.output_alphabet = output_alphabet
        state_set = set(self.states)
        for (r, _a), (r2, out) in self.step.items():
            if r not in state_set or r2 not in state_set:
                raise ValueError("transducer step leaves the state set")
            for g in out:
                if g not in output_alphabet:
                    raise ValueError(f"output letter {g!r} not in output alphabet")

    def input_letters(self, r) -> list:
        return [a for (q, a) in self.step if q == r]

    def run_prefix(self, w: Sequence, r=None) -> tuple[object, tuple]:
        """Final state and concatenated output after reading the finite w."""
        r = self.initial if r is None else r
        out: list = []
        for a in w:
            r, piece = self.step[(r, a)]
            out.extend(piece)
        return r, tuple(out)


def run_transducer(T: Transducer, word: InfiniteWord,
                   progress_budget: int = 1 << 20) -> InfiniteWord:
    """The output word, served lazily with a memoized frontier.

    Raises OutputFinite if progress_budget input letters in a row yield no
    output while a further output letter is demanded.
    """
    state = {"r": T.initial, "pos": 0}
    produced: list = []
    lock = threading.Lock()

    def at(n: int):
        with lock:
            stall = 0
            while len(produced) <= n:
                a = word.letter_at(state["pos"])
                key = (state["r"], a)
                if key not in T.step:
                    raise AlphabetMismatch(f"no transition for {key!r}")
                r2, out = T.step[key]
                state["r"] = r2
                state["pos"] += 1
                produced.extend(out)
                stall = 0 if out else stall + 1
                if stall > progress_budget:
                    raise OutputFinite(
                        f"no output within {progress_budget} input letters")
            return produced[n]

    return InfiniteWord(T.output_alphabet, at)
