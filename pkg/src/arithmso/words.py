"""Oracle-backed infinite words, characteristic and order words, factors.

Words are immutable and memoized; predicates carry optional procyclicity
and sparsity witnesses used by the order-word reduction.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import BudgetExceeded, FinitePredicate, OracleUnknown
from .numbers import TriState

__all__ = [
    "Alphabet",
    "InfiniteWord",
    "Predicate",
    "Factorization",
    "bitvec_alphabet",
    "characteristic_word",
    "order_word",
    "order_word_of_sequences",
    "occurs_in_prefix",
    "recurrence_bound",
    "factor_complexity_prefix",
]


class Alphabet:
    """A finite ordered set of opaque letters."""

    __slots__ = ("letters", "_index")

    def __init__(self, letters: Iterable):
        self.letters = tuple(letters)
        if not self.letters:
            raise ValueError("alphabet must be non-empty")
        self._index = {a: i for i, a in enumerate(self.letters)}
        if len(self._index) != len(self.letters):
            raise ValueError("alphabet letters must be pairwise distinct")

    def __contains__(self, a) -> bool:
        return a in self._index

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def index(self, a) -> int:
        return self._index[a]

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Alphabet({list(self.letters)!r})"


def bitvec_alphabet(d: int) -> Alphabet:
    """All bit-vectors of width d, in binary counting order."""
    return Alphabet(
        tuple((n >> (d - 1 - i)) & 1 for i in range(d)) for n in range(2**d)
    )


class InfiniteWord:
    """An infinite sequence of letters served by a memoized oracle.

    metadata keys in use across the package:
      "ultimately_periodic": (u, v) tuples proving word = u v^omega
      "uniformly_recurrent": True
      "disjunctive": True
      "occurrence_oracle": callable(factor tuple) -> bool | TriState
      "values": callable(n) -> the n-th merged value (order words)
      "positions": callable(n) -> position of the n-th order letter in the
                   characteristic word (order words)
    """

    def __init__(self, alphabet: Alphabet, letter_at: Callable[[int], object],
                 metadata: Optional[dict] = None):
        self.alphabet = alphabet
        self._letter_at = letter_at
        self.metadata = dict(metadata or {})
        self._cache: list = []
        self._lock = threading.Lock()

    # -- construction helpers

    @staticmethod
    def from_periodic(u: Sequence, v: Sequence, alphabet: Optional[Alphabet] = None
                      ) -> "InfiniteWord":
        u, v = tuple(u), tuple(v)
        if not v:
            raise ValueError("period must be non-empty")
        if alphabet is None:
            alphabet = Alphabet(sorted(set(u) | set(v), key=repr))

        def at(n: int):
            return u[n] if n < len(u) else v[(n - len(u)) % len(v)]

        return InfiniteWord(alphabet, at, {"ultimately_periodic": (u, v)})

    def map_letters(self, fn: Callable, new_alphabet: Alphabet) -> "InfiniteWord":
        meta = {}
        if "ultimately_periodic" in self.metadata:
            u, v = self.metadata["ultimately_periodic"]
            meta["ultimately_periodic"] = (
                tuple(fn(a) for a in u), tuple(fn(a) for a in v))
        for k in ("uniformly_recurrent", "disjunctive", "values", "positions"):
            if k in self.metadata:
                meta[k] = self.metadata[k]
        return InfiniteWord(new_alphabet, lambda n: fn(self.letter_at(n)), meta)

    # -- access

    def letter_at(self, n: int):
        if n < 0:
            raise IndexError(n)
        with self._lock:
            while len(self._cache) <= n:
                self._cache.append(self._letter_at(len(self._cache)))
            return self._cache[n]

    def prefix(self, n: int) -> tuple:
        if n > 0:
            self.letter_at(n - 1)
        with self._lock:
            return tuple(self._cache[:n])

    def __getitem__(self, item):
        if isinstance(item, slice):
            start, stop = item.start or 0, item.stop
            if stop is None:
                raise IndexError("infinite words need a finite slice stop")
            return tuple(self.letter_at(i) for i in range(start, stop))
        return self.letter_at(item)

    def suffix(self, k: int) -> "InfiniteWord":
        meta = dict(self.metadata)
        if "ultimately_periodic" in meta:
            u, v = meta["ultimately_periodic"]
            if k <= len(u):
                meta["ultimately_periodic"] = (u[k:], v)
            else:
                j = (k - len(u)) % len(v)
                meta["ultimately_periodic"] = ((), v[j:] + v[:j])
        meta.pop("values", None)
        meta.pop("positions", None)
        return InfiniteWord(self.alphabet, lambda n: self.letter_at(n + k), meta)

    # -- occurrence queries

    def occurs(self, w: Sequence) -> bool:
        """Does the factor w occur (for uniformly recurrent words: recur)?"""
        w = tuple(w)
        oracle = self.metadata.get("occurrence_oracle")
        if oracle is not None:
            v = oracle(w)
            if isinstance(v, TriState):
                if v.is_unknown:
                    raise OracleUnknown(f"occurrence of {w} undecided: {v.certificate}")
                return v.is_true
            return bool(v)
        if "ultimately_periodic" in self.metadata:
            u, v = self.metadata["ultimately_periodic"]
            bound = len(u) + 2 * len(v) + len(w)
            return len(occurs_in_prefix(self, w, bound + len(w))) > 0
        raise OracleUnknown("word carries no occurrence oracle")


class Predicate:
    """A subset of N with memoized enumeration and optional witnesses.

    procyclic: callable m -> (N, p) with p_{n+p} = p_n (mod m) for n >= N,
    over the increasing enumeration <p_n>.
    sparse: callable K -> V, a value threshold such that within the family
    this predicate belongs to, any two distinct members >= V of the union
    differ by more than K (family-aware witnesses are built by the lrs
    module).
    """

    def __init__(self, enumerate_fn: Callable[[], Iterator[int]],
                 member: Optional[Callable[[int], bool]] = None,
                 name: str = "",
                 procyclic: Optional[Callable] = None,
                 sparse: Optional[Callable] = None):
        self._enumerate_fn = enumerate_fn
        self._member = member
        self.name = name
        self.procyclic = procyclic
        self.sparse = sparse
        self._elements: list[int] = []
        self._iter: Optional[Iterator[int]] = None
        self._exhausted = False
        self._lock = threading.Lock()

    @staticmethod
    def from_elements(elements: Iterable[int], name: str = "") -> "Predicate":
        elems = list(elements)

        def gen():
            return iter(elems)

        return Predicate(gen, name=name)

    @staticmethod
    def geometric(a: int, rho: int, name: str = "") -> "Predicate":
        """{a * rho^n : n in N} with an exact procyclicity witness."""
        if a < 1 or rho < 2:
            raise ValueError("geometric predicates need a >= 1, rho >= 2")

        def gen():
            v = a
            while True:
                yield v
                v *= rho

        def procyclic(m: int):
            seen = {}
            v = a % m
            n = 0
            while v not in seen:
                seen[v] = n
                v = (v * rho) % m
                n += 1
            return seen[v], n - seen[v]

        return Predicate(gen, name=name or f"{a}*{rho}^n", procyclic=procyclic)

    # -- enumeration

    def _extend(self, count: int) -> None:
        with self._lock:
            if self._iter is None:
                self._iter = self._enumerate_fn()
            while len(self._elements) < count and not self._exhausted:
                try:
                    v = next(self._iter)
                except StopIteration:
                    self._exhausted = True
                    break
                if self._elements and v <= self._elements[-1]:
                    raise ValueError(f"{self.name}: enumeration not strictly increasing")
                self._elements.append(v)

    def element(self, i: int) -> int:
        self._extend(i + 1)
        if i >= len(self._elements):
            raise FinitePredicate(self.name)
        return self._elements[i]

    def elements_below(self, bound: int) -> list[int]:
        i = 0
        while True:
            self._extend(i + 64)
            while i < len(self._elements) and self._elements[i] < bound:
                i += 1
            if i < len(self._elements) or self._exhausted:
                return self._elements[:i]

    def member(self, n: int) -> bool:
        if self._member is not None:
            return self._member(n)
        return n in self.elements_below(n + 1)

    def count_below(self, bound: int) -> int:
        return len(self.elements_below(bound))

    def __repr__(self):
        return f"Predicate({self.name or 'anonymous'})"


class Factorization:
    """Blocks whose concatenation is a target word; prefix-checkable."""

    def __init__(self, block_at: Callable[[int], Sequence]):
        self._block_at = block_at

    def block(self, n: int) -> tuple:
        b = tuple(self._block_at(n))
        if not b:
            raise ValueError("factorization blocks must be non-empty")
        return b

    def check_against(self, word: InfiniteWord, blocks: int) -> bool:
        pos = 0
        for n in range(blocks):
            for a in self.block(n):
                if word.letter_at(pos) != a:
                    return False
                pos += 1
        return True


# ---------------------------------------------------------------------------
# characteristic and order words


def characteristic_word(preds: Sequence[Predicate]) -> InfiniteWord:
    """Position n carries the membership bit-vector of n."""
    preds = list(preds)
    if not preds:
        raise ValueError("need at least one predicate")
    d = len(preds)

    def at(n: int):
        return tuple(int(p.member(n)) for p in preds)

    return InfiniteWord(bitvec_alphabet(d), at)


class _Merge:
    """Lazy merge of strictly increasing enumerations with tie-merging."""

    def __init__(self, preds: Sequence[Predicate]):
        self.preds = list(preds)
        self.heads = [p.element(0) for p in self.preds]
        self.idx = [0] * len(self.preds)
        self.out: list[tuple[int, tuple]] = []  # (value, bitvec)
        self.lock = threading.Lock()

    def get(self, n: int) -> tuple[int, tuple]:
        with self.lock:
            while len(self.out) <= n:
                m = min(self.heads)
                bits = tuple(int(h == m) for h in self.heads)
                for i, b in enumerate(bits):
                    if b:
                        self.idx[i] += 1
                        self.heads[i] = self.preds[i].element(self.idx[i])
                self.out.append((m, bits))
            return self.out[n]


def order_word(preds: Sequence[Predicate]) -> InfiniteWord:
    """The characteristic word with all-zero letters deleted.

    metadata carries the merged values and characteristic-word positions.
    """
    preds = list(preds)
    d = len(preds)
    merge = _Merge(preds)
    letters = tuple(a for a in bitvec_alphabet(d) if any(a))

    word = InfiniteWord(
        Alphabet(letters),
        lambda n: merge.get(n)[1],
        {
            "values": lambda n: merge.get(n)[0],
            "positions": lambda n: merge.get(n)[0],
        },
    )
    return word


class RealSequence:
    """A strictly increasing real sequence with exact comparisons.

    value_key(n) must return a comparable exact object; compare(a, b) -> int
    decides order (raising ComparatorUnknown when a tri-state leaks).
    """

    def __init__(self, value_key: Callable[[int], object],
                 compare: Callable[[object, object], int], name: str = ""):
        self.value_key = value_key
        self.compare = compare
        self.name = name


def order_word_of_sequences(seqs: Sequence[RealSequence]) -> InfiniteWord:
    """Order word of the merged value sequence of real sequences."""
    seqs = list(seqs)
    d = len(seqs)
    heads = [s.value_key(0) for s in seqs]
    idx = [0] * d
    out: list[tuple] = []
    lock = threading.Lock()

    def step():
        m = 0
        for i in range(1, d):
            if seqs[m].compare(heads[i], heads[m]) < 0:
                m = i
        bits = [0] * d
        for i in range(d):
            if i == m or seqs[m].compare(heads[i], heads[m]) == 0:
                bits[i] = 1
        for i, b in enumerate(bits):
            if b:
                idx[i] += 1
                heads[i] = seqs[i].value_key(idx[i])
        out.append(tuple(bits))

    def at(n: int):
        with lock:
            while len(out) <= n:
                step()
            return out[n]

    letters = tuple(a for a in bitvec_alphabet(d) if any(a))
    return InfiniteWord(Alphabet(letters), at)


# ---------------------------------------------------------------------------
# factor machinery


def occurs_in_prefix(word: InfiniteWord, w: Sequence, bound: int) -> list[int]:
    """All positions n < bound - |w| where w occurs in word."""
    w = tuple(w)
    if bound < len(w):
        raise ValueError("bound must cover the factor")
    pre = word.prefix(bound)
    return [
        n for n in range(bound - len(w))
        if pre[n:n + len(w)] == w
    ]


def _factor_set(word: InfiniteWord, k: int, budget: int) -> set[tuple]:
    """L(k) via the occurrence oracle, built by extension from L(k-1)."""
    if k == 0:
        return {()}
    letters = list(word.alphabet)
    level: set[tuple] = set()
    for a in letters:
        if word.occurs((a,)):
            level.add((a,))
    for _ in range(k - 1):
        nxt: set[tuple] = set()
        for w in level:
            for a in letters:
                cand = w + (a,)
                if cand[1:] in level and word.occurs(cand):
                    nxt.add(cand)
        level = nxt
        if len(level) > budget:
            raise BudgetExceeded("factor sets grew past the budget")
    return level


def _contains_all(w: tuple, factors: set[tuple]) -> bool:
    return all(
        any(w[i:i + len(f)] == f for i in range(len(w) - len(f) + 1))
        for f in factors
    )


def recurrence_bound(word: InfiniteWord, n: int, budget: int = 10**4) -> int:
    """Smallest k found such that every length-k factor contains all of L(n).

    Then every window of length k of the word contains every length-n factor.
    Diverges (up to the budget) if the word is not uniformly recurrent.
    """
    target = _factor_set(word, n, budget)
    level = target
    k = n
    while k <= budget:
        if all(_contains_all(w, target) for w in level):
            return k
        k += 1
        nxt: set[tuple] = set()
        for w in level:
            for a in word.alphabet:
                cand = w + (a,)
                if cand[1:] in level and word.occurs(cand):
                    nxt.add(cand)
        level = nxt
    raise BudgetExceeded(f"no recurrence bound for n={n} within budget {budget}")


def factor_complexity_prefix(word: InfiniteWord, n: int, prefix_len: int) -> int:
    """Number of distinct length-n factors within the prefix."""
    if prefix_len < n:
        raise ValueError("prefix must be at least as long as the factors")
    pre = word.prefix(prefix_len)
    return len({tuple(pre[i:i + n]) for i in range(prefix_len - n + 1)})
