"""MSO formulas over (N, <, P_1..P_d): parser, compiler, bounded evaluator.

The compiler follows the classical route: formulas become nondeterministic
Buchi automata (set quantifiers are track projections, first-order variables
are singleton-set tracks), negation determinizes via Safra trees and flips
the Muller acceptance, and the final sentence is determinized once more into
a deterministic Muller automaton over bit-vector letters.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .automata import MullerAcceptance, MullerAutomaton, bottom_sccs
from .errors import (
    FormulaSyntaxError,
    NotFirstOrder,
    ResourceExceeded,
    ScopeError,
)
from .words import Alphabet, InfiniteWord, bitvec_alphabet

__all__ = [
    "Formula",
    "CompiledSentence",
    "parse",
    "compile_sentence",
    "compile",
    "eval_fo_bounded",
]


# ---------------------------------------------------------------------------
# AST


class Formula:
    """Base class of all AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Lt(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class Eq(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class In(Formula):
    x: str
    X: str


@dataclass(frozen=True)
class Pred(Formula):
    symbol: str  # "P1", "P2", ...
    x: str


@dataclass(frozen=True)
class Succ(Formula):
    """y = x + 1 (internal, produced by term desugaring)."""

    x: str
    y: str


@dataclass(frozen=True)
class ConstEq(Formula):
    """x = k for a numeral k (internal)."""

    x: str
    k: int


@dataclass(frozen=True)
class NotIn(Formula):
    x: str
    X: str


@dataclass(frozen=True)
class NotPred(Formula):
    symbol: str
    x: str


@dataclass(frozen=True)
class NotConstEq(Formula):
    x: str
    k: int


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    second_order: bool
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    second_order: bool
    body: Formula


# terms (parser-internal)


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TSucc:
    arg: object


@dataclass(frozen=True)
class TConst:
    value: int


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<iff><->)|(?P<imp>->)|(?P<lt><)"
    r"|(?P<eq>=)|(?P<and>&)|(?P<or>\|)|(?P<not>!)|(?P<dot>\.)"
    r"|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)

_KEYWORDS = {"E", "A", "E2", "A2", "in", "s"}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        pos = m.end()
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        k, v, p = self.next()
        if k != kind or (value is not None and v != value):
            raise FormulaSyntaxError(f"expected {value or kind}, got {v!r}", p)
        return v

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        f = self.imp()
        while self.peek()[0] == "iff":
            self.next()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek()[0] == "imp":
            self.next()
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "or":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "and":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        k, v, p = self.peek()
        if k == "not":
            self.next()
            return Not(self.unary())
        if k == "name" and v in ("E", "A", "E2", "A2"):
            self.next()
            var = self.expect("name")
            if var in _KEYWORDS:
                raise FormulaSyntaxError(f"{var!r} cannot be a variable", p)
            self.expect("dot")
            body = self.formula()
            second = v.endswith("2")
            return (Exists if v.startswith("E") else Forall)(var, second, body)
        return self.atom()

    def atom(self) -> Formula:
        k, v, p = self.peek()
        if k == "lpar":
            self.next()
            f = self.formula()
            self.expect("rpar")
            return f
        if k == "name" and re.fullmatch(r"P\d+", v):
            self.next()
            self.expect("lpar")
            t = self.term()
            self.expect("rpar")
            return _desugar_atom(lambda a: Pred(v, a), [t])
        t1 = self.term()
        k, v, p = self.next()
        if k == "lt":
            t2 = self.term()
            return _desugar_atom(lambda a, b: Lt(a, b), [t1, t2])
        if k == "eq":
            t2 = self.term()
            return _desugar_atom(lambda a, b: Eq(a, b), [t1, t2])
        if k == "name" and v == "in":
            X = self.expect("name")
            return _desugar_atom(lambda a: In(a, X), [t1])
        raise FormulaSyntaxError(f"expected comparison, got {v!r}", p)

    def term(self):
        k, v, p = self.next()
        if k == "num":
            return TConst(int(v))
        if k == "name" and v == "s":
            self.expect("lpar")
            t = self.term()
            self.expect("rpar")
            return TSucc(t)
        if k == "name" and v not in _KEYWORDS:
            return TVar(v)
        raise FormulaSyntaxError(f"expected a term, got {v!r}", p)


_fresh_counter = itertools.count()


def _fresh(prefix: str = "t") -> str:
    return f"_{prefix}{next(_fresh_counter)}"


def _desugar_atom(make, terms) -> Formula:
    """Flatten s(...)/numeral terms into fresh existential variables."""
    binders: list[str] = []
    conjuncts: list[Formula] = []

    def flatten(t) -> str:
        if isinstance(t, TVar):
            return t.name
        if isinstance(t, TConst):
            v = _fresh("c")
            binders.append(v)
            conjuncts.append(ConstEq(v, t.value))
            return v
        if isinstance(t, TSucc):
            base = flatten(t.arg)
            v = _fresh("s")
            binders.append(v)
            conjuncts.append(Succ(base, v))
            return v
        raise AssertionError(t)

    names = [flatten(t) for t in terms]
    f = make(*names)
    for c in conjuncts:
        f = And(c, f)
    for v in reversed(binders):
        f = Exists(v, False, f)
    return f


def parse(text: str) -> Formula:
    """Parse the ASCII grammar into a well-scoped AST."""
    p = _Parser(text)
    f = p.formula()
    k, v, pos = p.peek()
    if k != "eof":
        raise FormulaSyntaxError(f"trailing input {v!r}", pos)
    _check_scopes(f, {}, set())
    return f


def _check_scopes(f: Formula, fo: dict, so: set) -> None:
    if isinstance(f, (Lt, Eq)):
        for v in (f.x, f.y):
            if v not in fo:
                raise ScopeError(f"unbound first-order variable {v!r}")
    elif isinstance(f, (Succ,)):
        for v in (f.x, f.y):
            if v not in fo:
                raise ScopeError(f"unbound first-order variable {v!r}")
    elif isinstance(f, (In, NotIn)):
        # set variables may stay free (formulas over declared free sets);
        # first-order variables must be bound
        if f.x not in fo:
            raise ScopeError(f"unbound first-order variable {f.x!r}")
    elif isinstance(f, (Pred, NotPred)):
        if f.x not in fo:
            raise ScopeError(f"unbound first-order variable {f.x!r}")
    elif isinstance(f, (ConstEq, NotConstEq)):
        if f.x not in fo:
            raise ScopeError(f"unbound first-order variable {f.x!r}")
    elif isinstance(f, Not):
        _check_scopes(f.body, fo, so)
    elif isinstance(f, (And, Or, Implies, Iff)):
        _check_scopes(f.left, fo, so)
        _check_scopes(f.right, fo, so)
    elif isinstance(f, (Exists, Forall)):
        if f.second_order:
            _check_scopes(f.body, fo, so | {f.var})
        else:
            _check_scopes(f.body, {**fo, f.var: True}, so)
    else:
        raise AssertionError(f)


# ---------------------------------------------------------------------------
# renaming and negation normal form


def _rename(f: Formula, env: dict) -> Formula:
    """Give every bound variable a unique name (capture-free compilation)."""

    def nm(v):
        return env.get(v, v)  # free variables keep their names

    if isinstance(f, Lt):
        return Lt(nm(f.x), nm(f.y))
    if isinstance(f, Eq):
        return Eq(nm(f.x), nm(f.y))
    if isinstance(f, Succ):
        return Succ(nm(f.x), nm(f.y))
    if isinstance(f, In):
        return In(nm(f.x), nm(f.X))
    if isinstance(f, NotIn):
        return NotIn(nm(f.x), nm(f.X))
    if isinstance(f, Pred):
        return Pred(f.symbol, nm(f.x))
    if isinstance(f, NotPred):
        return NotPred(f.symbol, nm(f.x))
    if isinstance(f, ConstEq):
        return ConstEq(nm(f.x), f.k)
    if isinstance(f, NotConstEq):
        return NotConstEq(nm(f.x), f.k)
    if isinstance(f, Not):
        return Not(_rename(f.body, env))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_rename(f.left, env), _rename(f.right, env))
    if isinstance(f, (Exists, Forall)):
        fresh = _fresh("X" if f.second_order else "x")
        return type(f)(fresh, f.second_order, _rename(f.body, {**env, f.var: fresh}))
    raise AssertionError(f)


def _nnf(f: Formula, neg: bool) -> Formula:
    """Push negations to atoms; Not survives only directly above Exists."""
    if isinstance(f, Lt):
        return Or(Lt(f.y, f.x), Eq(f.x, f.y)) if neg else f
    if isinstance(f, Eq):
        return Or(Lt(f.x, f.y), Lt(f.y, f.x)) if neg else f
    if isinstance(f, Succ):
        if not neg:
            return f
        z = _fresh("z")
        between = Exists(z, False, And(Lt(f.x, z), Lt(z, f.y)))
        return Or(Or(Lt(f.y, f.x), Eq(f.x, f.y)), between)
    if isinstance(f, In):
        return NotIn(f.x, f.X) if neg else f
    if isinstance(f, NotIn):
        return In(f.x, f.X) if neg else f
    if isinstance(f, Pred):
        return NotPred(f.symbol, f.x) if neg else f
    if isinstance(f, NotPred):
        return Pred(f.symbol, f.x) if neg else f
    if isinstance(f, ConstEq):
        return NotConstEq(f.x, f.k) if neg else f
    if isinstance(f, NotConstEq):
        return ConstEq(f.x, f.k) if neg else f
    if isinstance(f, Not):
        return _nnf(f.body, not neg)
    if isinstance(f, And):
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        return Or(a, b) if neg else And(a, b)
    if isinstance(f, Or):
        a, b = _nnf(f.left, neg), _nnf(f.right, neg)
        return And(a, b) if neg else Or(a, b)
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), neg)
    if isinstance(f, Iff):
        return _nnf(And(Implies(f.left, f.right), Implies(f.right, f.left)), neg)
    if isinstance(f, Exists):
        ex = Exists(f.var, f.second_order, _nnf(f.body, False))
        return Not(ex) if neg else ex
    if isinstance(f, Forall):
        return _nnf(Not(Exists(f.var, f.second_order, Not(f.body))), neg)
    raise AssertionError(f)


# ---------------------------------------------------------------------------
# nondeterministic Buchi automata (internal)


def _track_key(name: str):
    m = re.fullmatch(r"P(\d+)", name)
    return (0, int(m.group(1)), "") if m else (1, 0, name)


class _NBA:
    """Nondeterministic Buchi automaton over named boolean tracks."""

    def __init__(self, tracks: Tuple[str, ...], states: Iterable, initials,
                 delta: Dict[tuple, frozenset], accepting):
        self.tracks = tuple(tracks)
        self.states = tuple(states)
        self.initials = frozenset(initials)
        self.delta = delta
        self.accepting = frozenset(accepting)

    def letters(self):
        return itertools.product((0, 1), repeat=len(self.tracks))

    def succ(self, q, letter) -> frozenset:
        return self.delta.get((q, letter), frozenset())

    def trim(self) -> "_NBA":
        seen = set(self.initials)
        stack = list(self.initials)
        while stack:
            q = stack.pop()
            for a in self.letters():
                for r in self.succ(q, a):
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
        delta = {
            (q, a): frozenset(r for r in self.succ(q, a))
            for q in seen for a in self.letters()
            if self.succ(q, a)
        }
        return _NBA(self.tracks, [q for q in self.states if q in seen],
                    self.initials, delta, self.accepting & seen)

    def prune(self) -> "_NBA":
        """Drop states that cannot reach an accepting state on a cycle."""
        succ: Dict[object, set] = {q: set() for q in self.states}
        pred: Dict[object, set] = {q: set() for q in self.states}
        for (q, _a), nxt in self.delta.items():
            succ[q].update(nxt)
            for r in nxt:
                pred[r].add(q)
        good = set()
        for f in self.accepting:
            seen = set(succ[f])
            stack = list(succ[f])
            while stack and f not in seen:
                x = stack.pop()
                for y in succ[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if f in seen:
                good.add(f)
        useful = set(good)
        stack = list(good)
        while stack:
            q = stack.pop()
            for p in pred[q]:
                if p not in useful:
                    useful.add(p)
                    stack.append(p)
        if not (self.initials & useful):
            return _empty_nba(self.tracks)
        delta = {
            (q, a): frozenset(r for r in nxt if r in useful)
            for (q, a), nxt in self.delta.items()
            if q in useful and nxt & useful
        }
        return _NBA(self.tracks, [q for q in self.states if q in useful],
                    self.initials & useful, delta, self.accepting & useful)

    def bisim_quotient(self) -> "_NBA":
        """Forward bisimulation quotient (language-preserving)."""
        letters = tuple(self.letters())
        block = {q: int(q in self.accepting) for q in self.states}
        nblocks = len(set(block.values()))
        while True:
            ids: dict = {}
            nxt_block = {}
            for q in self.states:
                sig = (block[q], tuple(
                    frozenset(block[r] for r in self.succ(q, a))
                    for a in letters))
                if sig not in ids:
                    ids[sig] = len(ids)
                nxt_block[q] = ids[sig]
            if len(ids) == nblocks:
                block = nxt_block
                break
            block, nblocks = nxt_block, len(ids)
        if nblocks == len(self.states):
            return self
        delta: Dict[tuple, set] = {}
        for (q, a), nxt in self.delta.items():
            delta.setdefault((block[q], a), set()).update(block[r] for r in nxt)
        return _NBA(
            self.tracks,
            sorted(set(block.values())),
            {block[q] for q in self.initials},
            {k: frozenset(v) for k, v in delta.items()},
            {block[q] for q in self.accepting},
        )

    def sim_reduce(self) -> "_NBA":
        """Quotient by mutual direct simulation and prune dominated edges."""
        states = list(self.states)
        letters = tuple(self.letters())
        # greatest direct simulation: sim[p][q] means q simulates p
        sim = {(p, q): (p not in self.accepting or q in self.accepting)
               for p in states for q in states}
        changed = True
        while changed:
            changed = False
            for p in states:
                for q in states:
                    if not sim[(p, q)]:
                        continue
                    ok = True
                    for a in letters:
                        sp = self.succ(p, a)
                        if not sp:
                            continue
                        sq = self.succ(q, a)
                        for p2 in sp:
                            if not any(sim[(p2, q2)] for q2 in sq):
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        sim[(p, q)] = False
                        changed = True
        # merge mutually similar states
        block: Dict[object, int] = {}
        reps: list = []
        for p in states:
            for i, r in enumerate(reps):
                if sim[(p, r)] and sim[(r, p)]:
                    block[p] = i
                    break
            else:
                block[p] = len(reps)
                reps.append(p)
        delta: Dict[tuple, set] = {}
        for (q, a), nxt in self.delta.items():
            tgt = {block[r] for r in nxt}
            # drop targets strictly dominated by a simulating sibling
            keep = {
                b for b in tgt
                if not any(b2 != b and sim[(reps[b], reps[b2])]
                           and not sim[(reps[b2], reps[b])] for b2 in tgt)
            }
            delta.setdefault((block[q], a), set()).update(keep)
        return _NBA(
            self.tracks,
            range(len(reps)),
            {block[q] for q in self.initials},
            {k: frozenset(v) for k, v in delta.items()},
            {block[q] for q in self.accepting},
        )

    def delayed_quotient(self) -> "_NBA":
        """Quotient by delayed-simulation equivalence (Buchi game based)."""
        states = list(self.states)
        letters = tuple(self.letters())
        acc = self.accepting

        def bit(b, p2, q2):
            if q2 in acc:
                return 0
            return 1 if (b or p2 in acc) else 0

        # build the simulation game: Spoiler owns ('s', p, q, b),
        # Duplicator owns ('d', p2, q, a, b); priority 2 = obligation clear
        edges: Dict[tuple, list] = {}
        owner: Dict[tuple, str] = {"DWIN": "S", "SWIN": "D"}
        prio: Dict[tuple, int] = {"DWIN": 2, "SWIN": 1}
        edges["DWIN"] = ["DWIN"]
        edges["SWIN"] = ["SWIN"]
        for p in states:
            for q in states:
                for b in (0, 1):
                    s = ("s", p, q, b)
                    owner[s] = "S"
                    prio[s] = 2 if b == 0 else 1
                    outs = []
                    for a in letters:
                        for p2 in self.succ(p, a):
                            d = ("d", p2, q, a, b)
                            if d not in owner:
                                owner[d] = "D"
                                prio[d] = 1
                                moves = [("s", p2, q2, bit(b, p2, q2))
                                         for q2 in self.succ(q, a)]
                                edges[d] = moves or ["SWIN"]
                            outs.append(d)
                    edges[s] = outs or ["DWIN"]

        dwin = _solve_parity2(edges, owner, prio)

        def delayed(p, q):
            b0 = 0 if q in acc else (1 if p in acc else 0)
            return ("s", p, q, b0) in dwin

        block: Dict[object, int] = {}
        reps: list = []
        for p in states:
            for i, r in enumerate(reps):
                if delayed(p, r) and delayed(r, p):
                    block[p] = i
                    break
            else:
                block[p] = len(reps)
                reps.append(p)
        if len(reps) == len(states):
            return self
        delta: Dict[tuple, set] = {}
        for (q, a), nxt in self.delta.items():
            delta.setdefault((block[q], a), set()).update(block[r] for r in nxt)
        return _NBA(
            self.tracks,
            range(len(reps)),
            {block[q] for q in self.initials},
            {k: frozenset(v) for k, v in delta.items()},
            {block[q] for q in self.accepting},
        )

    def reduce(self) -> "_NBA":
        out = self.trim().prune()
        if len(out.states) <= 160:
            out = out.sim_reduce().trim().prune()
        if 1 < len(out.states) <= 120:
            out = out.delayed_quotient().trim().prune()
        return out.bisim_quotient()

    def cylindrify(self, tracks: Tuple[str, ...]) -> "_NBA":
        """Lift to a superset of tracks (extra bits unconstrained)."""
        if tracks == self.tracks:
            return self
        pos = [tracks.index(t) for t in self.tracks]
        delta: Dict[tuple, frozenset] = {}
        for letter in itertools.product((0, 1), repeat=len(tracks)):
            small = tuple(letter[p] for p in pos)
            for q in self.states:
                nxt = self.succ(q, small)
                if nxt:
                    delta[(q, letter)] = nxt
        return _NBA(tracks, self.states, self.initials, delta, self.accepting)


def _solve_parity2(edges: Dict, owner: Dict, prio: Dict) -> set:
    """Winning region of the Buchi player D (wants priority 2 infinitely).

    Classical repeated-attractor algorithm on a finite game graph where
    every node has at least one outgoing edge.
    """
    preds: Dict[object, set] = {u: set() for u in edges}
    for u, vs in edges.items():
        for v in vs:
            preds[v].add(u)

    def attractor(target: set, player: str, region: set) -> set:
        att = set(target) & region
        count = {u: sum(1 for v in edges[u] if v in region) for u in region}
        stack = list(att)
        while stack:
            v = stack.pop()
            for u in preds[v]:
                if u not in region or u in att:
                    continue
                if owner[u] == player:
                    att.add(u)
                    stack.append(u)
                else:
                    count[u] -= 1
                    if count[u] == 0:
                        att.add(u)
                        stack.append(u)
        return att

    V = set(edges)
    B = {v for v in V if prio[v] == 2}
    while True:
        R = attractor(B & V, "D", V)
        W = V - R
        if not W:
            return V
        V = V - attractor(W, "S", V)
        if not V:
            return set()


def _merge_tracks(a: Tuple[str, ...], b: Tuple[str, ...]) -> Tuple[str, ...]:
    return tuple(sorted(set(a) | set(b), key=_track_key))


def _nba_union(A: _NBA, B: _NBA) -> _NBA:
    tracks = _merge_tracks(A.tracks, B.tracks)
    A, B = A.cylindrify(tracks), B.cylindrify(tracks)
    states = [("L", q) for q in A.states] + [("R", q) for q in B.states]
    delta = {}
    for (q, a), nxt in A.delta.items():
        delta[(("L", q), a)] = frozenset(("L", r) for r in nxt)
    for (q, a), nxt in B.delta.items():
        delta[(("R", q), a)] = frozenset(("R", r) for r in nxt)
    initials = {("L", q) for q in A.initials} | {("R", q) for q in B.initials}
    accepting = {("L", q) for q in A.accepting} | {("R", q) for q in B.accepting}
    return _NBA(tracks, states, initials, delta, accepting).trim()


def _nba_intersection(A: _NBA, B: _NBA) -> _NBA:
    tracks = _merge_tracks(A.tracks, B.tracks)
    A, B = A.cylindrify(tracks), B.cylindrify(tracks)
    # flag: 0 = waiting for an A-accepting visit, 1 = waiting for B,
    # 2 = both just completed (Buchi-accepting, behaves like 0)
    states = [(p, q, f) for p in A.states for q in B.states for f in (0, 1, 2)]
    delta: Dict[tuple, frozenset] = {}
    for p in A.states:
        for q in B.states:
            for f in (0, 1, 2):
                for a in itertools.product((0, 1), repeat=len(tracks)):
                    np_, nq = A.succ(p, a), B.succ(q, a)
                    if not np_ or not nq:
                        continue
                    outs = set()
                    for rp in np_:
                        for rq in nq:
                            if f == 1:
                                nf = 2 if rq in B.accepting else 1
                            elif rp in A.accepting:
                                nf = 2 if rq in B.accepting else 1
                            else:
                                nf = 0
                            outs.add((rp, rq, nf))
                    delta[((p, q, f), a)] = frozenset(outs)
    initials = {(p, q, 0) for p in A.initials for q in B.initials}
    accepting = {(p, q, f) for (p, q, f) in states if f == 2}
    return _NBA(tracks, states, initials, delta, accepting).trim()


def _nba_project(A: _NBA, track: str) -> _NBA:
    i = A.tracks.index(track)
    tracks = A.tracks[:i] + A.tracks[i + 1:]
    delta: Dict[tuple, set] = {}
    for (q, a), nxt in A.delta.items():
        small = a[:i] + a[i + 1:]
        delta.setdefault((q, small), set()).update(nxt)
    delta2 = {k: frozenset(v) for k, v in delta.items()}
    return _NBA(tracks, A.states, A.initials, delta2, A.accepting).trim()


def _singleton_nba(track: str) -> _NBA:
    # exactly one position carries a 1 on this track
    delta = {
        ("w", (0,)): frozenset({"w"}),
        ("w", (1,)): frozenset({"d"}),
        ("d", (0,)): frozenset({"d"}),
    }
    return _NBA((track,), ("w", "d"), {"w"}, delta, {"d"})


def _pattern_nba(tracks: Tuple[str, ...], stages) -> _NBA:
    """Automaton for words  idle0* hit0 idle1* hit1 ... idlek^omega.

    stages = list of (idle_letters, hit_letters); the final stage has
    hit_letters = None and loops forever on its idle letters.
    """
    delta: Dict[tuple, frozenset] = {}
    n = len(stages)
    for i, (idles, hits) in enumerate(stages):
        for a in idles:
            delta[(i, a)] = frozenset({i})
        if hits is not None:
            for a in hits:
                delta[(i, a)] = frozenset({i + 1})
    return _NBA(tracks, tuple(range(n)), {0}, delta, {n - 1})


def _empty_nba(tracks: Tuple[str, ...]) -> _NBA:
    return _NBA(tracks, ("dead",), frozenset(), {}, frozenset())


def _atom_nba(f: Formula) -> _NBA:
    if isinstance(f, (Lt, Succ)) and f.x == f.y:
        return _empty_nba((f.x,))
    if isinstance(f, Lt):
        t = tuple(sorted((f.x, f.y), key=_track_key))
        ix, iy = t.index(f.x), t.index(f.y)

        def mk(x, y):
            a = [0, 0]
            a[ix], a[iy] = x, y
            return tuple(a)

        return _pattern_nba(t, [
            ([mk(0, 0)], [mk(1, 0)]),
            ([mk(0, 0)], [mk(0, 1)]),
            ([mk(0, 0)], None),
        ])
    if isinstance(f, Eq):
        if f.x == f.y:
            # x = x over the single track of x: exactly one 1
            return _pattern_nba((f.x,), [([(0,)], [(1,)]), ([(0,)], None)])
        t = tuple(sorted((f.x, f.y), key=_track_key))
        return _pattern_nba(t, [
            ([(0, 0)], [(1, 1)]),
            ([(0, 0)], None),
        ])
    if isinstance(f, Succ):
        t = tuple(sorted((f.x, f.y), key=_track_key))
        ix, iy = t.index(f.x), t.index(f.y)

        def mk(x, y):
            a = [0, 0]
            a[ix], a[iy] = x, y
            return tuple(a)

        return _pattern_nba(t, [
            ([mk(0, 0)], [mk(1, 0)]),
            ([], [mk(0, 1)]),
            ([mk(0, 0)], None),
        ])
    if isinstance(f, In):
        t = tuple(sorted((f.x, f.X), key=_track_key))
        ix, iX = t.index(f.x), t.index(f.X)

        def mk(x, X):
            a = [0, 0]
            a[ix], a[iX] = x, X
            return tuple(a)

        return _pattern_nba(t, [
            ([mk(0, 0), mk(0, 1)], [mk(1, 1)]),
            ([mk(0, 0), mk(0, 1)], None),
        ])
    if isinstance(f, NotIn):
        t = tuple(sorted((f.x, f.X), key=_track_key))
        ix, iX = t.index(f.x), t.index(f.X)

        def mk(x, X):
            a = [0, 0]
            a[ix], a[iX] = x, X
            return tuple(a)

        return _pattern_nba(t, [
            ([mk(0, 0), mk(0, 1)], [mk(1, 0)]),
            ([mk(0, 0), mk(0, 1)], None),
        ])
    if isinstance(f, (Pred, NotPred)):
        want = 1 if isinstance(f, Pred) else 0
        t = tuple(sorted((f.symbol, f.x), key=_track_key))
        ip, ix = t.index(f.symbol), t.index(f.x)

        def mk(p, x):
            a = [0, 0]
            a[ip], a[ix] = p, x
            return tuple(a)

        return _pattern_nba(t, [
            ([mk(0, 0), mk(1, 0)], [mk(want, 1)]),
            ([mk(0, 0), mk(1, 0)], None),
        ])
    if isinstance(f, ConstEq):
        # the 1 on track x sits exactly at position k
        stages = [([], [(0,)]) for _ in range(f.k)]
        stages.append(([], [(1,)]))
        stages.append(([(0,)], None))
        return _pattern_nba((f.x,), stages)
    if isinstance(f, NotConstEq):
        # exactly one 1 on track x, not at position k
        k = f.k
        states = list(range(k + 2)) + ["done"]
        delta: Dict[tuple, set] = {}
        for i in range(k + 1):
            delta[(i, (0,))] = {i + 1}
            if i != k:
                delta[(i, (1,))] = {"done"}
        delta[(k + 1, (0,))] = {k + 1}
        delta[(k + 1, (1,))] = {"done"}
        delta[("done", (0,))] = {"done"}
        d2 = {key: frozenset(v) for key, v in delta.items()}
        return _NBA((f.x,), states, {0}, d2, {"done"})
    raise AssertionError(f)


# ---------------------------------------------------------------------------
# Safra determinization


def _safra_step(tree, letter, nba: _NBA, name_pool_size: int):
    """One Safra update; trees are (name, label-frozenset, children, marked)."""

    def collect_names(node, acc):
        acc.add(node[0])
        for c in node[2]:
            collect_names(c, acc)

    used: set = set()
    for root in tree:
        collect_names(root, used)
    free = iter(n for n in range(name_pool_size) if n not in used)

    def spawn(node):
        name, label, children, _ = node
        children = tuple(spawn(c) for c in children)
        branch = label & nba.accepting
        if branch:
            children = children + ((next(free), branch, (), False),)
        return (name, label, children, False)

    def transition(node):
        name, label, children, marked = node
        new_label = frozenset(
            r for q in label for r in nba.succ(q, letter))
        return (name, new_label, tuple(transition(c) for c in children), marked)

    def horizontal(node, stolen: frozenset):
        name, label, children, marked = node
        label = label - stolen
        out_children = []
        seen = frozenset()
        for c in children:
            c2 = horizontal(c, stolen | seen)
            if c2 is not None:
                seen = seen | c2[1]
                out_children.append(c2)
        if not label:
            return None
        return (name, label, tuple(out_children), marked)

    def vertical(node):
        name, label, children, marked = node
        children = tuple(vertical(c) for c in children)
        child_union = frozenset(q for c in children for q in c[1])
        if children and child_union == label:
            return (name, label, (), True)
        return (name, label, children, marked)

    out = []
    seen = frozenset()
    for root in tree:
        r = spawn(root)
        r = transition(r)
        r = horizontal(r, seen)
        if r is not None:
            seen = seen | r[1]
            out.append(vertical(r))
    return tuple(out)


def _tree_names(tree, present: set, marked: set):
    for node in tree:
        present.add(node[0])
        if node[3]:
            marked.add(node[0])
        _tree_names(node[2], present, marked)


def determinize(nba: _NBA, state_cap: int = 10**5) -> MullerAutomaton:
    """Safra determinization to a deterministic Muller automaton.

    States are integers; acceptance is a Rabin-pair membership test derived
    from the Safra node names (materializable on demand).
    """
    nba = nba.trim()
    pool = 2 * max(1, len(nba.states)) + 2
    init_tree = ((0, nba.initials, (), False),) if nba.initials else ()
    letters = tuple(nba.letters())

    trees = {init_tree: 0}
    info = []  # per state: (present names, marked names)
    order = [init_tree]
    delta: Dict[tuple, int] = {}
    i = 0
    while i < len(order):
        t = order[i]
        for a in letters:
            t2 = _safra_step(t, a, nba, pool)
            if t2 not in trees:
                trees[t2] = len(order)
                order.append(t2)
                if len(order) > state_cap:
                    raise ResourceExceeded(
                        f"determinization exceeded {state_cap} states")
            delta[(i, a)] = trees[t2]
        i += 1
    for t in order:
        present: set = set()
        marked: set = set()
        _tree_names(t, present, marked)
        info.append((present, marked))
    # a Safra name that is never marked anywhere can never fire its Rabin
    # pair; dropping it sharpens the quotient below
    ever_marked = set()
    for _p, m in info:
        ever_marked.update(m)
    info = [(frozenset(p & ever_marked), frozenset(m)) for p, m in info]

    # Moore-style quotient: states with equal Safra-name signatures and
    # congruent successors are language-equivalent under the Rabin test
    block = {}
    ids: dict = {}
    for q in range(len(order)):
        if info[q] not in ids:
            ids[info[q]] = len(ids)
        block[q] = ids[info[q]]
    nblocks = len(ids)
    while True:
        ids = {}
        nxt = {}
        for q in range(len(order)):
            sig = (block[q], tuple(block[delta[(q, a)]] for a in letters))
            if sig not in ids:
                ids[sig] = len(ids)
            nxt[q] = ids[sig]
        if len(ids) == nblocks:
            block = nxt
            break
        block, nblocks = nxt, len(ids)
    rep = {}
    for q in range(len(order)):
        rep.setdefault(block[q], q)
    new_delta = {
        (b, a): block[delta[(rep[b], a)]]
        for b in rep for a in letters
    }
    new_info = [info[rep[b]] for b in sorted(rep)]
    delta = new_delta
    info = new_info
    init_block = block[0]
    n_states = len(rep)

    names = sorted({n for p, _ in info for n in p} | {0})

    def rabin_test(S: frozenset) -> bool:
        if not S:
            return False
        for n in names:
            if all(n in info[q][0] for q in S) and any(n in info[q][1] for q in S):
                return True
        return False

    alphabet = Alphabet(letters)
    A = MullerAutomaton(range(n_states), init_block, alphabet, delta,
                        MullerAcceptance.from_predicate(rabin_test))
    A.track_names = nba.tracks
    return A


def _muller_to_nba(A: MullerAutomaton, tracks: Tuple[str, ...],
                   state_cap: int = 10**5) -> _NBA:
    """Deterministic Muller automaton to Buchi by guessing the infinity set."""
    A = A.reachable()
    comps = [c for c, _ in bottom_sccs(A)]

    loops: list[frozenset] = []
    for comp in comps:
        members = sorted(comp, key=repr)
        if len(members) > 22:
            raise ResourceExceeded("SCC too large for loop-set enumeration")
        for mask in range(1, 1 << len(members)):
            S = frozenset(members[i] for i in range(len(members)) if mask >> i & 1)
            if not _is_loop_set(A, S):
                continue
            if A.acceptance.contains(S):
                loops.append(S)

    states: list = [("p", q) for q in A.states]
    delta: Dict[tuple, set] = {}
    accepting: set = set()
    for q in A.states:
        for a in A.alphabet:
            delta.setdefault((("p", q), a), set()).add(("p", A.step(q, a)))
    for fi, F in enumerate(loops):
        for q in F:
            for pending in _subsets(F):
                states.append(("g", fi, q, pending))
        # entry: from prefix mode jump into the gadget
        for q in A.states:
            for a in A.alphabet:
                r = A.step(q, a)
                if r in F:
                    delta.setdefault((("p", q), a), set()).add(
                        ("g", fi, r, F - {r}))
        for q in F:
            for a in A.alphabet:
                r = A.step(q, a)
                if r in F:
                    for pending in _subsets(F):
                        np_ = pending - {r}
                        if not np_:
                            np_ = F
                        src = ("g", fi, q, pending)
                        delta.setdefault((src, a), set()).add(("g", fi, r, np_))
        for q in F:
            accepting.add(("g", fi, q, F))
        if len(states) > state_cap:
            raise ResourceExceeded("Muller-to-Buchi conversion exceeded cap")

    # also allow starting directly inside a loop set
    initials = {("p", A.initial)}
    for fi, F in enumerate(loops):
        if A.initial in F:
            initials.add(("g", fi, A.initial, F - {A.initial}))

    d2 = {k: frozenset(v) for k, v in delta.items()}
    letters = A.alphabet.letters
    nba = _NBA(tracks, states, initials, d2, accepting)
    # sanity: the Muller alphabet letters must match the track width
    assert all(len(a) == len(tracks) for a in letters)
    return nba.trim()


def _subsets(S: frozenset):
    members = sorted(S, key=repr)
    for mask in range(1 << len(members)):
        yield frozenset(members[i] for i in range(len(members)) if mask >> i & 1)


def _is_loop_set(A: MullerAutomaton, S: frozenset) -> bool:
    """Can S be the infinity set of some run (strongly connected within S)?"""
    inner = {q: [A.step(q, a) for a in A.alphabet if A.step(q, a) in S]
             for q in S}
    if any(not v for v in inner.values()):
        return False
    start = next(iter(S))
    # reachability within S from start
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for r in inner[q]:
            if r not in seen:
                seen.add(r)
                stack.append(r)
    if seen != S:
        return False
    # and start reachable from every state (S small: repeat per state)
    for q in S:
        seen = {q}
        stack = [q]
        found = q == start
        while stack and not found:
            p = stack.pop()
            for r in inner[p]:
                if r == start:
                    found = True
                    break
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        if not found:
            return False
    return True


# ---------------------------------------------------------------------------
# compilation


@dataclass
class CompiledSentence:
    automaton: MullerAutomaton
    predicate_order: list = field(default_factory=list)


def _predicates_of(f: Formula, acc: set) -> None:
    if isinstance(f, (Pred, NotPred)):
        acc.add(f.symbol)
    elif isinstance(f, Not):
        _predicates_of(f.body, acc)
    elif isinstance(f, (And, Or, Implies, Iff)):
        _predicates_of(f.left, acc)
        _predicates_of(f.right, acc)
    elif isinstance(f, (Exists, Forall)):
        _predicates_of(f.body, acc)


def _build_nba(f: Formula, state_cap: int) -> _NBA:
    if isinstance(f, (Lt, Eq, Succ, In, NotIn, Pred, NotPred, ConstEq,
                      NotConstEq)):
        return _atom_nba(f)
    if isinstance(f, And):
        return _nba_intersection(_build_nba(f.left, state_cap),
                                 _build_nba(f.right, state_cap)).reduce()
    if isinstance(f, Or):
        return _nba_union(_build_nba(f.left, state_cap),
                          _build_nba(f.right, state_cap)).reduce()
    if isinstance(f, Exists):
        body = _build_nba(f.body, state_cap)
        if not f.second_order:
            body = _nba_intersection(body, _singleton_nba(f.var))
        if f.var in body.tracks:
            body = _nba_project(body, f.var)
        return body.reduce()
    if isinstance(f, Not):
        inner = _build_nba(f.body, state_cap)
        det = determinize(inner, state_cap)
        return _muller_to_nba(det.complement(), inner.tracks, state_cap).reduce()
    raise AssertionError(f"unexpected node in NNF core: {f}")


def compile_sentence(f, predicate_order: Optional[Sequence[str]] = None,
                     state_cap: int = 10**5) -> CompiledSentence:
    """Compile a sentence to a deterministic Muller automaton.

    The automaton reads bit-vector letters whose tracks follow
    predicate_order (default: predicate symbols in index order).
    """
    if isinstance(f, str):
        f = parse(f)
    preds: set = set()
    _predicates_of(f, preds)
    if predicate_order is None:
        predicate_order = sorted(preds, key=_track_key)
    else:
        predicate_order = list(predicate_order)
        missing = preds - set(predicate_order)
        if missing:
            raise ScopeError(f"predicates {sorted(missing)} not in declared order")

    core = _nnf(_rename(f, {}), False)
    nba = _build_nba(core, state_cap)
    # a sentence's free tracks are exactly the predicate symbols
    leftover = [t for t in nba.tracks if not re.fullmatch(r"P\d+", t)]
    if leftover:
        raise ScopeError(f"free first-order tracks remain: {leftover}")
    full = tuple(predicate_order)
    nba = nba.cylindrify(tuple(sorted(set(full), key=_track_key)))
    if nba.tracks != full:
        delta = {}
        for (q, a), nxt in nba.delta.items():
            new_a = tuple(a[nba.tracks.index(t)] for t in full)
            delta[(q, new_a)] = nxt
        nba = _NBA(full, nba.states, nba.initials, delta, nba.accepting)
    det = determinize(nba, state_cap)
    # present the alphabet in canonical bit-vector order
    d = len(predicate_order)
    target = bitvec_alphabet(d)
    delta = {(q, a): det.delta[(q, a)] for q in det.states for a in target}
    auto = MullerAutomaton(det.states, det.initial, target, delta, det.acceptance)
    return CompiledSentence(auto, list(predicate_order))


compile = compile_sentence


# ---------------------------------------------------------------------------
# bounded first-order evaluation (independent oracle)


def eval_fo_bounded(f, word: InfiniteWord, horizon: int) -> str:
    """Evaluate a first-order sentence with quantifiers cut to [0, horizon).

    Returns "true"/"false" when two staggered horizons agree, else "unknown".
    Intended as a regression oracle on ultimately periodic words with the
    horizon chosen past the preperiod plus a couple of periods.
    """
    if isinstance(f, str):
        f = parse(f)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    _assert_first_order(f)
    stagger = horizon + _stagger(word, horizon)
    v1 = _eval(f, word, horizon, {})
    v2 = _eval(f, word, stagger, {})
    if v1 == v2:
        return "true" if v1 else "false"
    return "unknown"


def _stagger(word: InfiniteWord, horizon: int) -> int:
    up = word.metadata.get("ultimately_periodic")
    if up is not None:
        u, v = up
        return max(len(v), (len(u) + 2 * len(v)))
    return max(8, horizon // 2)


def _assert_first_order(f: Formula) -> None:
    if isinstance(f, (Exists, Forall)):
        if f.second_order:
            raise NotFirstOrder("set quantifier in first-order evaluation")
        _assert_first_order(f.body)
    elif isinstance(f, (In, NotIn)):
        raise NotFirstOrder("set membership atom in first-order evaluation")
    elif isinstance(f, Not):
        _assert_first_order(f.body)
    elif isinstance(f, (And, Or, Implies, Iff)):
        _assert_first_order(f.left)
        _assert_first_order(f.right)


def _track_bit(word: InfiniteWord, symbol: str, pos: int) -> int:
    letter = word.letter_at(pos)
    idx = int(symbol[1:]) - 1
    if isinstance(letter, tuple):
        return letter[idx]
    return int(letter)


def _eval(f: Formula, word: InfiniteWord, horizon: int, env: dict) -> bool:
    if isinstance(f, Lt):
        return env[f.x] < env[f.y]
    if isinstance(f, Eq):
        return env[f.x] == env[f.y]
    if isinstance(f, Succ):
        return env[f.y] == env[f.x] + 1
    if isinstance(f, ConstEq):
        return env[f.x] == f.k
    if isinstance(f, NotConstEq):
        return env[f.x] != f.k
    if isinstance(f, Pred):
        return _track_bit(word, f.symbol, env[f.x]) == 1
    if isinstance(f, NotPred):
        return _track_bit(word, f.symbol, env[f.x]) == 0
    if isinstance(f, Not):
        return not _eval(f.body, word, horizon, env)
    if isinstance(f, And):
        return (_eval(f.left, word, horizon, env)
                and _eval(f.right, word, horizon, env))
    if isinstance(f, Or):
        return (_eval(f.left, word, horizon, env)
                or _eval(f.right, word, horizon, env))
    if isinstance(f, Implies):
        return ((not _eval(f.left, word, horizon, env))
                or _eval(f.right, word, horizon, env))
    if isinstance(f, Iff):
        return (_eval(f.left, word, horizon, env)
                == _eval(f.right, word, horizon, env))
    if isinstance(f, Exists):
        return any(_eval(f.body, word, horizon, {**env, f.var: n})
                   for n in range(horizon))
    if isinstance(f, Forall):
        return all(_eval(f.body, word, horizon, {**env, f.var: n})
                   for n in range(horizon))
    raise AssertionError(f)
