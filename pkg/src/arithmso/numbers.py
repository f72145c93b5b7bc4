"""Exact arithmetic substrate.

Big rationals, real algebraic numbers, interval logarithms,
multiplicative-relation bases, the log-sign oracle, and the two-power gap
bound.  Everything here is exact or outward-rounded; sign queries that
cannot be settled under the current certificates surface as TriState
unknown instead of guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath
import sympy

from .errors import (
    IncompleteBasis,
    PrecisionExhausted,
    ValidationFailed,
)

__all__ = [
    "Config",
    "DEFAULT_CONFIG",
    "TriState",
    "RealAlgebraic",
    "LogLinearForm",
    "RelationBasis",
    "integer_kernel",
    "mult_relation_basis",
    "mult_relation_basis_algebraic",
    "log_sign",
    "sign_tri",
    "inv_log_independence",
    "baker_gap_constant",
    "GapConstant",
]


# ---------------------------------------------------------------------------
# configuration


@dataclass
class Config:
    """Tunable constants shared across the pipeline.

    baker_constant is the exponent C of Thm-2.4 shape |Lambda| > B^-C.  The
    default is a literature-derived guess and is flagged "heuristic" in every
    verdict it touches; set baker_trusted=True only for a constant you are
    prepared to certify.
    """

    baker_constant: int = 50
    baker_trusted: bool = False
    precision_cap_bits: int = 1 << 16
    factorization_budget: int = 10**12


DEFAULT_CONFIG = Config()


# ---------------------------------------------------------------------------
# tri-state verdicts


@dataclass(frozen=True)
class TriState:
    """An honest conditional verdict with a replayable certificate string."""

    value: str  # "proved_true" | "proved_false" | "unknown"
    certificate: str = ""

    @staticmethod
    def true(certificate: str = "") -> "TriState":
        return TriState("proved_true", certificate)

    @staticmethod
    def false(certificate: str = "") -> "TriState":
        return TriState("proved_false", certificate)

    @staticmethod
    def unknown(certificate: str = "") -> "TriState":
        return TriState("unknown", certificate)

    @property
    def is_true(self) -> bool:
        return self.value == "proved_true"

    @property
    def is_false(self) -> bool:
        return self.value == "proved_false"

    @property
    def is_unknown(self) -> bool:
        return self.value == "unknown"


# ---------------------------------------------------------------------------
# real algebraic numbers


def _to_sympy(x) -> sympy.Expr:
    if isinstance(x, RealAlgebraic):
        return x.expr
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    if isinstance(x, int):
        return sympy.Integer(x)
    if isinstance(x, sympy.Expr):
        return x
    raise TypeError(f"cannot interpret {x!r} as a real algebraic number")


class RealAlgebraic:
    """A real algebraic number: exact expression + refinable enclosure.

    Backed by a sympy expression; the minimal polynomial and isolating
    interval of the spec's data model are available on demand via
    ``minpoly()`` and ``enclosure(bits)``.
    """

    __slots__ = ("expr", "_sign", "_minpoly")

    def __init__(self, value):
        self.expr = sympy.nsimplify(_to_sympy(value), rational=False) \
            if isinstance(value, float) else _to_sympy(value)
        self._sign: Optional[int] = None
        self._minpoly = None

    # -- constructors

    @staticmethod
    def from_rational(q) -> "RealAlgebraic":
        return RealAlgebraic(Fraction(q))

    @staticmethod
    def nth_root(q, d: int) -> "RealAlgebraic":
        """The real d-th root of a positive rational q."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError("nth_root requires a positive radicand")
        return RealAlgebraic(sympy.root(sympy.Rational(q.numerator, q.denominator), d))

    # -- exact structure

    def is_rational(self) -> bool:
        return bool(self.expr.is_rational)

    def as_fraction(self) -> Fraction:
        r = sympy.Rational(self.expr)
        return Fraction(int(r.p), int(r.q))

    def minpoly(self) -> sympy.Poly:
        if self._minpoly is None:
            x = sympy.Symbol("x")
            self._minpoly = sympy.Poly(sympy.minimal_polynomial(self.expr, x), x)
        return self._minpoly

    def sign(self) -> int:
        if self._sign is None:
            if self.expr.is_rational:
                r = sympy.Rational(self.expr)
                self._sign = (r.p > 0) - (r.p < 0)
            elif self.expr.is_zero:
                self._sign = 0
            else:
                mp = self.minpoly()
                if mp.degree() == 1 and mp.all_coeffs()[-1] == 0:
                    self._sign = 0
                else:
                    bits = 32
                    while True:
                        lo, hi = self.enclosure(bits)
                        if lo > 0:
                            self._sign = 1
                            break
                        if hi < 0:
                            self._sign = -1
                            break
                        bits *= 2
                        if bits > DEFAULT_CONFIG.precision_cap_bits:
                            raise PrecisionExhausted(str(self.expr))
        return self._sign

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """A rational enclosure of width 2^-bits (exact for rationals)."""
        if self.expr.is_rational:
            f = self.as_fraction()
            return (f, f)
        m = int(sympy.floor(self.expr * sympy.Integer(2) ** bits))
        return (Fraction(m, 2**bits), Fraction(m + 1, 2**bits))

    # -- arithmetic

    def __add__(self, other):
        return RealAlgebraic(self.expr + _to_sympy(other))

    def __radd__(self, other):
        return RealAlgebraic(_to_sympy(other) + self.expr)

    def __sub__(self, other):
        return RealAlgebraic(self.expr - _to_sympy(other))

    def __rsub__(self, other):
        return RealAlgebraic(_to_sympy(other) - self.expr)

    def __mul__(self, other):
        return RealAlgebraic(self.expr * _to_sympy(other))

    def __rmul__(self, other):
        return RealAlgebraic(_to_sympy(other) * self.expr)

    def __truediv__(self, other):
        return RealAlgebraic(self.expr / _to_sympy(other))

    def __rtruediv__(self, other):
        return RealAlgebraic(_to_sympy(other) / self.expr)

    def __pow__(self, k: int):
        return RealAlgebraic(self.expr ** sympy.Integer(k))

    def __neg__(self):
        return RealAlgebraic(-self.expr)

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    # -- exact comparisons

    def cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        if not isinstance(other, (RealAlgebraic, int, Fraction)):
            return NotImplemented
        return self.cmp(other) == 0

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __hash__(self):
        return hash(self.expr)

    def __repr__(self):
        return f"RealAlgebraic({self.expr})"

    def float_approx(self) -> float:
        return float(self.expr.evalf(30))


# ---------------------------------------------------------------------------
# linear forms in logarithms


def _log_interval(base: RealAlgebraic, prec: int):
    """Outward-rounded mpmath interval of log(base) at the given precision."""
    with mpmath.workprec(prec + 16):
        iv = mpmath.iv
        iv.prec = prec + 16
        if base.expr.is_rational:
            f = base.as_fraction()
            x = iv.mpf(f.numerator) / iv.mpf(f.denominator)
        else:
            lo, hi = base.enclosure(prec)
            x = iv.mpf([lo.numerator, lo.numerator + 1]) / iv.mpf(lo.denominator)
        return iv.log(x)


class LogLinearForm:
    """a0 + sum a_i * log(lambda_i) with rational a's and algebraic bases > 0."""

    __slots__ = ("constant", "terms")

    def __init__(self, constant=0, terms: Iterable = ()):
        self.constant = Fraction(constant)
        merged: dict = {}
        order: list = []
        for coeff, base in terms:
            coeff = Fraction(coeff)
            if not isinstance(base, RealAlgebraic):
                base = RealAlgebraic(base)
            if base.sign() <= 0:
                raise ValueError("log base must be positive")
            key = base.expr
            if key == 1:
                continue
            if key in merged:
                c, _ = merged[key]
                merged[key] = (c + coeff, base)
            else:
                merged[key] = (coeff, base)
                order.append(key)
        self.terms = tuple(
            (merged[k][0], merged[k][1]) for k in order if merged[k][0] != 0
        )

    @staticmethod
    def log_of(base, coeff=1) -> "LogLinearForm":
        return LogLinearForm(0, [(coeff, base)])

    @staticmethod
    def const(c) -> "LogLinearForm":
        return LogLinearForm(c, [])

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogLinearForm.const(other)
        return LogLinearForm(
            self.constant + other.constant, list(self.terms) + list(other.terms)
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LogLinearForm.const(other)
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "LogLinearForm":
        c = Fraction(c)
        return LogLinearForm(
            self.constant * c, [(a * c, b) for a, b in self.terms]
        )

    def is_structurally_zero(self) -> bool:
        return self.constant == 0 and not self.terms

    def bases(self) -> list[RealAlgebraic]:
        return [b for _, b in self.terms]

    def interval(self, prec: int):
        iv = mpmath.iv
        with mpmath.workprec(prec + 16):
            iv.prec = prec + 16
            total = iv.mpf(self.constant.numerator) / iv.mpf(self.constant.denominator)
            for coeff, base in self.terms:
                c = iv.mpf(coeff.numerator) / iv.mpf(coeff.denominator)
                total = total + c * _log_interval(base, prec)
            return total

    def float_approx(self) -> float:
        x = self.interval(64)
        return float((x.a + x.b) / 2)

    def __repr__(self):
        parts = []
        if self.constant != 0 or not self.terms:
            parts.append(str(self.constant))
        for coeff, base in self.terms:
            parts.append(f"{coeff}*log({base.expr})")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# multiplicative relation bases


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Basis of {x in Z^ncols : A x = 0} via unimodular column elimination."""
    nrows = len(rows)
    cols = [[rows[r][c] for r in range(nrows)] for c in range(ncols)]
    companion = [[1 if i == c else 0 for i in range(ncols)] for c in range(ncols)]
    active = list(range(ncols))
    for r in range(nrows):
        while True:
            live = [c for c in active if cols[c][r] != 0]
            if len(live) <= 1:
                break
            live.sort(key=lambda c: abs(cols[c][r]))
            p = live[0]
            for c in live[1:]:
                q = cols[c][r] // cols[p][r]
                for rr in range(nrows):
                    cols[c][rr] -= q * cols[p][rr]
                for i in range(ncols):
                    companion[c][i] -= q * companion[p][i]
        live = [c for c in active if cols[c][r] != 0]
        if live:
            active.remove(live[0])
    basis = []
    for c in active:
        vec = companion[c]
        if all(v == 0 for v in vec):
            continue
        lead = next(v for v in vec if v != 0)
        if lead < 0:
            vec = [-v for v in vec]
        basis.append(tuple(vec))
    return basis


@dataclass(frozen=True)
class RelationBasis:
    """Integer vectors spanning the multiplicative relation lattice."""

    vectors: tuple[tuple[int, ...], ...]
    complete: bool
    note: str = ""

    @property
    def rank(self) -> int:
        return len(self.vectors)


def mult_relation_basis(zs: Sequence, config: Config = DEFAULT_CONFIG) -> RelationBasis:
    """Exact basis of G_M(z_1..z_d) for positive rationals via factorization."""
    fracs = [Fraction(z) for z in zs]
    if any(f <= 0 for f in fracs):
        raise ValueError("relation bases are computed for positive rationals")
    primes: list[int] = []
    expmaps = []
    for f in fracs:
        e: dict[int, int] = {}
        for p, k in sympy.factorint(f.numerator).items():
            e[int(p)] = e.get(int(p), 0) + int(k)
        for p, k in sympy.factorint(f.denominator).items():
            e[int(p)] = e.get(int(p), 0) - int(k)
        expmaps.append(e)
        for p in e:
            if p not in primes:
                primes.append(p)
    rows = [[e.get(p, 0) for e in expmaps] for p in primes]
    vecs = integer_kernel(rows, len(fracs))
    for v in vecs:  # replay check: the relation must hold exactly
        prod = Fraction(1)
        for f, k in zip(fracs, v):
            prod *= f**k
        if prod != 1:
            raise AssertionError("kernel produced a non-relation (bug)")
    return RelationBasis(tuple(vecs), complete=True, note="prime factorization kernel")


def mult_relation_basis_algebraic(
    zs: Sequence[RealAlgebraic],
    mode: str = "bounded_search",
    supplied: Optional[Sequence[Sequence[int]]] = None,
    height_cap: int = 6,
) -> RelationBasis:
    """Relations among positive real algebraics.

    user_supplied mode validates each vector by exact algebraic arithmetic;
    bounded_search exhausts the exponent box [-cap, cap]^d and flags the
    result incomplete (Masser's general algorithm is out of scope).
    """
    zs = [z if isinstance(z, RealAlgebraic) else RealAlgebraic(z) for z in zs]
    if any(z.sign() <= 0 for z in zs):
        raise ValueError("bases must be positive")
    if all(z.is_rational() for z in zs):
        return mult_relation_basis([z.as_fraction() for z in zs])

    def is_relation(vec: Sequence[int]) -> bool:
        prod = sympy.Integer(1)
        for z, k in zip(zs, vec):
            prod *= z.expr ** sympy.Integer(k)
        return sympy.simplify(prod - 1) == 0

    if mode == "user_supplied":
        if supplied is None:
            raise ValueError("user_supplied mode needs vectors")
        for vec in supplied:
            if not is_relation(vec):
                raise ValidationFailed(f"{tuple(vec)} is not a multiplicative relation")
        return RelationBasis(
            tuple(tuple(int(k) for k in v) for v in supplied),
            complete=False,
            note="user supplied, validated",
        )

    if mode != "bounded_search":
        raise ValueError(f"unknown mode {mode!r}")
    d = len(zs)
    found: list[tuple[int, ...]] = []

    def independent_of_found(vec):
        return not _in_rational_span(found, vec)

    def boxes():
        from itertools import product

        for vec in product(range(-height_cap, height_cap + 1), repeat=d):
            if any(vec) and next(v for v in vec if v) > 0:
                yield vec

    # cheap numeric prefilter before the exact check
    logs = [math.log(z.float_approx()) for z in zs]
    for vec in boxes():
        if abs(sum(k * L for k, L in zip(vec, logs))) > 1e-9:
            continue
        if independent_of_found(vec) and is_relation(vec):
            found.append(vec)
    return RelationBasis(tuple(found), complete=False, note=f"bounded search cap={height_cap}")


def _in_rational_span(vectors: Sequence[Sequence[int]], target: Sequence) -> bool:
    """Exact rational Gaussian elimination membership test."""
    if all(x == 0 for x in target):
        return True
    if not vectors:
        return False
    rows = [[Fraction(x) for x in v] for v in vectors]
    t = [Fraction(x) for x in target]
    ncols = len(t)
    pivots = []
    for row in rows:
        r = row[:]
        for pc, pr in pivots:
            if r[pc] != 0:
                f = r[pc] / pr[pc]
                r = [a - f * b for a, b in zip(r, pr)]
        nz = next((i for i, a in enumerate(r) if a != 0), None)
        if nz is not None:
            pivots.append((nz, r))
    r = t[:]
    for pc, pr in pivots:
        if r[pc] != 0:
            f = r[pc] / pr[pc]
            r = [a - f * b for a, b in zip(r, pr)]
    return all(a == 0 for a in r)


# ---------------------------------------------------------------------------
# the log-sign oracle


def _zero_by_relations(form: LogLinearForm, relations: RelationBasis) -> bool:
    if form.constant != 0:
        return False
    coeffs = [a for a, _ in form.terms]
    return _in_rational_span(list(relations.vectors), coeffs)


def log_sign(
    form: LogLinearForm,
    relations: Optional[RelationBasis] = None,
    config: Config = DEFAULT_CONFIG,
) -> int:
    """Sign (-1/0/1) of a0 + sum a_i log(lambda_i); exact and certified.

    For rational bases the relation basis is computed (complete) when not
    supplied.  Raises IncompleteBasis when zero cannot be excluded under an
    incomplete basis, PrecisionExhausted past the configured cap.
    """
    if form.is_structurally_zero():
        return 0
    if relations is None:
        if all(b.is_rational() for b in form.bases()):
            relations = mult_relation_basis(
                [b.as_fraction() for b in form.bases()], config
            )
        else:
            relations = RelationBasis((), complete=False, note="none supplied")
    if relations.complete:
        if _zero_by_relations(form, relations):
            return 0
        certified_nonzero = True
    else:
        if _zero_by_relations(form, relations):
            return 0  # a verified relation kills it regardless of completeness
        certified_nonzero = False
    prec = 64
    while prec <= config.precision_cap_bits:
        x = form.interval(prec)
        if x.a > 0:
            return 1
        if x.b < 0:
            return -1
        prec *= 2
    if certified_nonzero:
        raise PrecisionExhausted(repr(form))
    raise IncompleteBasis(
        "sign query cannot be settled: interval straddles 0 and the relation "
        "basis is incomplete"
    )


def sign_tri(
    form: LogLinearForm,
    relations: Optional[RelationBasis] = None,
    config: Config = DEFAULT_CONFIG,
):
    """Sign query returning (sign, TriState-ish flag); sign is None if unknown."""
    try:
        return log_sign(form, relations, config), None
    except (IncompleteBasis, PrecisionExhausted) as e:
        return None, str(e)


# ---------------------------------------------------------------------------
# independence of inverse logs (Lemma on rank d-2)


def inv_log_independence(rhos: Sequence[int], config: Config = DEFAULT_CONFIG) -> TriState:
    """Are 1/log(rho_1), ..., 1/log(rho_d) linearly independent over Q?

    proved_true via the rank >= d-2 criterion with pairwise multiplicative
    independence; proved_false only for relations induced by perfect-power
    dependence; otherwise unknown.
    """
    rhos = [int(r) for r in rhos]
    if any(r < 2 for r in rhos):
        raise ValueError("inv_log_independence expects integers >= 2")
    d = len(rhos)
    if d == 1:
        return TriState.true("a single nonzero real is linearly independent")
    for i in range(d):
        for j in range(i + 1, d):
            basis = mult_relation_basis([rhos[i], rhos[j]], config)
            if basis.vectors:
                (a, b) = basis.vectors[0]
                return TriState.false(
                    f"rho_{i+1}^{a} * rho_{j+1}^{b} = 1 forces a rational "
                    f"relation between 1/log(rho_{i+1}) and 1/log(rho_{j+1})"
                )
    full = mult_relation_basis(rhos, config)
    if full.rank >= d - 2:
        return TriState.true(
            f"pairwise multiplicatively independent and rank(G_M) = {full.rank} >= d-2"
        )
    return TriState.unknown(
        f"rank(G_M) = {full.rank} < d-2 = {d-2}; independence not known"
    )


# ---------------------------------------------------------------------------
# the two-power gap bound


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man) * (Fraction(2) ** exp)
    return -v if sign else v


def _iv_bounds(form: LogLinearForm, prec: int = 128) -> tuple[Fraction, Fraction]:
    """Exact rational bounds from an outward-rounded interval evaluation."""
    x = form.interval(prec)
    return _mpf_to_fraction(x.a), _mpf_to_fraction(x.b)


@dataclass(frozen=True)
class GapConstant:
    C: int
    flag: str  # "certified" | "heuristic"
    kappa: Fraction
    D: int
    M1: Fraction
    M2: Fraction


def baker_gap_constant(
    rho1,
    rho2,
    c1,
    c2,
    config: Config = DEFAULT_CONFIG,
) -> GapConstant:
    """Constant C with |E(n1,n2)| > rho_i^{n_i}/(n_i+2)^C whenever E != 0.

    E(n1,n2) = c1 rho1^{n1} + c2 rho2^{n2}.  Assembled from kappa, D, M1, M2
    as in the proof of the two-power gap theorem; D comes from the configured
    underlying Baker constant and carries its certification flag.
    """
    rho1 = rho1 if isinstance(rho1, RealAlgebraic) else RealAlgebraic(rho1)
    rho2 = rho2 if isinstance(rho2, RealAlgebraic) else RealAlgebraic(rho2)
    c1 = c1 if isinstance(c1, RealAlgebraic) else RealAlgebraic(c1)
    c2 = c2 if isinstance(c2, RealAlgebraic) else RealAlgebraic(c2)
    if rho1 <= 1 or rho2 <= 1:
        raise ValueError("rho_1, rho_2 must exceed 1")
    if c1.sign() == 0 or c2.sign() == 0:
        raise ValueError("c_1 c_2 must be nonzero")
    flag = "certified" if config.baker_trusted else "heuristic"
    if c1.sign() * c2.sign() > 0:
        return GapConstant(0, "certified", Fraction(1), 0, Fraction(0), Fraction(0))

    a1, a2 = abs(c1), abs(c2)
    log_ratio = LogLinearForm.log_of(a1) - LogLinearForm.log_of(a2)
    l1 = LogLinearForm.log_of(rho1)
    l2 = LogLinearForm.log_of(rho2)

    def lower(form: LogLinearForm) -> Fraction:
        lo, _ = _iv_bounds(form)
        return lo

    def upper(form: LogLinearForm) -> Fraction:
        _, hi = _iv_bounds(form)
        return hi

    lr_up = max(upper(log_ratio), Fraction(0))
    lr_up_neg = max(upper(-log_ratio), Fraction(0))
    l1_lo, l2_lo = lower(l1), lower(l2)
    l1_up, l2_up = upper(l1), upper(l2)
    kappa = max(
        2 * (lr_up + l2_up) / l1_lo,
        2 * (lr_up_neg + l1_up) / l2_lo,
        Fraction(2),
    ) + 1

    D = int(config.baker_constant)

    def axis_min(log_rho: LogLinearForm, sign_flip: bool) -> Fraction:
        # min over n of |log_ratio -/+ n log_rho| restricted to nonzero values
        best: Optional[Fraction] = None
        n = 0
        while True:
            form = (log_ratio - log_rho.scale(n)) if not sign_flip else (
                log_ratio + log_rho.scale(n)
            )
            s = log_sign(form, config=config)
            if s != 0:
                lo, hi = _iv_bounds(form, 256)
                mag = lo if s > 0 else -hi
                if mag <= 0:  # refine once more if the bound degenerated
                    lo, hi = _iv_bounds(form, 1024)
                    mag = lo if s > 0 else -hi
                if best is None or mag < best:
                    best = mag
            # once the form is decreasing in the tail, stop after it passes
            if not sign_flip and s < 0 and n >= 1:
                break
            if sign_flip and s > 0 and n >= 1:
                break
            n += 1
        assert best is not None and best > 0
        return best

    # M1 = min_n |Lambda(0,n)|, Lambda(0,n) = log_ratio - n log rho2
    # M2 = min_n |Lambda(n,0)|, Lambda(n,0) = log_ratio + n log rho1
    M1 = axis_min(l2, sign_flip=False)
    M2 = axis_min(l1, sign_flip=True)

    # |c_i| lower bounds (exact for rationals, interval otherwise)
    def abs_lower(c: RealAlgebraic) -> Fraction:
        if c.is_rational():
            return abs(c.as_fraction())
        lo, _ = c.enclosure(128)
        return lo

    cmin = min(abs_lower(a1), abs_lower(a2))
    kp = max(kappa, Fraction(1))

    candidates = [D + 1]
    # (n+2)^{C-D} > kappa^D / cmin, worst case n = 0 (base 2)
    rhs = kp**D / cmin
    candidates.append(D + _clog2(rhs) + 1)
    # (1/2) n log rho_i > 1/(cmin (n+2)^C), worst case n = 1 (base 3)
    rho_lo = min(l1_lo, l2_lo)
    candidates.append(_clog(Fraction(2) / (cmin * rho_lo), 3) + 1)
    # M_i > 1/(cmin (n+2)^C), worst case n = 0 (base 2)
    candidates.append(_clog2(1 / (cmin * min(M1, M2))) + 1)
    C = max(candidates)
    return GapConstant(C, flag, kappa, D, M1, M2)


def _clog2(x: Fraction) -> int:
    """ceil(log2(x)) for positive rational x, at least 0."""
    return _clog(x, 2)


def _clog(x: Fraction, base: int) -> int:
    x = Fraction(x)
    if x <= 1:
        return 0
    k = 0
    p = Fraction(1)
    while p < x:
        p *= base
        k += 1
    return k
