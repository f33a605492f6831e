"""Singly non-linear systems ``A(x) y >= b(x), y >= 0`` over the rationals.

A system has one parametric variable ``x`` (the entries of ``A`` and ``b``
are integer polynomials in ``x``) and linear unknowns ``y``.  The solver
eliminates ``y`` symbolically, finds a rational ``t`` from a finite candidate
set and then extracts a vertex solution ``y`` of the linear system at ``t``.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

from .errors import VassepError
from .exact_arith import (
    NEG_INF,
    POS_INF,
    ExtRational,
    IntPoly,
    IsolatedRoot,
    Ordering,
    PolyMatrix,
    adjugate,
    arrange_roots,
    cauchy_root_bound,
    compare_root_rational,
    det,
    format_rational,
    parse_rational,
    rational_roots,
    rump_separation_bound,
)

# re-exported for callers that treat this module as the solver facade
__all_bound_helpers = (cauchy_root_bound, rational_roots, rump_separation_bound, parse_rational)

log = logging.getLogger(__name__)

DEFAULT_SUBSET_CAP = 10**6
DEFAULT_FM_CAP = 20_000
DEFAULT_SIZE_CONSTANT = 8


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class Snls:
    A: PolyMatrix
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(IntPoly(p.coeffs) if isinstance(p, IntPoly) else IntPoly.const(p) for p in self.b))
        if len(self.b) != self.A.rows:
            raise VassepError("SHAPE_MISMATCH", f"b has {len(self.b)} entries but A has {self.A.rows} rows")

    @classmethod
    def from_rows(cls, A_rows: Sequence[Sequence], b: Sequence, n: Optional[int] = None) -> "Snls":
        def poly(e):
            if isinstance(e, IntPoly):
                return e
            if isinstance(e, int):
                return IntPoly.const(e)
            return IntPoly(e)

        rows = [[poly(e) for e in r] for r in A_rows]
        if n is None:
            n = len(rows[0]) if rows else 0
        return cls(PolyMatrix.from_rows(rows, n), tuple(poly(e) for e in b))

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "Snls":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            rows = [[IntPoly.from_json(e) for e in r] for r in data["A"]]
            b = [IntPoly.from_json(e) for e in data["b"]]
        except (KeyError, TypeError) as exc:
            raise VassepError("PARSE_ERROR", f"malformed SNLS: {exc}") from None
        n = data.get("n")
        if n is None:
            n = len(rows[0]) if rows else 0
        return cls(PolyMatrix.from_rows(rows, int(n)), tuple(b))

    def to_json(self) -> dict:
        out = {"A": [[e.to_json() for e in r] for r in self.A.to_rows()], "b": [p.to_json() for p in self.b]}
        if self.m == 0:
            out["n"] = self.n
        return out

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.A.cols

    row = m
    col = n

    @property
    def deg(self) -> int:
        return max([self.A.deg] + [p.deg for p in self.b])

    @property
    def maxc(self) -> int:
        return max([self.A.maxc] + [p.maxc for p in self.b])

    def holds(self, t, y: Sequence) -> bool:
        t = Fraction(t)
        if any(Fraction(v) < 0 for v in y):
            return False
        for i in range(self.m):
            lhs = sum(self.A[i, j].eval(t) * Fraction(y[j]) for j in range(self.n))
            if lhs < self.b[i].eval(t):
                return False
        return True


@dataclass(frozen=True)
class ExtendedSystem:
    """``D = [A; I]`` and ``c = [b; 0]`` so that ``y >= 0`` becomes ordinary rows."""

    D: PolyMatrix
    c: tuple


def build_extended(S: Snls) -> ExtendedSystem:
    n = S.n
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    rows = S.A.to_rows() + ident
    D = PolyMatrix.from_rows(rows, n)
    return ExtendedSystem(D, tuple(S.b) + tuple(IntPoly() for _ in range(n)))


@dataclass(frozen=True)
class LowerBoundConstraint:
    """``poly(x) > 0`` when strict, ``poly(x) >= 0`` otherwise."""

    poly: IntPoly
    strict: bool = False

    def holds(self, t) -> bool:
        s = self.poly.sign_at(t)
        return s > 0 or (s == 0 and not self.strict)

    def to_json(self) -> dict:
        return {"poly": self.poly.to_json(), "strict": self.strict}

    def __str__(self):
        return f"{self.poly} {'>' if self.strict else '>='} 0"


@dataclass(frozen=True)
class Dnflb:
    """Disjunction of conjunctions of lower-bound constraints in one variable."""

    disjuncts: tuple

    def holds(self, t) -> bool:
        t = Fraction(t)
        cache: dict = {}

        def sign(p):
            s = cache.get(p)
            if s is None:
                s = cache[p] = p.sign_at(t)
            return s

        for conj in self.disjuncts:
            if all((s := sign(c.poly)) > 0 or (s == 0 and not c.strict) for c in conj):
                return True
        return False

    __call__ = holds

    def polys(self) -> list:
        seen: dict = {}
        for conj in self.disjuncts:
            for c in conj:
                seen.setdefault(c.poly, None)
        return list(seen)

    @property
    def deg(self) -> int:
        return max((p.deg for p in self.polys()), default=0)

    @property
    def maxc(self) -> int:
        return max((p.maxc for p in self.polys()), default=1)

    def to_json(self) -> list:
        return [[c.to_json() for c in conj] for conj in self.disjuncts]

    def __str__(self):
        if not self.disjuncts:
            return "false"
        parts = []
        for conj in self.disjuncts:
            parts.append("(" + " and ".join(str(c) for c in conj) + ")" if conj else "true")
        return "\n or ".join(parts)


def _simplify_conj(constraints) -> Optional[tuple]:
    """Drop constant-true constraints; return None if a constant is false."""
    out: dict = {}
    for c in constraints:
        if c.poly.deg == 0:
            v = c.poly.coeffs[0] if c.poly.coeffs else 0
            if v > 0 or (v == 0 and not c.strict):
                continue
            return None
        # positive scaling does not change the sign
        p = c.poly
        g = p.content()
        p = IntPoly(x // g for x in p.coeffs)
        key = LowerBoundConstraint(p, c.strict)
        out.setdefault(key, None)
    return tuple(out)


def _subset_count(S: Snls) -> int:
    return math.comb(S.m + S.n, S.n)


def _check_cap(S: Snls, cap: int) -> None:
    k = _subset_count(S)
    if k > cap:
        raise VassepError("DIMENSION_LIMIT", f"{k} row subsets exceed the cap of {cap}", subsets=k, cap=cap)


def eliminate_quantifier(S: Snls, subset_cap: int = DEFAULT_SUBSET_CAP) -> Dnflb:
    """Quantifier-free formula in ``x`` equivalent to ``exists y >= 0: A(x) y >= b(x)``."""
    if S.n == 0:
        conj = _simplify_conj(LowerBoundConstraint(-p) for p in S.b)
        return Dnflb(() if conj is None else (conj,))
    _check_cap(S, subset_cap)
    ext = build_extended(S)
    D, c = ext.D, ext.c
    rows = D.rows
    disjuncts: dict = {}
    for R in combinations(range(rows), S.n):
        DR = D.select_rows(R)
        d = det(DR)
        if d.is_zero():
            continue
        adj = adjugate(DR)
        # v = adj(D_R) c_R, then w = D v - det(D_R) c
        v = [sum((adj[i, k] * c[R[k]] for k in range(S.n)), IntPoly()) for i in range(S.n)]
        w = []
        for i in range(rows):
            acc = IntPoly()
            for j in range(S.n):
                e = D[i, j]
                if not e.is_zero():
                    acc = acc + e * v[j]
            w.append(acc - d * c[i])
        for sgn in (1, -1):
            conj = _simplify_conj(
                [LowerBoundConstraint(d if sgn > 0 else -d, True)]
                + [LowerBoundConstraint(p if sgn > 0 else -p) for p in w]
            )
            if conj is not None:
                disjuncts.setdefault(conj, None)
    return Dnflb(tuple(disjuncts))


# ---------------------------------------------------------------------------
# interval normal form


RootBound = Union[ExtRational, IsolatedRoot]


def _cmp_bound_rational(bound: RootBound, t: Fraction) -> Ordering:
    if isinstance(bound, IsolatedRoot):
        return compare_root_rational(bound, t)
    return bound.cmp(ExtRational(t))


@dataclass(frozen=True)
class Interval:
    lo: RootBound
    lo_strict: bool
    hi: RootBound
    hi_strict: bool

    def contains(self, t) -> bool:
        t = Fraction(t)
        a = _cmp_bound_rational(self.lo, t)
        if a == Ordering.GREATER or (a == Ordering.EQUAL and self.lo_strict):
            return False
        b = _cmp_bound_rational(self.hi, t)
        if b == Ordering.LESS or (b == Ordering.EQUAL and self.hi_strict):
            return False
        return True

    def __str__(self):
        return f"{'(' if self.lo_strict else '['}{self.lo}, {self.hi}{')' if self.hi_strict else ']'}"


@dataclass(frozen=True)
class Dinc:
    """Disjunction of interval constraints ``lo (<|<=) x (<|<=) hi``."""

    intervals: tuple

    def holds(self, t) -> bool:
        return any(iv.contains(t) for iv in self.intervals)

    __call__ = holds

    def __str__(self):
        return " u ".join(str(iv) for iv in self.intervals) if self.intervals else "empty"


def _conj_intervals(conj: tuple) -> list:
    """Maximal intervals on which one conjunction holds."""
    polys = [c.poly for c in conj]
    arr = arrange_roots(polys)
    samples = arr.region_samples()

    def gap_truth(k):
        return all(c.holds(samples[k]) for c in conj)

    def root_truth(k):
        zeros = arr.roots[k].zeros
        for i, c in enumerate(conj):
            if i in zeros:
                if c.strict:
                    return False
            elif not c.holds(samples[k]):
                # a polynomial that does not vanish keeps its sign across the root
                return False
        return True

    # regions: gap 0, root 0, gap 1, root 1, ..., gap k
    regions = []
    for k in range(len(arr.roots)):
        regions.append(("gap", k, gap_truth(k)))
        regions.append(("root", k, root_truth(k)))
    regions.append(("gap", len(arr.roots), gap_truth(len(arr.roots))))

    def bound(kind, k, side):
        if kind == "gap":
            if side == "lo":
                return (NEG_INF if k == 0 else arr.roots[k - 1].root), True
            return (POS_INF if k == len(arr.roots) else arr.roots[k].root), True
        r = arr.roots[k].root
        return (ExtRational(r.exact) if r.exact is not None else r), False

    out = []
    i = 0
    while i < len(regions):
        if not regions[i][2]:
            i += 1
            continue
        j = i
        while j + 1 < len(regions) and regions[j + 1][2]:
            j += 1
        lo, los = bound(regions[i][0], regions[i][1], "lo")
        hi, his = bound(regions[j][0], regions[j][1], "hi")
        if isinstance(lo, IsolatedRoot) and lo.exact is not None:
            lo = ExtRational(lo.exact)
        if isinstance(hi, IsolatedRoot) and hi.exact is not None:
            hi = ExtRational(hi.exact)
        out.append(Interval(lo, los, hi, his))
        i = j + 1
    return out


def dnflb_to_dinc(phi: Dnflb) -> Dinc:
    """Rewrite each conjunction as a union of intervals bounded by roots."""
    intervals: list = []
    for conj in phi.disjuncts:
        intervals.extend(_conj_intervals(conj))
    return Dinc(tuple(intervals))


# ---------------------------------------------------------------------------
# candidate points


def candidate_points(phi: Dnflb) -> list:
    """Finite set of rationals hitting every sign-invariant region of ``phi``."""
    arr = arrange_roots(phi.polys())
    pts = [r.root.exact for r in arr.roots if r.root.exact is not None]
    pts += arr.gaps
    pts += [-arr.outer, arr.outer]
    return sorted(set(pts))


def _size_key(t: Fraction):
    return (max(abs(t.numerator), t.denominator), t)


def find_small_t(S: Snls, subset_cap: int = DEFAULT_SUBSET_CAP) -> Optional[Fraction]:
    """A rational ``t`` for which the system is feasible, or None."""
    phi = eliminate_quantifier(S, subset_cap)
    if not phi.disjuncts:
        return None
    for t in sorted(candidate_points(phi), key=_size_key):
        if phi.holds(t):
            return t
    return None


# ---------------------------------------------------------------------------
# solving at a fixed t


def _solve_square(M: list, rhs: list) -> Optional[list]:
    """Gauss-Jordan over Fractions; None if singular."""
    n = len(M)
    a = [list(M[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def solve_for_y(S: Snls, t, subset_cap: int = DEFAULT_SUBSET_CAP) -> Optional[list]:
    """A vertex of ``{y >= 0 : A(t) y >= b(t)}``, or None if it is empty."""
    t = Fraction(t)
    if S.n == 0:
        return [] if all(p.eval(t) <= 0 for p in S.b) else None
    _check_cap(S, subset_cap)
    ext = build_extended(S)
    Dt = ext.D.eval(t)
    ct = [p.eval(t) for p in ext.c]
    for R in combinations(range(ext.D.rows), S.n):
        y = _solve_square([Dt[i] for i in R], [ct[i] for i in R])
        if y is None:
            continue
        if all(sum(Dt[i][j] * y[j] for j in range(S.n)) >= ct[i] for i in range(ext.D.rows)):
            return y
    return None


def verify_solution(S: Snls, t, y: Sequence) -> bool:
    """Independent check that evaluates every entry by explicit power sums."""
    t = Fraction(t)
    if len(y) != S.n:
        return False
    ys = [Fraction(v) for v in y]
    if any(v < 0 for v in ys):
        return False

    def val(p: IntPoly) -> Fraction:
        return sum((Fraction(c) * t**k for k, c in enumerate(p.coeffs)), Fraction(0))

    for i in range(S.m):
        lhs = sum((val(S.A[i, j]) * ys[j] for j in range(S.n)), Fraction(0))
        if lhs < val(S.b[i]):
            return False
    return True


@dataclass(frozen=True)
class SnlsSolution:
    t: Fraction
    y: tuple
    common_denominator: int
    system: Optional[Snls] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "t", Fraction(self.t))
        object.__setattr__(self, "y", tuple(Fraction(v) for v in self.y))
        if self.common_denominator <= 0 or any(self.common_denominator % v.denominator for v in self.y):
            raise VassepError("INVALID_SOLUTION", "common denominator does not clear y")
        if self.system is not None and not verify_solution(self.system, self.t, self.y):
            raise VassepError("INVALID_SOLUTION", "solution violates the system")

    def to_json(self) -> dict:
        return {
            "status": "FEASIBLE",
            "t": format_rational(self.t),
            "y": [format_rational(v) for v in self.y],
            "common_denominator": str(self.common_denominator),
        }


def solve(S: Snls, subset_cap: int = DEFAULT_SUBSET_CAP) -> Optional[SnlsSolution]:
    """Decide rational feasibility and return a small solution if one exists."""
    if S.m == 0:
        return SnlsSolution(Fraction(0), tuple(Fraction(0) for _ in range(S.n)), 1, S)
    t = find_small_t(S, subset_cap)
    if t is None:
        return None
    y = solve_for_y(S, t, subset_cap)
    if y is None:
        raise VassepError("INTERNAL", f"formula holds at t={t} but no vertex was found")
    K = math.lcm(*(v.denominator for v in y)) if y else 1
    return SnlsSolution(t, tuple(y), K, S)


def scale_to_integer(S: Snls, sol: SnlsSolution) -> Optional[tuple]:
    """``(t, K*y)`` with ``K`` the common denominator, if it still solves ``S``."""
    K = sol.common_denominator
    ys = [int(v * K) for v in sol.y]
    if verify_solution(S, sol.t, ys):
        return sol.t, ys
    log.warning("scaling by %d breaks the system at t=%s; not monotone", K, format_rational(sol.t))
    return None


def solution_size_bound(S: Snls, C: int = DEFAULT_SIZE_CONSTANT) -> int:
    base = S.col * S.deg * S.maxc
    return base ** (C * S.deg**2 * S.row**4)


def solution_diagnostics(sol: SnlsSolution) -> dict:
    """Unary magnitude and bit size of each number in a solution."""
    nums = [sol.t] + list(sol.y)
    return {
        "max_magnitude": max(max(abs(v.numerator), v.denominator) for v in nums),
        "max_bits": max(abs(v.numerator).bit_length() + v.denominator.bit_length() for v in nums),
    }


# ---------------------------------------------------------------------------
# oracles


def per_t_lp_feasible(S: Snls, t, cap: int = DEFAULT_FM_CAP) -> bool:
    """Fourier-Motzkin feasibility of the linear system at ``t``."""
    t = Fraction(t)
    n = S.n
    cons = set()

    def add(coefs, rhs, into):
        g = max((abs(c) for c in coefs), default=0)
        if g == 0:
            into.add((tuple(coefs), rhs))
            return
        into.add((tuple(c / g for c in coefs), rhs / g))

    for i in range(S.m):
        add([S.A[i, j].eval(t) for j in range(n)], S.b[i].eval(t), cons)
    for j in range(n):
        add([Fraction(1 if k == j else 0) for k in range(n)], Fraction(0), cons)
    for j in range(n):
        pos, neg, rest = [], [], set()
        for a, r in cons:
            if a[j] > 0:
                pos.append((a, r))
            elif a[j] < 0:
                neg.append((a, r))
            else:
                rest.add((a, r))
        for ap, rp in pos:
            for an, rn in neg:
                fp, fn = -an[j], ap[j]
                coefs = [fp * x + fn * y for x, y in zip(ap, an)]
                coefs[j] = Fraction(0)
                add(coefs, fp * rp + fn * rn, rest)
                if len(rest) > cap:
                    raise VassepError("FM_BLOWUP", f"more than {cap} inequalities", cap=cap)
        cons = rest
    return all(r <= 0 for _, r in cons)


@dataclass
class ProbeReport:
    checked: int
    feasible: list

    @property
    def found(self) -> bool:
        return bool(self.feasible)

    def to_json(self) -> dict:
        return {"checked": self.checked, "feasible": [format_rational(t) for t in self.feasible]}


def random_rational(rng: random.Random, radius: int, max_den: int = 16) -> Fraction:
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(-radius * q, radius * q), q)


def brute_feasibility_probe(S: Snls, extra_samples: int = 100, seed: int = 0, fm_cap: int = DEFAULT_FM_CAP) -> ProbeReport:
    """Evaluate the Fourier-Motzkin oracle at candidate points and random rationals."""
    rng = random.Random(seed)
    if S.m == 0:
        points = [Fraction(0)]
        radius = 4
    else:
        phi = eliminate_quantifier(S)
        points = candidate_points(phi)
        radius = max(2 + max((p.l1 for p in phi.polys()), default=1), 4)
    points += [random_rational(rng, radius) for _ in range(extra_samples)]
    seen = []
    uniq = list(dict.fromkeys(points))
    for t in uniq:
        if per_t_lp_feasible(S, t, fm_cap):
            seen.append(t)
    return ProbeReport(len(uniq), seen)
