"""Exact numbers, integer polynomials, polynomial matrices and real-root isolation.

Rationals are plain :class:`fractions.Fraction` values.  Everything here is
immutable and arbitrary precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import permutations
from typing import Iterable, Optional, Sequence, Union

from .errors import VassepError

Rational = Fraction


# ---------------------------------------------------------------------------
# rationals and extended rationals


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``.

    >>> parse_rational("6/4")
    Fraction(3, 2)
    """
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        if int(den) == 0:
            raise VassepError("PARSE_ERROR", f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(value: Fraction) -> str:
    """Canonical ``"p/q"`` form (denominator always written).

    >>> format_rational(Fraction(-4, 6))
    '-2/3'
    """
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class ExtRational:
    """A rational number or one of the sentinels ``NEG_INF`` / ``POS_INF``."""

    __slots__ = ("_inf", "_value")

    def __init__(self, value: Union[int, Fraction, None] = 0, inf: int = 0):
        if inf not in (-1, 0, 1):
            raise ValueError("inf must be -1, 0 or 1")
        self._inf = inf
        self._value = None if inf else Fraction(value)

    @property
    def is_finite(self) -> bool:
        return self._inf == 0

    @property
    def value(self) -> Fraction:
        if self._inf:
            raise VassepError("INDETERMINATE_FORM", "infinite value has no rational part")
        return self._value

    @property
    def infinity_sign(self) -> int:
        return self._inf

    def _key(self):
        return (self._inf, self._value if self._value is not None else 0)

    def cmp(self, other: "ExtRational") -> Ordering:
        other = ext(other)
        if self._inf != other._inf:
            return Ordering.LESS if self._inf < other._inf else Ordering.GREATER
        if self._inf:
            return Ordering.EQUAL
        if self._value < other._value:
            return Ordering.LESS
        return Ordering.EQUAL if self._value == other._value else Ordering.GREATER

    def __eq__(self, other):
        try:
            return self.cmp(other) == Ordering.EQUAL
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self.cmp(other) == Ordering.LESS

    def __le__(self, other):
        return self.cmp(other) != Ordering.GREATER

    def __gt__(self, other):
        return self.cmp(other) == Ordering.GREATER

    def __ge__(self, other):
        return self.cmp(other) != Ordering.LESS

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        other = ext(other)
        if self._inf and other._inf and self._inf != other._inf:
            raise VassepError("INDETERMINATE_FORM", "POS_INF + NEG_INF")
        if self._inf or other._inf:
            return ExtRational(inf=self._inf or other._inf)
        return ExtRational(self._value + other._value)

    __radd__ = __add__

    def __neg__(self):
        if self._inf:
            return ExtRational(inf=-self._inf)
        return ExtRational(-self._value)

    def __mul__(self, other):
        other = ext(other)
        if self._inf or other._inf:
            sa = self._inf or _sign(self._value)
            sb = other._inf or _sign(other._value)
            if sa == 0 or sb == 0:
                raise VassepError("INDETERMINATE_FORM", "0 * infinity")
            return ExtRational(inf=sa * sb)
        return ExtRational(self._value * other._value)

    __rmul__ = __mul__

    def __repr__(self):
        if self._inf:
            return "POS_INF" if self._inf > 0 else "NEG_INF"
        return f"ExtRational({format_rational(self._value)})"

    def __str__(self):
        if self._inf:
            return "+inf" if self._inf > 0 else "-inf"
        return format_rational(self._value)


POS_INF = ExtRational(inf=1)
NEG_INF = ExtRational(inf=-1)


def ext(x) -> ExtRational:
    if isinstance(x, ExtRational):
        return x
    if isinstance(x, (int, Fraction)):
        return ExtRational(x)
    raise TypeError(f"cannot convert {type(x).__name__} to ExtRational")


def rat_arith(a, b, op: str):
    """Dispatch ``add``, ``mul`` or ``cmp`` on extended rationals."""
    a, b = ext(a), ext(b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "cmp":
        return a.cmp(b)
    raise ValueError(f"unknown op {op!r}")


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# integer polynomials


class IntPoly:
    """Univariate polynomial with integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple = tuple(cs)

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def from_json(cls, data: Sequence) -> "IntPoly":
        try:
            return cls(int(str(c)) for c in data)
        except ValueError as exc:
            raise VassepError("PARSE_ERROR", f"bad polynomial coefficient: {exc}") from None

    def to_json(self) -> list:
        return [str(c) for c in self.coeffs]

    # read-offs
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def deg(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def maxc(self) -> int:
        return max((abs(c) for c in self.coeffs), default=1)

    @property
    def l1(self) -> int:
        return sum(abs(c) for c in self.coeffs) if self.coeffs else 1

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def norms(self) -> tuple:
        return (self.deg, self.maxc, self.l1)

    # ring operations
    def __add__(self, other):
        other = _as_poly(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return IntPoly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPoly.const(other)
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, t) -> Fraction:
        return self.eval(t)

    def eval(self, t) -> Fraction:
        """Exact Horner evaluation at a rational point."""
        t = Fraction(t)
        p, q = t.numerator, t.denominator
        n = len(self.coeffs)
        if n == 0:
            return Fraction(0)
        # homogenised Horner keeps everything in integers
        acc = 0
        qpow = 1
        for c in reversed(self.coeffs):
            acc = acc * p + c * qpow
            qpow *= q
        return Fraction(acc, q ** (n - 1))

    def sign_at(self, t) -> int:
        t = Fraction(t)
        p, q = t.numerator, t.denominator
        acc = 0
        qpow = 1
        for c in reversed(self.coeffs):
            acc = acc * p + c * qpow
            qpow *= q
        return _sign(acc)

    def derivative(self) -> "IntPoly":
        return IntPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def content(self) -> int:
        return reduce(math.gcd, self.coeffs, 0)

    def primitive(self) -> "IntPoly":
        """Divide by the content and make the leading coefficient positive."""
        g = self.content()
        if g == 0:
            return self
        if self.lc < 0:
            g = -g
        return IntPoly(c // g for c in self.coeffs)

    def squarefree(self) -> "IntPoly":
        """Primitive squarefree part ``p / gcd(p, p')``."""
        if self.deg == 0:
            return IntPoly.const(1) if self.coeffs else self
        g = poly_gcd(self, self.derivative())
        q, r = _divmod_q(_to_q(self), _to_q(g))
        assert not r
        return _from_q(q).primitive()

    def exact_div(self, other: "IntPoly") -> "IntPoly":
        q, r = _divmod_q(_to_q(self), _to_q(other))
        if r or any(c.denominator != 1 for c in q):
            raise ArithmeticError("polynomial division is not exact")
        return IntPoly(int(c) for c in q)

    def __repr__(self):
        return f"IntPoly({list(self.coeffs)})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or i == 0) else ""
            if body and mono:
                body += "*"
            terms.append(("-" if c < 0 else "+", body + mono))
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return head + "".join(f" {s} {t}" for s, t in terms[1:])


def _as_poly(v) -> IntPoly:
    if isinstance(v, IntPoly):
        return v
    if isinstance(v, int):
        return IntPoly.const(v)
    raise TypeError(f"cannot use {type(v).__name__} as IntPoly")


def poly_norms(p: IntPoly) -> tuple:
    return p.norms()


def poly_eval(p: IntPoly, t) -> Fraction:
    return p.eval(t)


# rational-coefficient helpers (lists, lowest degree first)


def _to_q(p: IntPoly) -> list:
    return [Fraction(c) for c in p.coeffs]


def _trim(cs: list) -> list:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _from_q(cs: list) -> IntPoly:
    cs = _trim(list(cs))
    if not cs:
        return IntPoly()
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in cs), 1)
    return IntPoly(int(c * den) for c in cs)


def _divmod_q(a: list, b: list):
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lb = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] / lb
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
        _trim(a)
    return q, a


def _prem_primitive(a: IntPoly, b: IntPoly) -> IntPoly:
    """Remainder of a by b, scaled by a positive factor and made primitive."""
    _, r = _divmod_q(_to_q(a), _to_q(b))
    r = _from_q(r)
    g = r.content()
    return IntPoly(c // g for c in r.coeffs) if g else r


def poly_gcd(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive gcd with positive leading coefficient."""
    while not b.is_zero():
        a, b = b, _prem_primitive(a, b)
    return a.primitive() if not a.is_zero() else a


# ---------------------------------------------------------------------------
# polynomial matrices


class PolyMatrix:
    """Dense row-major matrix of :class:`IntPoly` entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Sequence):
        entries = tuple(_as_poly(e) for e in entries)
        if len(entries) != rows * cols:
            raise ValueError("entries length must equal rows*cols")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "PolyMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise VassepError("PARSE_ERROR", "ragged matrix")
        return cls(len(rows), cols, [e for r in rows for e in r])

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    def select_rows(self, idx: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix(len(idx), self.cols, [e for i in idx for e in self.row(i)])

    def minor(self, skip_row: int, skip_col: int) -> "PolyMatrix":
        ents = [
            self[i, j]
            for i in range(self.rows) if i != skip_row
            for j in range(self.cols) if j != skip_col
        ]
        return PolyMatrix(self.rows - 1, self.cols - 1, ents)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = IntPoly()
                for k in range(self.cols):
                    acc = acc + self[i, k] * other[k, j]
                out.append(acc)
        return PolyMatrix(self.rows, other.cols, out)

    def scale(self, p: IntPoly) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, [p * e for e in self.entries])

    def eval(self, t) -> list:
        return [[self[i, j].eval(t) for j in range(self.cols)] for i in range(self.rows)]

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, {[[list(e.coeffs) for e in r] for r in self.to_rows()]})"

    @property
    def deg(self) -> int:
        return max((e.deg for e in self.entries), default=0)

    @property
    def maxc(self) -> int:
        return max((e.maxc for e in self.entries), default=1)


def _det_cofactor(m: PolyMatrix) -> IntPoly:
    n = m.rows
    if n == 0:
        return IntPoly.const(1)
    if n == 1:
        return m[0, 0]
    if n == 2:
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    acc = IntPoly()
    for j in range(n):
        e = m[0, j]
        if e.is_zero():
            continue
        term = e * _det_cofactor(m.minor(0, j))
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _det_bareiss(m: PolyMatrix) -> IntPoly:
    n = m.rows
    a = [list(m.row(i)) for i in range(n)]
    sign = 1
    prev = IntPoly.const(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if swap is None:
                return IntPoly()
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def det(m: PolyMatrix) -> IntPoly:
    """Determinant: cofactor expansion up to 4x4, Bareiss elimination above."""
    if m.rows != m.cols:
        raise VassepError("NOT_SQUARE", f"{m.rows}x{m.cols} matrix has no determinant")
    if m.rows <= 4:
        return _det_cofactor(m)
    return _det_bareiss(m)


def det_leibniz(m: PolyMatrix) -> IntPoly:
    """Permutation-sum determinant; slow, used as an independent check."""
    if m.rows != m.cols:
        raise VassepError("NOT_SQUARE", "not square")
    n = m.rows
    acc = IntPoly()
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = IntPoly.const(1)
        for i in range(n):
            term = term * m[i, perm[i]]
        acc = acc - term if inv % 2 else acc + term
    return acc


def adjugate(m: PolyMatrix) -> PolyMatrix:
    """Transpose of the cofactor matrix, so that ``m @ adj(m) == det(m) * I``."""
    if m.rows != m.cols:
        raise VassepError("NOT_SQUARE", f"{m.rows}x{m.cols} matrix has no adjugate")
    n = m.rows
    if n == 1:
        return PolyMatrix(1, 1, [1])
    out = [IntPoly()] * (n * n)
    for i in range(n):
        for j in range(n):
            c = det(m.minor(i, j))
            out[j * n + i] = c if (i + j) % 2 == 0 else -c
    return PolyMatrix(n, n, out)


# ---------------------------------------------------------------------------
# real roots


def cauchy_root_bound(p: IntPoly) -> Fraction:
    """``1 + l1(p)``; every real root has absolute value at most this."""
    if p.is_zero():
        raise VassepError("ZERO_POLYNOMIAL", "zero polynomial has no root bound")
    return Fraction(1 + p.l1)


def rump_separation_bound(p: IntPoly) -> Fraction:
    """Lower bound on the distance between two distinct roots of ``p``."""
    d = p.deg
    if d < 1:
        raise VassepError("DEGREE_TOO_SMALL", "separation bound needs degree >= 1")
    return Fraction(1, d ** (d + 1) * (1 + p.l1) ** (2 * d))


def sturm_sequence(p: IntPoly) -> list:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = _prem_primitive(seq[-2], seq[-1])
        seq.append(-r)
    seq.pop()
    return seq


def _variations(signs: Iterable[int]) -> int:
    count, last = 0, 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _signs_at(seq: list, t) -> list:
    if isinstance(t, ExtRational) and not t.is_finite:
        s = t.infinity_sign
        return [_sign(q.lc) * (s ** q.deg if q.deg else 1) for q in seq]
    if isinstance(t, ExtRational):
        t = t.value
    return [q.sign_at(t) for q in seq]


def sturm_count(p: IntPoly, lo, hi, seq: Optional[list] = None) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval (lo, hi]."""
    if p.is_zero():
        raise VassepError("ZERO_POLYNOMIAL", "zero polynomial has infinitely many roots")
    if seq is None:
        seq = sturm_sequence(p.squarefree())
    return _variations(_signs_at(seq, lo)) - _variations(_signs_at(seq, hi))


def count_real_roots(p: IntPoly) -> int:
    """Distinct real roots, counted via Sturm at the infinities."""
    return sturm_count(p, NEG_INF, POS_INF)


@dataclass(frozen=True)
class IsolatedRoot:
    """A real root of the squarefree ``poly`` which is the only one in [lo, hi]."""

    poly: IntPoly
    lo: Fraction
    hi: Fraction
    exact: Optional[Fraction] = None

    @property
    def interval(self) -> tuple:
        return (self.lo, self.hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, t) -> bool:
        return self.lo <= t <= self.hi

    def approx(self) -> float:
        return float(self.exact) if self.exact is not None else float((self.lo + self.hi) / 2)

    def __str__(self):
        if self.exact is not None:
            return format_rational(self.exact)
        return f"root of {self.poly} in [{format_rational(self.lo)}, {format_rational(self.hi)}]"


def _bisect_once(r: IsolatedRoot) -> IsolatedRoot:
    if r.exact is not None or r.lo == r.hi:
        return r
    mid = (r.lo + r.hi) / 2
    sm = r.poly.sign_at(mid)
    if sm == 0:
        return IsolatedRoot(r.poly, mid, mid, mid)
    if r.poly.sign_at(r.lo) != sm:
        return IsolatedRoot(r.poly, r.lo, mid)
    return IsolatedRoot(r.poly, mid, r.hi)


def refine_root(r: IsolatedRoot, width) -> IsolatedRoot:
    """Bisect until the interval is no wider than ``width``."""
    width = Fraction(width)
    if width <= 0:
        raise VassepError("BAD_WIDTH", "width must be positive")
    while r.exact is None and r.hi - r.lo > width:
        r = _bisect_once(r)
    return r


def _try_exact(r: IsolatedRoot) -> IsolatedRoot:
    """Turn the root into an exact rational if it is one."""
    if r.exact is not None:
        return r
    cs = r.poly.coeffs
    bound = abs(cs[-1]) + abs(cs[0])
    # distinct rationals with denominators <= bound are at least 1/bound^2 apart
    target = Fraction(1, bound * bound)
    while r.exact is None and r.hi - r.lo >= target:
        r = _bisect_once(r)
    if r.exact is not None:
        return r
    cand = ((r.lo + r.hi) / 2).limit_denominator(bound)
    if r.lo <= cand <= r.hi and r.poly.sign_at(cand) == 0:
        return IsolatedRoot(r.poly, cand, cand, cand)
    return r


def isolate_real_roots(p: IntPoly, detect_exact: bool = True) -> list:
    """Disjoint isolating intervals for all distinct real roots, ascending."""
    if p.is_zero():
        raise VassepError("ZERO_POLYNOMIAL", "cannot isolate roots of the zero polynomial")
    sq = p.squarefree()
    if sq.deg == 0:
        return []
    seq = sturm_sequence(sq)
    # roots lie strictly inside both bounds, so the endpoints are never roots
    bound = min(cauchy_root_bound(sq), cauchy_root_bound(p))
    out: list = []

    def count(a, b):
        return _variations(_signs_at(seq, a)) - _variations(_signs_at(seq, b))

    # endpoints are always non-roots; roots hit by a split point are emitted exactly
    stack = [(-bound, bound, count(-bound, bound))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if k == 1:
            out.append(IsolatedRoot(sq, a, b))
            continue
        mid = (a + b) / 2
        if sq.sign_at(mid) == 0:
            out.append(IsolatedRoot(sq, mid, mid, mid))
            eps = (b - a) / 4
            while sq.sign_at(mid - eps) == 0 or sq.sign_at(mid + eps) == 0 or count(mid - eps, mid + eps) != 1:
                eps /= 2
            stack.append((a, mid - eps, count(a, mid - eps)))
            stack.append((mid + eps, b, count(mid + eps, b)))
        else:
            stack.append((a, mid, count(a, mid)))
            stack.append((mid, b, count(mid, b)))
    if detect_exact:
        out = [_try_exact(r) for r in out]
    out.sort(key=lambda r: r.lo)
    return out


def rational_roots(p: IntPoly) -> list:
    """All rational roots of ``p``, ascending, each verified exactly."""
    if p.is_zero():
        raise VassepError("ZERO_POLYNOMIAL", "zero polynomial")
    return [r.exact for r in isolate_real_roots(p) if r.exact is not None]


def same_root(r: IsolatedRoot, s: IsolatedRoot) -> bool:
    """Decide exactly whether two isolated roots denote the same real number."""
    if r.exact is not None and s.exact is not None:
        return r.exact == s.exact
    if r.exact is not None:
        return s.contains(r.exact) and s.poly.sign_at(r.exact) == 0
    if s.exact is not None:
        return r.contains(s.exact) and r.poly.sign_at(s.exact) == 0
    lo, hi = max(r.lo, s.lo), min(r.hi, s.hi)
    if lo > hi:
        return False
    g = poly_gcd(r.poly, s.poly)
    if g.deg == 0:
        return False
    if g.sign_at(lo) == 0:
        return True
    return sturm_count(g, lo, hi) > 0


def compare_roots(r: IsolatedRoot, s: IsolatedRoot) -> tuple:
    """Return (ordering, r', s') with possibly refined copies."""
    if same_root(r, s):
        return Ordering.EQUAL, r, s
    # separated means a rational lies strictly between the two roots
    while True:
        if r.hi < s.lo or (r.hi == s.lo and r.exact is None and s.exact is None):
            return Ordering.LESS, r, s
        if s.hi < r.lo or (s.hi == r.lo and r.exact is None and s.exact is None):
            return Ordering.GREATER, r, s
        r, s = _bisect_once(r), _bisect_once(s)


def compare_root_rational(r: IsolatedRoot, t: Fraction) -> Ordering:
    """Compare a real root with a rational exactly."""
    t = Fraction(t)
    if r.exact is not None:
        return ExtRational(r.exact).cmp(ExtRational(t))
    if t <= r.lo:
        return Ordering.GREATER
    if t >= r.hi:
        return Ordering.LESS
    st = r.poly.sign_at(t)
    if st == 0:
        return Ordering.EQUAL
    # single simple root inside; the sign at lo tells which side t is on
    return Ordering.GREATER if st == r.poly.sign_at(r.lo) else Ordering.LESS


# ---------------------------------------------------------------------------
# arrangements of several polynomials


@dataclass
class ArrangedRoot:
    """A distinct real root shared by the input polynomials listed in ``zeros``."""

    root: IsolatedRoot
    zeros: frozenset


@dataclass
class Arrangement:
    """Sorted distinct real roots of a family of polynomials.

    ``gaps[i]`` is a rational strictly between ``roots[i]`` and ``roots[i+1]``;
    ``outer`` is a positive rational beyond every root in absolute value.
    """

    polys: tuple
    roots: list
    gaps: list
    outer: Fraction

    def region_samples(self) -> list:
        """One rational per open sign-invariant region, left to right."""
        return [-self.outer] + list(self.gaps) + [self.outer]


def arrange_roots(polys: Sequence[IntPoly]) -> Arrangement:
    """Isolate, sort and merge the real roots of all nonzero ``polys``."""
    from functools import cmp_to_key

    polys = tuple(polys)
    by_sq: dict = {}
    for idx, p in enumerate(polys):
        if p.is_zero() or p.deg == 0:
            continue
        by_sq.setdefault(p.squarefree(), []).append(idx)
    cells = []
    for sq, idxs in by_sq.items():
        for r in isolate_real_roots(sq):
            cells.append(ArrangedRoot(r, frozenset(idxs)))

    def cmp(a: ArrangedRoot, b: ArrangedRoot) -> int:
        o, a.root, b.root = compare_roots(a.root, b.root)
        return int(o)

    cells.sort(key=cmp_to_key(cmp))
    merged: list = []
    for c in cells:
        if merged and same_root(merged[-1].root, c.root):
            keep = merged[-1].root if merged[-1].root.exact is not None else c.root
            merged[-1] = ArrangedRoot(keep, merged[-1].zeros | c.zeros)
        else:
            merged.append(c)
    gaps = []
    for a, b in zip(merged, merged[1:]):
        cmp(a, b)
        gaps.append((a.root.hi + b.root.lo) / 2)
    c = max((p.l1 for p in polys), default=1)
    return Arrangement(polys, merged, gaps, Fraction(2 + c))
