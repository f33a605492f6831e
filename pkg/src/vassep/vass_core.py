"""Buchi VASS with compressed labels, the Dyck machinery and the two-VASS reduction.

Text format, one declaration per line, ``#`` starts a comment::

    vass dim=2 alphabet=a1,A1
    state q0 init
    state q1 final
    trans q0 -> q1 label=a1^3 update=(1,-2)
    trans q1 -> q1 label=eps update=(0,0)

Letters ``ai`` and ``Ai`` are the Dyck letters a_i and its barred partner.
A label is ``eps`` or a ``.``-separated list of ``letter^count`` pairs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import VassepError

# ---------------------------------------------------------------------------
# omega and extended configurations


class _Omega:
    """The absorbing value used for unbounded counters."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __str__(self):
        return "w"

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ValueError("omega - omega is undefined")
        return self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("omega")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Omega, ())


OMEGA = _Omega()


def is_omega(v) -> bool:
    return v is OMEGA


def ext_leq(a: Sequence, b: Sequence) -> bool:
    """Componentwise order on vectors over naturals and omega."""
    return all(y is OMEGA or (x is not OMEGA and x <= y) for x, y in zip(a, b))


def format_ext_vector(v: Sequence) -> str:
    return "(" + ",".join("w" if x is OMEGA else str(x) for x in v) + ")"


def ext_vector_json(v: Sequence) -> list:
    return ["w" if x is OMEGA else str(x) for x in v]


@dataclass(frozen=True)
class ExtConfig:
    state: str
    values: tuple

    def __str__(self):
        return f"({self.state}, {format_ext_vector(self.values)})"

    def covers(self, other: "ExtConfig") -> bool:
        return self.state == other.state and ext_leq(other.values, self.values)


# ---------------------------------------------------------------------------
# labels and letters

Label = tuple  # tuple of (letter, count) pairs; () is epsilon

_LETTER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DYCK_RE = re.compile(r"([aA])([1-9][0-9]*)\Z")


def dyck_letter(i: int, barred: bool = False) -> str:
    return f"{'A' if barred else 'a'}{i}"


def dyck_alphabet(n: int) -> tuple:
    return tuple(dyck_letter(i) for i in range(1, n + 1)) + tuple(dyck_letter(i, True) for i in range(1, n + 1))


def parse_dyck_letter(letter: str) -> Optional[tuple]:
    """``(index, +1)`` for a_i, ``(index, -1)`` for the barred letter, else None."""
    m = _DYCK_RE.match(letter)
    if not m:
        return None
    return int(m.group(2)), (1 if m.group(1) == "a" else -1)


def dyck_dimension(alphabet: Iterable[str]) -> int:
    """Largest Dyck index used; raises ALPHABET_MISMATCH on other letters."""
    n = 0
    for letter in alphabet:
        d = parse_dyck_letter(letter)
        if d is None:
            raise VassepError("ALPHABET_MISMATCH", f"{letter!r} is not a Dyck letter")
        n = max(n, d[0])
    return n


def label_external(label: Label, n: int) -> tuple:
    """Net count of a_i minus barred a_i per index."""
    out = [0] * n
    for letter, count in label:
        d = parse_dyck_letter(letter)
        if d is None or d[0] > n:
            raise VassepError("ALPHABET_MISMATCH", f"{letter!r} is not in the Dyck alphabet of size {n}")
        out[d[0] - 1] += d[1] * count
    return tuple(out)


def format_label(label: Label) -> str:
    if not label:
        return "eps"
    return ".".join(letter if count == 1 else f"{letter}^{count}" for letter, count in label)


def parse_label(text: str) -> Label:
    if text == "eps":
        return ()
    out = []
    for part in text.split("."):
        if "^" in part:
            letter, cnt = part.split("^", 1)
            if not cnt.isdigit():
                raise ValueError(f"bad count in {part!r}")
            count = int(cnt)
        else:
            letter, count = part, 1
        if not _LETTER_RE.match(letter) or count < 1:
            raise ValueError(f"bad label component {part!r}")
        out.append((letter, count))
    return tuple(out)


def expand_label(label: Label) -> list:
    """Letters of a label one by one (only sensible for small counts)."""
    return [letter for letter, count in label for _ in range(count)]


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class Transition:
    src: str
    label: Label
    update: tuple
    dst: str

    def __str__(self):
        return f"{self.src} -{format_label(self.label)}/{format_ext_vector(self.update)}-> {self.dst}"


@dataclass(frozen=True)
class Vass:
    dim: int
    alphabet: tuple
    states: tuple
    init: str
    finals: frozenset
    transitions: tuple
    _out: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        sset = set(self.states)
        if len(sset) != len(self.states):
            raise VassepError("SEMANTIC_ERROR", "duplicate state")
        if self.init not in sset:
            raise VassepError("SEMANTIC_ERROR", f"initial state {self.init!r} is not declared")
        if not self.finals <= sset:
            raise VassepError("SEMANTIC_ERROR", "final state not declared")
        letters = set(self.alphabet)
        for t in self.transitions:
            if t.src not in sset or t.dst not in sset:
                raise VassepError("SEMANTIC_ERROR", f"unknown state in transition {t}")
            if len(t.update) != self.dim:
                raise VassepError("SEMANTIC_ERROR", f"update arity {len(t.update)} != dim {self.dim} in {t}")
            for letter, count in t.label:
                if letter not in letters:
                    raise VassepError("SEMANTIC_ERROR", f"letter {letter!r} not in alphabet")
                if count < 1:
                    raise VassepError("SEMANTIC_ERROR", "label counts must be positive")
        out: dict = {q: [] for q in self.states}
        for t in self.transitions:
            out[t.src].append(t)
        object.__setattr__(self, "_out", out)

    def outgoing(self, q: str) -> list:
        return self._out[q]

    def with_init(self, q: str) -> "Vass":
        return Vass(self.dim, self.alphabet, self.states, q, self.finals, self.transitions)


def _err(kind: str, lineno: int, col: int, msg: str) -> VassepError:
    return VassepError(kind, f"line {lineno}, column {col}: {msg}", line=lineno, column=col)


_UPDATE_RE = re.compile(r"\(\s*(-?[0-9]+(\s*,\s*-?[0-9]+)*)?\s*\)\Z")


def parse_vass(text: str) -> Vass:
    dim = None
    alphabet: tuple = ()
    states: list = []
    init = None
    finals: set = set()
    trans: list = []
    seen: set = set()
    header_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        toks = line.split()
        head = toks[0]
        if head == "vass":
            if dim is not None:
                raise _err("PARSE_ERROR", lineno, col, "duplicate header")
            header_line = lineno
            opts = {}
            for tok in toks[1:]:
                if "=" not in tok:
                    raise _err("PARSE_ERROR", lineno, line.index(tok) + 1, f"expected key=value, got {tok!r}")
                k, v = tok.split("=", 1)
                opts[k] = v
            if "dim" not in opts or not opts["dim"].isdigit():
                raise _err("PARSE_ERROR", lineno, col, "header needs dim=<natural>")
            dim = int(opts["dim"])
            letters = [a for a in opts.get("alphabet", "").split(",") if a]
            for a in letters:
                if not _LETTER_RE.match(a):
                    raise _err("PARSE_ERROR", lineno, line.index("alphabet") + 1, f"bad letter {a!r}")
            if len(set(letters)) != len(letters):
                raise _err("SEMANTIC_ERROR", lineno, col, "duplicate letter in alphabet")
            alphabet = tuple(letters)
            continue
        if dim is None:
            raise _err("PARSE_ERROR", lineno, col, "missing 'vass' header")
        if head == "state":
            if len(toks) < 2:
                raise _err("PARSE_ERROR", lineno, col, "state needs a name")
            name = toks[1]
            if name in states:
                raise _err("SEMANTIC_ERROR", lineno, line.index(name) + 1, f"state {name!r} declared twice")
            states.append(name)
            for flag in toks[2:]:
                if flag == "init":
                    if init is not None:
                        raise _err("SEMANTIC_ERROR", lineno, line.index(flag) + 1, "second initial state")
                    init = name
                elif flag == "final":
                    finals.add(name)
                else:
                    raise _err("PARSE_ERROR", lineno, line.index(flag) + 1, f"unknown state flag {flag!r}")
            continue
        if head == "trans":
            if len(toks) < 4 or toks[2] != "->":
                raise _err("PARSE_ERROR", lineno, col, "expected 'trans <src> -> <dst> label=... update=(...)'")
            src, dst = toks[1], toks[3]
            rest = line[line.index("->") + 2:]
            rest = rest[rest.index(dst) + len(dst):]
            label_m = re.search(r"\blabel=(\S+)", rest)
            upd_m = re.search(r"\bupdate=(\([^)]*\))", rest)
            if not label_m:
                raise _err("PARSE_ERROR", lineno, col, "transition without label=")
            try:
                label = parse_label(label_m.group(1))
            except ValueError as exc:
                raise _err("PARSE_ERROR", lineno, line.index("label=") + 1, str(exc)) from None
            if upd_m:
                body = upd_m.group(1)
                if not _UPDATE_RE.match(body):
                    raise _err("PARSE_ERROR", lineno, line.index("update=") + 1, f"bad update {body!r}")
                inner = body[1:-1].strip()
                update = tuple(int(x) for x in inner.split(",")) if inner else ()
            elif dim == 0:
                update = ()
            else:
                raise _err("PARSE_ERROR", lineno, col, "transition without update=")
            leftover = re.sub(r"\blabel=\S+|\bupdate=\([^)]*\)", "", rest).strip()
            if leftover:
                raise _err("PARSE_ERROR", lineno, line.index(leftover.split()[0]) + 1, f"unexpected {leftover!r}")
            if len(update) != dim:
                raise _err("SEMANTIC_ERROR", lineno, line.index("update=") + 1,
                           f"update has {len(update)} components, dim is {dim}")
            for q in (src, dst):
                if q not in states:
                    raise _err("SEMANTIC_ERROR", lineno, line.index(q) + 1, f"unknown state {q!r}")
            for letter, _ in label:
                if letter not in alphabet:
                    raise _err("SEMANTIC_ERROR", lineno, line.index("label=") + 1, f"letter {letter!r} not in alphabet")
            t = Transition(src, label, update, dst)
            if t in seen:
                raise _err("SEMANTIC_ERROR", lineno, col, "duplicate transition")
            seen.add(t)
            trans.append(t)
            continue
        raise _err("PARSE_ERROR", lineno, col, f"unknown declaration {head!r}")
    if dim is None:
        raise _err("PARSE_ERROR", 1, 1, "missing 'vass' header")
    if init is None:
        raise _err("SEMANTIC_ERROR", header_line, 1, "no initial state")
    return Vass(dim, alphabet, tuple(states), init, frozenset(finals), tuple(trans))


def serialize_vass(V: Vass) -> str:
    lines = [f"vass dim={V.dim} alphabet={','.join(V.alphabet)}"]
    for q in V.states:
        flags = (" init" if q == V.init else "") + (" final" if q in V.finals else "")
        lines.append(f"state {q}{flags}")
    for t in V.transitions:
        upd = "(" + ",".join(str(z) for z in t.update) + ")"
        lines.append(f"trans {t.src} -> {t.dst} label={format_label(t.label)} update={upd}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# transformations


def _fresh(base: str, taken: set) -> str:
    k = 1
    while f"{base}~{k}" in taken:
        k += 1
    name = f"{base}~{k}"
    taken.add(name)
    return name


def normalize_labels(V: Vass) -> Vass:
    """Split multi-pair labels into chains through fresh non-final states.

    The whole internal update rides on the first link of a chain.
    """
    if all(len(t.label) <= 1 for t in V.transitions):
        return V
    taken = set(V.states)
    states = list(V.states)
    trans = []
    zero = tuple(0 for _ in range(V.dim))
    for t in V.transitions:
        if len(t.label) <= 1:
            trans.append(t)
            continue
        cur = t.src
        for k, pair in enumerate(t.label):
            last = k == len(t.label) - 1
            nxt = t.dst if last else _fresh(t.src, taken)
            if not last:
                states.append(nxt)
            trans.append(Transition(cur, (pair,), t.update if k == 0 else zero, nxt))
            cur = nxt
    return Vass(V.dim, V.alphabet, tuple(states), V.init, V.finals, tuple(trans))


def dyck_vass(n: int) -> Vass:
    """Single-state VASS whose prefix-valid runs spell Dyck prefixes."""
    if n < 1:
        raise VassepError("SEMANTIC_ERROR", "Dyck dimension must be at least 1")
    trans = []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        trans.append(Transition("q", ((dyck_letter(i + 1), 1),), e, "q"))
        trans.append(Transition("q", ((dyck_letter(i + 1, True), 1),), tuple(-x for x in e), "q"))
    return Vass(n, dyck_alphabet(n), ("q",), "q", frozenset({"q"}), tuple(trans))


def product_dyck(V: Vass, n: Optional[int] = None) -> Vass:
    """Append the label's external effect to every update (dimension d+n)."""
    if n is None:
        n = max(dyck_dimension(V.alphabet), 1)
    else:
        dyck_dimension(V.alphabet)
    trans = tuple(
        Transition(t.src, t.label, tuple(t.update) + label_external(t.label, n), t.dst) for t in V.transitions
    )
    alphabet = tuple(dict.fromkeys(V.alphabet + dyck_alphabet(n)))
    return Vass(V.dim + n, alphabet, V.states, V.init, V.finals, trans)


@dataclass(frozen=True)
class PathEffect:
    internal: tuple
    external: tuple

    @property
    def combined(self) -> tuple:
        return self.internal + self.external

    def __add__(self, other: "PathEffect") -> "PathEffect":
        return PathEffect(
            tuple(a + b for a, b in zip(self.internal, other.internal)),
            tuple(a + b for a, b in zip(self.external, other.external)),
        )


def check_connected(path: Sequence[Transition]) -> None:
    for i in range(len(path) - 1):
        if path[i].dst != path[i + 1].src:
            raise VassepError("DISCONNECTED_PATH", f"step {i + 1} ends in {path[i].dst}, step {i + 2} starts in {path[i + 1].src}")


def path_effect(V: Vass, path: Sequence[Transition], n: Optional[int] = None) -> PathEffect:
    check_connected(path)
    if n is None:
        n = dyck_dimension(V.alphabet)
    internal = [0] * V.dim
    external = [0] * n
    for t in path:
        for i, z in enumerate(t.update):
            internal[i] += z
        for i, z in enumerate(label_external(t.label, n)):
            external[i] += z
    return PathEffect(tuple(internal), tuple(external))


@dataclass
class RunReport:
    ok: bool
    final: Optional[ExtConfig]
    violation_step: Optional[int] = None
    violation_counter: Optional[int] = None

    def __bool__(self):
        return self.ok


def check_run(V: Vass, start: ExtConfig, path: Sequence[Transition]) -> RunReport:
    """Simulate ``path`` from ``start``; omega absorbs every update."""
    if path and path[0].src != start.state:
        raise VassepError("DISCONNECTED_PATH", f"path starts in {path[0].src}, not {start.state}")
    check_connected(path)
    vals = list(start.values)
    for step, t in enumerate(path, 1):
        for i, z in enumerate(t.update):
            if vals[i] is OMEGA:
                continue
            v = vals[i] + z
            if v < 0:
                return RunReport(False, None, step, i + 1)
            vals[i] = v
    end = path[-1].dst if path else start.state
    return RunReport(True, ExtConfig(end, tuple(vals)))


def is_dyck_prefix(word: Sequence[str], n: int) -> bool:
    """Direct balance scan: no prefix has more barred a_i than a_i."""
    bal = [0] * n
    for letter in word:
        d = parse_dyck_letter(letter)
        if d is None or d[0] > n:
            raise VassepError("ALPHABET_MISMATCH", f"{letter!r} is not in the Dyck alphabet of size {n}")
        i, s = d
        bal[i - 1] += s
        if bal[i - 1] < 0:
            return False
    return True


# ---------------------------------------------------------------------------
# reduction of a pair of VASS to one lcVASS against the Dyck language


def _emit_label(z: Sequence[int]) -> Label:
    pos = [(dyck_letter(i + 1), v) for i, v in enumerate(z) if v > 0]
    neg = [(dyck_letter(i + 1, True), -v) for i, v in enumerate(z) if v < 0]
    label = tuple(pos + neg)
    return label if label else ((dyck_letter(1), 1), (dyck_letter(1, True), 1))


def reduce(V1: Vass, V2: Vass) -> Vass:
    """Product lcVASS that acts like ``V1`` and spells ``V2``'s updates as Dyck letters.

    States are ``p|q|f`` where ``f`` is the degeneralisation flag: in copy 0 the
    run waits for a final state of ``V1``, in copy 1 for one of ``V2``.
    """
    if V2.dim < 1:
        raise VassepError("SEMANTIC_ERROR", "second VASS needs at least one counter")
    if set(V1.alphabet) != set(V2.alphabet):
        raise VassepError("ALPHABET_MISMATCH", "both VASS must share one alphabet")
    if any(len(t.label) > 1 or (t.label and t.label[0][1] != 1) for t in V1.transitions + V2.transitions):
        raise VassepError("SEMANTIC_ERROR", "reduce expects single-letter or epsilon labels")
    n = V2.dim
    zero1 = tuple(0 for _ in range(V1.dim))
    zero2 = tuple(0 for _ in range(n))

    def name(p, q, f):
        return f"{p}|{q}|{f}"

    def flag_after(p, q, f):
        if f == 0 and p in V1.finals:
            return 1
        if f == 1 and q in V2.finals:
            return 0
        return f

    start = (V1.init, V2.init, 0)
    order = [start]
    seen = {start}
    trans = []
    seen_t: set = set()
    i = 0
    while i < len(order):
        p, q, f = order[i]
        i += 1
        g = flag_after(p, q, f)
        moves = []
        for t1 in V1.outgoing(p):
            if not t1.label:
                moves.append((t1.dst, q, t1.update, zero2))
                continue
            for t2 in V2.outgoing(q):
                if t2.label == t1.label:
                    moves.append((t1.dst, t2.dst, t1.update, t2.update))
        for t2 in V2.outgoing(q):
            if not t2.label:
                moves.append((p, t2.dst, zero1, t2.update))
        for p2, q2, upd, z in moves:
            nxt = (p2, q2, g)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
            t = Transition(name(p, q, f), _emit_label(z), tuple(upd), name(p2, q2, g))
            if t not in seen_t:
                seen_t.add(t)
                trans.append(t)
    states = tuple(name(*s) for s in order)
    finals = frozenset(name(p, q, f) for p, q, f in order if f == 0 and p in V1.finals)
    return Vass(V1.dim, dyck_alphabet(n), states, name(*start), finals, tuple(trans))
