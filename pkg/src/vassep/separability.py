"""Deciding omega-regular separability of a Buchi VASS language from the Dyck language.

Pipeline (default mode): the Karp-Miller graph of ``V x D_n``, the pump VASS
whose states are that graph's nodes, the Karp-Miller graph of the pump VASS,
and finally a search for three loops (alpha, beta, gamma) on a final node whose
cycle multiplicities solve a singly non-linear system in the scalar ``t``.
Every hit is converted into a flower over ``V x D_n`` and re-checked by
:func:`validate_flower`, which recomputes all effects on its own.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import VassepError
from .exact_arith import IntPoly, PolyMatrix, format_rational, parse_rational
from .exact_lp import lp_feasible_point
from .karp_miller import (
    DEFAULT_CYCLE_CAP,
    DEFAULT_NODE_CAP,
    WITNESS_RETRIES,
    Cycle,
    CycleBasis,
    KmGraph,
    build_km,
    build_pump,
    closed_walk,
    coverable,
    scc_and_cycles,
    witness_cover,
)
from .snls import Snls, scale_to_integer, solve
from .vass_core import (
    OMEGA,
    ExtConfig,
    Transition,
    Vass,
    check_run,
    dyck_dimension,
    expand_label,
    normalize_labels,
    parse_dyck_letter,
    product_dyck,
    reduce,
)

log = logging.getLogger(__name__)

CERT_FORMAT = "vassep-certificate"
CERT_VERSION = 1
DEFAULT_SUPPORT_CAP = 5_000
DEFAULT_TRIPLE_CAP = 200_000
DEFAULT_BOUND_CONSTANT = 8


class Verdict(enum.Enum):
    SEPARABLE = "SEPARABLE"
    INSEPARABLE = "INSEPARABLE"


@dataclass(frozen=True)
class SearchOptions:
    single_km: bool = False
    pump_external_product: bool = False
    node_cap: int = DEFAULT_NODE_CAP
    cycle_cap: int = DEFAULT_CYCLE_CAP
    support_cap: int = DEFAULT_SUPPORT_CAP
    triple_cap: int = DEFAULT_TRIPLE_CAP


# ---------------------------------------------------------------------------
# flowers and certificates


@dataclass(frozen=True)
class Bloom:
    final_state: str
    gamma: frozenset  # 0-based counter indices where loops must not decrease
    alpha: tuple  # transition ids of V (equivalently of V x D_n)
    beta: tuple
    gamma_loop: tuple
    t: Fraction


@dataclass(frozen=True)
class Flower:
    root: ExtConfig
    stem: tuple
    bloom: Bloom


@dataclass
class KmFlower:
    node: int  # node of the graph searched (KM of the pump VASS, or KM of the product)
    root_node: int  # node of KM(V x D_n) underneath
    basis: CycleBasis
    x_alpha: dict  # cycle index -> multiplicity
    x_beta: dict
    x_gamma: dict
    t: Fraction
    snls: Optional[Snls] = None
    mode: str = "pump"
    key: tuple = ()

    @property
    def supports(self) -> tuple:
        return (tuple(sorted(self.x_alpha)), tuple(sorted(self.x_beta)), tuple(sorted(self.x_gamma)))


@dataclass
class Certificate:
    flower: Flower
    provenance: dict = field(default_factory=dict)

    @property
    def t(self) -> Fraction:
        return self.flower.bloom.t

    def to_json(self) -> dict:
        f = self.flower
        b = f.bloom
        return {
            "format": CERT_FORMAT,
            "version": CERT_VERSION,
            "verdict": Verdict.INSEPARABLE.value,
            "root": {"state": f.root.state, "values": ["w" if v is OMEGA else str(v) for v in f.root.values]},
            "stem": list(f.stem),
            "final_state": b.final_state,
            "gamma": sorted(i + 1 for i in b.gamma),
            "loops": {"alpha": list(b.alpha), "beta": list(b.beta), "gamma": list(b.gamma_loop)},
            "t": format_rational(b.t),
            "provenance": self.provenance,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Certificate":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            if data.get("format") != CERT_FORMAT:
                raise VassepError("PARSE_ERROR", "not a certificate file")
            if int(data.get("version", 0)) > CERT_VERSION:
                raise VassepError("PARSE_ERROR", f"unsupported certificate version {data['version']}")
            vals = tuple(OMEGA if v in ("w", "ω") else int(v) for v in data["root"]["values"])
            root = ExtConfig(data["root"]["state"], vals)
            loops = data["loops"]
            bloom = Bloom(
                data["final_state"],
                frozenset(int(i) - 1 for i in data["gamma"]),
                tuple(int(k) for k in loops["alpha"]),
                tuple(int(k) for k in loops["beta"]),
                tuple(int(k) for k in loops["gamma"]),
                parse_rational(str(data["t"])),
            )
            return cls(Flower(root, tuple(int(k) for k in data["stem"]), bloom), data.get("provenance", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise VassepError("PARSE_ERROR", f"malformed certificate: {exc}") from None


# ---------------------------------------------------------------------------
# the SNLS over cycle multiplicities


def flower_snls(basis: CycleBasis, supports: tuple, d: int, n: int) -> Snls:
    """Constraints on the multiplicities of the support cycles, parametric in ``t``.

    Columns are the alpha-support, then beta, then gamma.  Cycle effects on
    finite counters are zero, so only the internal sum, the alpha+beta balance
    and the scalar equation appear.
    """
    sa, sb, sg = (list(s) for s in supports)
    cols = [("a", c) for c in sa] + [("b", c) for c in sb] + [("g", c) for c in sg]
    nc = len(cols)
    cyc = basis.cycles
    rows, rhs = [], []
    for j in range(nc):
        rows.append([IntPoly.const(1 if k == j else 0) for k in range(nc)])
        rhs.append(IntPoly.const(1))
    for i in range(d):
        row = [IntPoly.const(cyc[c].delta[i]) for _, c in cols]
        if any(not e.is_zero() for e in row):
            rows.append(row)
            rhs.append(IntPoly())
    for i in range(n):
        row = [IntPoly.const(cyc[c].phi[i] if which in "ab" else 0) for which, c in cols]
        if any(not e.is_zero() for e in row):
            rows.append(row)
            rhs.append(IntPoly())
    for i in range(n):
        # phi(a)+phi(b)+phi(g) - t*phi(a) = 0, written as two inequalities
        row = []
        for which, c in cols:
            f = cyc[c].phi[i]
            row.append(IntPoly([f, -f]) if which == "a" else IntPoly.const(f))
        if any(not e.is_zero() for e in row):
            rows.append(row)
            rhs.append(IntPoly())
            rows.append([-e for e in row])
            rhs.append(IntPoly())
    return Snls(PolyMatrix.from_rows(rows, nc), tuple(rhs))


def _unit_t(pa: Sequence[int], total: Sequence[int]) -> Optional[Fraction]:
    """Scalar t with total == t * pa, or None; 0 when pa vanishes."""
    t = None
    for a, s in zip(pa, total):
        if a == 0:
            if s != 0:
                return None
            continue
        cand = Fraction(s, a)
        if t is None:
            t = cand
        elif t != cand:
            return None
    return Fraction(0) if t is None else t


def _vec_sum(vs: Iterable[Sequence[int]], dim: int) -> list:
    out = [0] * dim
    for v in vs:
        for i, x in enumerate(v):
            out[i] += x
    return out


def _triple_relaxation(cyc, cols_a, cols_b, cols_g, d, n) -> bool:
    """Linear necessary condition: drop the scalar equation."""
    allc = [("a", c) for c in cols_a] + [("b", c) for c in cols_b] + [("g", c) for c in cols_g]
    nv = len(allc)
    A, b = [], []
    for j in range(nv):
        A.append([1 if k == j else 0 for k in range(nv)])
        b.append(1)
    for i in range(d):
        A.append([cyc[c].delta[i] for _, c in allc])
        b.append(0)
    for i in range(n):
        A.append([cyc[c].phi[i] if w in "ab" else 0 for w, c in allc])
        b.append(0)
    return lp_feasible_point(A, b, nv) is not None


def _node_relaxation(cyc, d, n) -> bool:
    """Some nonzero alpha, beta, gamma combinations meet the linear conditions."""
    N = len(cyc)
    if N == 0:
        return False
    nv = 3 * N
    A, b = [], []
    for blk in range(3):
        A.append([1 if blk * N <= k < (blk + 1) * N else 0 for k in range(nv)])
        b.append(1)
    for i in range(d):
        A.append([cyc[k % N].delta[i] for k in range(nv)])
        b.append(0)
    for i in range(n):
        A.append([cyc[k % N].phi[i] if k < 2 * N else 0 for k in range(nv)])
        b.append(0)
    return lp_feasible_point(A, b, nv) is not None


def _connected_supports(basis: CycleBasis, node: int, cap: int) -> Iterable[tuple]:
    """Connected cycle subsets containing ``node``, by size then index."""
    cyc = basis.cycles
    level = sorted({(i,) for i, c in enumerate(cyc) if node in c.nodes})
    produced = 0
    while level:
        for s in level:
            produced += 1
            if produced > cap:
                raise VassepError("SEARCH_EXHAUSTED", f"more than {cap} cycle supports", cap=cap)
            yield s
        nxt = set()
        for s in level:
            covered = set().union(*(cyc[i].nodes for i in s))
            for j, c in enumerate(cyc):
                if j not in s and c.nodes & covered:
                    nxt.add(tuple(sorted(s + (j,))))
        level = sorted(nxt)


class _NodeSearch:
    """Lazily produces flower hits at one final node, one support-size level at a time."""

    def __init__(self, ctx: "_SearchContext", node: int, root_node: int):
        self.ctx = ctx
        self.node = node
        self.root_node = root_node
        self.basis = ctx.basis_for(node)
        self.error: Optional[VassepError] = None
        self._gen = self._levels()

    def next_batch(self) -> Optional[list]:
        try:
            return next(self._gen)
        except StopIteration:
            return None
        except VassepError as exc:
            if not exc.is_resource_cap:
                raise
            self.error = exc
            return None

    def _levels(self):
        ctx = self.ctx
        cyc = self.basis.cycles
        if not cyc or not _node_relaxation(cyc, ctx.d, ctx.n):
            return
        supports_by_size: dict = {}
        gen = _connected_supports(self.basis, self.node, ctx.opts.support_cap)
        max_size = 0
        exhausted = False

        def fill(upto):
            nonlocal max_size, exhausted
            while not exhausted and max_size <= upto:
                try:
                    s = next(gen)
                except StopIteration:
                    exhausted = True
                    return
                supports_by_size.setdefault(len(s), []).append(s)
                max_size = len(s)

        level = 3
        examined = 0
        while True:
            fill(level)
            sizes = sorted(k for k in supports_by_size if k <= level - 2)
            if exhausted and level > 3 * max(supports_by_size, default=0):
                return
            hits = []
            for ka in sizes:
                for kb in sizes:
                    kg = level - ka - kb
                    if kg not in supports_by_size:
                        continue
                    for sa in supports_by_size[ka]:
                        for sb in supports_by_size[kb]:
                            for sg in supports_by_size[kg]:
                                examined += 1
                                if examined > ctx.opts.triple_cap:
                                    raise VassepError(
                                        "SEARCH_EXHAUSTED", f"more than {ctx.opts.triple_cap} support triples",
                                        cap=ctx.opts.triple_cap,
                                    )
                                hit = self._try(sa, sb, sg, level)
                                if hit is not None:
                                    hits.append(hit)
            if hits:
                hits.sort(key=lambda h: h.key)
                yield hits
            level += 1

    def _try(self, sa, sb, sg, level) -> Optional[KmFlower]:
        ctx = self.ctx
        cyc = self.basis.cycles
        d, n = ctx.d, ctx.n
        pa = _vec_sum((cyc[c].phi for c in sa), n)
        pb = _vec_sum((cyc[c].phi for c in sb), n)
        pg = _vec_sum((cyc[c].phi for c in sg), n)
        dl = _vec_sum((cyc[c].delta for c in list(sa) + list(sb) + list(sg)), d)
        if all(v >= 0 for v in dl) and all(a + b >= 0 for a, b in zip(pa, pb)):
            t = _unit_t(pa, [a + b + g for a, b, g in zip(pa, pb, pg)])
            if t is not None:
                return self._hit({c: 1 for c in sa}, {c: 1 for c in sb}, {c: 1 for c in sg}, t, None, level)
        if not _triple_relaxation(cyc, sa, sb, sg, d, n):
            return None
        S = flower_snls(self.basis, (sa, sb, sg), d, n)
        sol = solve(S)
        if sol is None:
            return None
        scaled = scale_to_integer(S, sol)
        if scaled is None:
            return None
        t, ys = scaled
        na, nb = len(sa), len(sb)
        xa = dict(zip(sa, ys[:na]))
        xb = dict(zip(sb, ys[na:na + nb]))
        xg = dict(zip(sg, ys[na + nb:]))
        return self._hit(xa, xb, xg, t, S, level)

    def _hit(self, xa, xb, xg, t, S, level) -> KmFlower:
        cyc = self.basis.cycles
        length = sum(m * len(cyc[c].edges) for x in (xa, xb, xg) for c, m in x.items())
        phi_ab = _vec_sum(
            ([m * v for v in cyc[c].phi] for x in (xa, xb) for c, m in x.items()), self.ctx.n
        )
        key = (
            level, length, abs(t.numerator) + t.denominator + (1 if t < 0 else 0),
            sum(phi_ab), self.root_node,
            tuple(sorted(xa.items())), tuple(sorted(xb.items())), tuple(sorted(xg.items())),
        )
        return KmFlower(self.node, self.root_node, self.basis, xa, xb, xg, t, S, self.ctx.mode, key)


class _SearchContext:
    def __init__(self, V: Vass, opts: SearchOptions):
        self.V = V
        self.opts = opts
        self.d = V.dim
        self.n = max(dyck_dimension(V.alphabet), 1)
        self.product = product_dyck(V, self.n)
        self.km1 = build_km(self.product, opts.node_cap)
        self.mode = "single-km" if opts.single_km else ("pump-external" if opts.pump_external_product else "pump")
        if opts.single_km:
            self.pump = None
            self.km2 = self.km1
        else:
            self.pump = build_pump(self.km1, V, opts.pump_external_product)
            self.km2 = build_km(self.pump.vass, opts.node_cap)
        self._bases: dict = {}

    def basis_for(self, node: int) -> CycleBasis:
        b = scc_and_cycles(self.km2, node, self.opts.cycle_cap, n=self.n)
        # keep only the internal part of the effects as delta
        if len(b.cycles) and len(b.cycles[0].delta) != self.d:
            b = CycleBasis(b.anchor, b.scc, [Cycle(c.edges, c.nodes, c.delta[:self.d], c.phi) for c in b.cycles])
        return b

    def root_of(self, node: int) -> int:
        if self.pump is None:
            return node
        return self.pump.node_of[self.km2.nodes[node].state]

    def final_nodes(self) -> list:
        finals = self.km2.vass.finals
        return [i for i, c in enumerate(self.km2.nodes) if c.state in finals]

    def product_transition_id(self, km2_edge: int) -> int:
        t = self.km2.edges[km2_edge].transition
        if self.pump is None:
            k1 = km2_edge
        else:
            k1 = self.pump.origin[t]
        return self._tid(self.km1.edges[k1].transition)

    def _tid(self, t: Transition) -> int:
        if not hasattr(self, "_tids"):
            self._tids = {tr: i for i, tr in enumerate(self.product.transitions)}
        return self._tids[t]


def iter_km_flowers(V: Vass, opts: SearchOptions = SearchOptions(), ctx: Optional[_SearchContext] = None):
    """Yield KM flowers best-first: smallest support level, then shortest loops, smallest t."""
    ctx = ctx or _SearchContext(V, opts)
    searches = [_NodeSearch(ctx, i, ctx.root_of(i)) for i in ctx.final_nodes()]
    batches = {id(s): s.next_batch() for s in searches}
    errors = []
    while True:
        live = [(b[0].key, id(s), s) for s in searches if (b := batches[id(s)])]
        if not live:
            break
        _, sid, s = min(live, key=lambda x: (x[0], x[1]))
        hit = batches[sid].pop(0)
        if not batches[sid]:
            batches[sid] = s.next_batch()
        yield hit
    for s in searches:
        if s.error is not None:
            errors.append(s.error)
    if errors:
        raise errors[0]


def km_flower_search(V: Vass, opts: SearchOptions = SearchOptions()) -> Optional[KmFlower]:
    V = normalize_labels(V)
    for hit in iter_km_flowers(V, opts):
        return hit
    return None


def km_flower_to_flower(V: Vass, kf: KmFlower, ctx: Optional[_SearchContext] = None) -> Flower:
    """Stitch the cycle multiplicities into closed walks on the product's KM node."""
    if ctx is None:
        ctx = _SearchContext(V, SearchOptions(single_km=kf.mode == "single-km",
                                              pump_external_product=kf.mode == "pump-external"))
    km2 = ctx.km2
    loops = []
    for mult in (kf.x_alpha, kf.x_beta, kf.x_gamma):
        walk = closed_walk(km2, kf.basis.cycles, mult, kf.node)
        loops.append(tuple(ctx.product_transition_id(k) for k in walk))
    root = ctx.km1.nodes[kf.root_node]
    gamma = frozenset(i for i, v in enumerate(root.values) if v is not OMEGA)
    return Flower(root, (), Bloom(root.state, gamma, loops[0], loops[1], loops[2], kf.t))


# ---------------------------------------------------------------------------
# independent validation


@dataclass
class ValidationReport:
    clauses: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.clauses) and all(self.clauses.values())

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "clauses": dict(self.clauses), "messages": list(self.messages)}


def validate_flower(V: Vass, f: Flower, km_of_product: Optional[KmGraph] = None) -> ValidationReport:
    """Re-check every clause of a flower over ``V x D_n`` from first principles."""
    rep = ValidationReport()
    V = normalize_labels(V)
    trans = V.transitions
    d = V.dim
    try:
        n = max(dyck_dimension(V.alphabet), 1)
    except VassepError as exc:
        rep.clauses["alphabet"] = False
        rep.messages.append(str(exc))
        return rep
    D = d + n
    b = f.bloom

    def full_update(t: Transition) -> list:
        out = list(t.update) + [0] * n
        for letter, count in t.label:
            i, s = parse_dyck_letter(letter)
            out[d + i - 1] += s * count
        return out

    def lift(ids) -> Optional[list]:
        if any(not isinstance(k, int) or k < 0 or k >= len(trans) for k in ids):
            return None
        return [Transition(trans[k].src, trans[k].label, tuple(full_update(trans[k])), trans[k].dst) for k in ids]

    ok_shape = len(f.root.values) == D and all(0 <= i < D for i in b.gamma)
    loops = {name: lift(ids) for name, ids in (("alpha", b.alpha), ("beta", b.beta), ("gamma", b.gamma_loop))}
    stem = lift(f.stem)
    ok_shape = ok_shape and stem is not None and all(v is not None for v in loops.values())
    rep.clauses["shape"] = ok_shape
    if not ok_shape:
        rep.messages.append("dimensions or transition ids out of range")
        return rep
    rep.clauses["final_state"] = b.final_state in V.finals
    closed = True
    for name, lp in loops.items():
        if not lp:
            closed = False
            rep.messages.append(f"loop {name} is empty")
            continue
        if lp[0].src != b.final_state or lp[-1].dst != b.final_state:
            closed = False
            rep.messages.append(f"loop {name} does not start and end in {b.final_state}")
        for x, y in zip(lp, lp[1:]):
            if x.dst != y.src:
                closed = False
                rep.messages.append(f"loop {name} is not a connected path")
                break
    rep.clauses["loops_closed"] = closed
    if not closed:
        return rep

    def total(lp):
        s = [0] * D
        for t in lp:
            for i, z in enumerate(t.update):
                s[i] += z
        return s

    eff = {name: total(lp) for name, lp in loops.items()}
    rep.clauses["i_gamma_nonnegative"] = all(eff[nm][i] >= 0 for nm in eff for i in b.gamma)
    rep.clauses["ii_internal_sum"] = all(eff["alpha"][i] + eff["beta"][i] + eff["gamma"][i] >= 0 for i in range(d))
    phi = {nm: eff[nm][d:] for nm in eff}
    rep.clauses["iii_alpha_beta_balance"] = all(a + c >= 0 for a, c in zip(phi["alpha"], phi["beta"]))
    rep.clauses["iv_scalar_multiple"] = all(
        a + c + g == b.t * a for a, c, g in zip(phi["alpha"], phi["beta"], phi["gamma"])
    )
    # stem: from root to a configuration at the final state with Omega among its omegas
    root = f.root
    root_ok = root.state in V.states
    stem_ok = root_ok
    end = None
    if root_ok:
        if stem and stem[0].src != root.state:
            stem_ok = False
        else:
            vals = list(root.values)
            state = root.state
            for t in stem:
                if t.src != state:
                    stem_ok = False
                    break
                for i, z in enumerate(t.update):
                    if vals[i] is OMEGA:
                        continue
                    vals[i] += z
                    if vals[i] < 0:
                        stem_ok = False
                state = t.dst
            end = ExtConfig(state, tuple(vals))
    if stem_ok:
        omega_end = {i for i, v in enumerate(end.values) if v is OMEGA}
        omega_part = set(range(D)) - set(b.gamma)
        stem_ok = end.state == b.final_state and omega_part <= omega_end
    loops_ok = stem_ok
    if stem_ok:
        for nm, lp in loops.items():
            vals = list(end.values)
            for t in lp:
                for i, z in enumerate(t.update):
                    if vals[i] is OMEGA:
                        continue
                    vals[i] += z
                    if vals[i] < 0 and i in b.gamma:
                        loops_ok = False
                        rep.messages.append(f"loop {nm} drives counter {i + 1} negative")
    rep.clauses["stem"] = stem_ok
    rep.clauses["gamma_nonnegative_along_loops"] = loops_ok
    if km_of_product is None:
        km_of_product = build_km(product_dyck(V, n))
    rep.clauses["root_coverable"] = root_ok and coverable(km_of_product, root)
    for k, v in rep.clauses.items():
        if not v and not any(k in m for m in rep.messages):
            rep.messages.append(f"clause {k} fails")
    return rep


# ---------------------------------------------------------------------------
# decisions


@dataclass
class Decision:
    verdict: Verdict
    certificate: Optional[Certificate] = None
    diagnostics: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "diagnostics": list(self.diagnostics), "stats": dict(self.stats)}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


def _provenance(ctx: _SearchContext, kf: KmFlower) -> dict:
    prov = {
        "mode": kf.mode,
        "km_product_node": kf.root_node,
        "km_search_node": kf.node,
        "cycles": {
            name: [{"edges": list(kf.basis.cycles[c].edges), "multiplicity": m} for c, m in sorted(x.items())]
            for name, x in (("alpha", kf.x_alpha), ("beta", kf.x_beta), ("gamma", kf.x_gamma))
        },
        "normalized_input": True,
    }
    if kf.snls is not None:
        inst = kf.snls.to_json()
        prov["snls"] = inst
        prov["snls_sha256"] = hashlib.sha256(json.dumps(inst, sort_keys=True).encode()).hexdigest()
    else:
        prov["snls"] = None
        prov["unit_multiplicities"] = True
    return prov


def decide_dyck(V: Vass, opts: SearchOptions = SearchOptions()) -> Decision:
    """SEPARABLE, or INSEPARABLE with a validated certificate."""
    V = normalize_labels(V)
    if not V.finals:
        return Decision(Verdict.SEPARABLE, stats={"reason": "no final states"})
    ctx = _SearchContext(V, opts)
    stats = {"km_product_nodes": len(ctx.km1.nodes), "km_search_nodes": len(ctx.km2.nodes), "mode": ctx.mode}
    log.info("mode %s: KM of the product has %d nodes, search graph %d", ctx.mode,
             stats["km_product_nodes"], stats["km_search_nodes"])
    diagnostics = []
    for kf in iter_km_flowers(V, opts, ctx):
        flower = km_flower_to_flower(V, kf, ctx)
        report = validate_flower(V, flower, ctx.km1)
        log.info("hit at node %d with t=%s: %s", kf.node, format_rational(kf.t), "valid" if report.ok else "rejected")
        if report.ok:
            cert = Certificate(flower, _provenance(ctx, kf))
            return Decision(Verdict.INSEPARABLE, cert, diagnostics, stats)
        diagnostics.append({"rejected_hit": list(kf.key[:4]), "report": report.to_json()})
    return Decision(Verdict.SEPARABLE, None, diagnostics, stats)


def expand_counts(V: Vass) -> Vass:
    """Replace ``letter^k`` labels by chains of k single letters."""
    if all(c == 1 for t in V.transitions for _, c in t.label):
        return V
    expanded = []
    for t in V.transitions:
        letters = expand_label(t.label)
        expanded.append(Transition(t.src, tuple((a, 1) for a in letters), t.update, t.dst))
    return normalize_labels(Vass(V.dim, V.alphabet, V.states, V.init, V.finals, tuple(expanded)))


def decide(V1: Vass, V2: Vass, opts: SearchOptions = SearchOptions()) -> Decision:
    """Separability of two Buchi VASS languages via the reduction to the Dyck case."""
    if not V1.finals:
        return Decision(Verdict.SEPARABLE, stats={"reason": "first VASS has no final states"})
    R = reduce(expand_counts(normalize_labels(V1)), expand_counts(normalize_labels(V2)))
    dec = decide_dyck(R, opts)
    dec.stats["reduction"] = {
        "states": len(R.states), "transitions": len(R.transitions), "dim": R.dim, "dyck_n": V2.dim,
    }
    if dec.certificate is not None:
        dec.certificate.provenance["reduced_vass_states"] = len(R.states)
    return dec


def flower_size_bound_log2(V: Vass, C: int = DEFAULT_BOUND_CONSTANT) -> int:
    """Exponent of the bound: ``|V|^(C*(d+n)^2)`` with ``|V|`` states plus transitions."""
    size = len(V.states) + len(V.transitions)
    try:
        n = dyck_dimension(V.alphabet)
    except VassepError:
        n = 0
    return size ** (C * (V.dim + n) ** 2)


def flower_size_bound(V: Vass, C: int = DEFAULT_BOUND_CONSTANT) -> int:
    return 1 << flower_size_bound_log2(V, C)


def flower_size_bound_raw(size: int, dims: int, C: int = 1) -> int:
    return 1 << (size ** (C * dims * dims))


# ---------------------------------------------------------------------------
# ultimately periodic words and the basic separators


@dataclass(frozen=True)
class UPWord:
    prefix: tuple
    period: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period:
            raise VassepError("SEMANTIC_ERROR", "period must be nonempty")

    def letter(self, pos: int) -> str:
        if pos < len(self.prefix):
            return self.prefix[pos]
        return self.period[(pos - len(self.prefix)) % len(self.period)]

    def __str__(self):
        return f"{' '.join(self.prefix) or 'eps'} ({' '.join(self.period)})^w"


def _step(letter: str) -> tuple:
    d = parse_dyck_letter(letter)
    if d is None:
        raise VassepError("ALPHABET_MISMATCH", f"{letter!r} is not a Dyck letter")
    return d


def _balance(word: Sequence[str], i: int) -> int:
    s = 0
    for a in word:
        j, v = _step(a)
        if j == i:
            s += v
    return s


def member_P(w: UPWord, i: int, k: int) -> bool:
    """Does some prefix go negative on counter ``i`` before its balance ever exceeds ``k``?"""
    per = _balance(w.period, i)
    u, p = len(w.prefix), len(w.period)
    if per < 0:
        # each period loses at least one, so the walk is negative after enough of them
        high = 0
        bal = 0
        for pos in range(u + p):
            j, v = _step(w.letter(pos))
            bal += v if j == i else 0
            high = max(high, bal)
        limit = u + (high // -per + 2) * p
    else:
        # from the second period on the minimum can only repeat or rise
        limit = u + 2 * p
    bal = 0
    for pos in range(limit):
        j, v = _step(w.letter(pos))
        if j == i:
            bal += v
        if bal < 0:
            return True
        if bal > k:
            return False
    return False


def _weighted(letter: str, x: Sequence[int]) -> int:
    j, v = _step(letter)
    return v * x[j - 1] if j - 1 < len(x) else 0


def member_S(w: UPWord, x: Sequence[int], k: int) -> bool:
    """Is ``w`` eventually made of weighted-negative blocks with all infixes at most ``k``?"""
    drift = sum(_weighted(a, x) for a in w.period)
    if drift >= 0:
        return False
    p = len(w.period)
    u = len(w.prefix)
    # longer infixes only lose weight, so a window of a few periods suffices
    window = (math.ceil(k / -drift) + 2) * p + p
    horizon = u + 2 * p + window + 1
    B = [0]
    for pos in range(horizon):
        B.append(B[-1] + _weighted(w.letter(pos), x))
    starts = u + 2 * p
    best = [None] * (starts + 1)
    for i in range(starts - 1, -1, -1):
        m = max(B[j] - B[i] for j in range(i + 1, min(i + window, horizon) + 1))
        best[i] = m if best[i + 1] is None else max(m, best[i + 1])
    return any(best[s] is not None and best[s] <= k for s in range(u + p))


@dataclass
class DemoReport:
    word: Optional[UPWord]
    run_valid: bool = False
    outside_P: dict = field(default_factory=dict)
    outside_S: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.word is not None and self.run_valid
            and all(self.outside_P.values()) and all(self.outside_S.values())
        )

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "prefix": list(self.word.prefix) if self.word else None,
            "period": list(self.word.period) if self.word else None,
            "run_valid": self.run_valid,
            "outside_P": {str(i): v for i, v in self.outside_P.items()},
            "outside_S": {",".join(map(str, x)): v for x, v in self.outside_S.items()},
            "messages": self.messages,
        }


def demonstrate(
    V: Vass, cert: Certificate, k: int, X: Iterable[Sequence[int]], node_cap: int = DEFAULT_NODE_CAP,
    retries: int = WITNESS_RETRIES,
) -> DemoReport:
    """Build an accepted word that avoids every P_{i,k} and every S_{x,k} with x in X."""
    V = normalize_labels(V)
    n = max(dyck_dimension(V.alphabet), 1)
    product = product_dyck(V, n)
    km = build_km(product, node_cap)
    rep_v = validate_flower(V, cert.flower, km)
    if not rep_v.ok:
        return DemoReport(None, messages=["certificate does not validate"] + rep_v.messages)
    f = cert.flower
    b = f.bloom
    tr = product.transitions
    loops = [[tr[i] for i in ids] for ids in (b.alpha, b.beta, b.gamma_loop)]
    y = 1
    for lp in loops:
        run = [0] * product.dim
        for t in lp:
            for i, z in enumerate(t.update):
                run[i] += z
                y = max(y, -run[i])
    node = km.index_of(f.root)
    if node is None:
        node = next(i for i, c in enumerate(km.nodes) if c.covers(f.root))
    prefix_run = witness_cover(km, node, 3 * (k + 1) * y, retries)
    prefix_run += [tr[i] for i in f.stem]
    period_run = [t for lp in loops for _ in range(k + 1) for t in lp]
    word = UPWord(
        tuple(a for t in prefix_run for a in expand_label(t.label)),
        tuple(a for t in period_run for a in expand_label(t.label)),
    )
    rep = DemoReport(word)
    # internal counters only: the accepting run of V itself
    internal = [Transition(t.src, t.label, t.update[:V.dim], t.dst) for t in prefix_run + period_run * 3]
    res = check_run(V, ExtConfig(V.init, tuple(0 for _ in range(V.dim))), internal)
    per_eff = [sum(t.update[i] for t in period_run) for i in range(V.dim)]
    rep.run_valid = res.ok and all(v >= 0 for v in per_eff) and period_run[-1].dst == b.final_state \
        and b.final_state in V.finals
    if not rep.run_valid:
        rep.messages.append("underlying run is not valid")
    for i in range(1, n + 1):
        rep.outside_P[i] = not member_P(word, i, k)
    for x in X:
        x = tuple(x)
        rep.outside_S[x] = not member_S(word, x, k)
    return rep

