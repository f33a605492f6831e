"""Karp-Miller graphs, coverability, concrete covering runs and Buchi nonemptiness.

The graph is built with a FIFO worklist over nodes and the transitions of each
state in file order, so the result is reproducible.  A successor coordinate is
accelerated to omega when an already existing node with the same state lies
below the successor, strictly below on that coordinate, and can reach the
current node through the edges generated so far.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from .errors import VassepError
from .exact_lp import lp_feasible_point
from .vass_core import (
    OMEGA,
    ExtConfig,
    Transition,
    Vass,
    check_run,
    dyck_dimension,
    ext_leq,
    format_ext_vector,
    format_label,
    label_external,
)

DEFAULT_NODE_CAP = 100_000
DEFAULT_CYCLE_CAP = 10_000
WITNESS_RETRIES = 20


@dataclass(frozen=True)
class Acceleration:
    """Pumping step recorded on an edge: loop from ``witness`` back to the edge source."""

    witness: int
    path: tuple  # edge ids from the witness node to the edge's source node
    coords: tuple


@dataclass(frozen=True)
class KmEdge:
    src: int
    transition: Transition
    dst: int
    accels: tuple = ()


@dataclass
class KmGraph:
    vass: Vass
    nodes: list
    edges: list
    init_node: int = 0
    creator: list = field(default_factory=list)  # edge id that first produced each node
    _index: dict = field(default_factory=dict, repr=False)

    def node(self, i: int) -> ExtConfig:
        return self.nodes[i]

    def index_of(self, c: ExtConfig) -> Optional[int]:
        return self._index.get(c)

    def out_edges(self, i: int) -> list:
        return [k for k, e in enumerate(self.edges) if e.src == i]

    def omega_set(self, i: int) -> frozenset:
        return frozenset(k for k, v in enumerate(self.nodes[i].values) if v is OMEGA)

    def nx_graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        for k, e in enumerate(self.edges):
            g.add_edge(e.src, e.dst, key=k)
        return g

    def to_json(self) -> dict:
        return {
            "init": self.init_node,
            "nodes": [{"id": i, "state": n.state, "values": ["w" if v is OMEGA else str(v) for v in n.values]}
                      for i, n in enumerate(self.nodes)],
            "edges": [{"src": e.src, "dst": e.dst, "transition": self.vass.transitions.index(e.transition)}
                      for e in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph km {"]
        for i, n in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{n.state} {format_ext_vector(n.values)}"];')
        for e in self.edges:
            lines.append(f'  n{e.src} -> n{e.dst} [label="{format_label(e.transition.label)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _apply(values: tuple, update: Sequence[int]) -> Optional[list]:
    out = []
    for v, z in zip(values, update):
        if v is OMEGA:
            out.append(OMEGA)
            continue
        w = v + z
        if w < 0:
            return None
        out.append(w)
    return out


def _path_between(edges: list, preds: dict, src: int, dst: int) -> tuple:
    """Shortest edge path from src to dst (BFS over predecessor lists)."""
    if src == dst:
        return ()
    parent = {dst: None}
    queue = deque([dst])
    while queue:
        v = queue.popleft()
        for k in preds.get(v, ()):
            u = edges[k].src
            if u not in parent:
                parent[u] = k
                if u == src:
                    queue.clear()
                    break
                queue.append(u)
    path = []
    cur = src
    while cur != dst:
        k = parent[cur]
        path.append(k)
        cur = edges[k].dst
    return tuple(path)


def build_km(V: Vass, node_cap: int = DEFAULT_NODE_CAP) -> KmGraph:
    """Karp-Miller graph of ``V`` from its initial configuration."""
    if node_cap < 1:
        raise VassepError("SEMANTIC_ERROR", "node cap must be positive")
    start = ExtConfig(V.init, tuple(0 for _ in range(V.dim)))
    nodes = [start]
    index = {start: 0}
    by_state: dict = {V.init: [0]}
    edges: list = []
    preds: dict = {}
    creator = [None]
    queue = deque([0])
    while queue:
        u = queue.popleft()
        cur = nodes[u]
        # nodes that can reach u; u's own out-edges never change this set
        ancestors = {u}
        stack = [u]
        while stack:
            v = stack.pop()
            for k in preds.get(v, ()):
                w = edges[k].src
                if w not in ancestors:
                    ancestors.add(w)
                    stack.append(w)
        for t in V.outgoing(cur.state):
            vals = _apply(cur.values, t.update)
            if vals is None:
                continue
            accels = []
            changed = True
            while changed:
                changed = False
                for w in by_state.get(t.dst, ()):
                    if w not in ancestors:
                        continue
                    wv = nodes[w].values
                    if not ext_leq(wv, vals):
                        continue
                    coords = tuple(
                        i for i, (a, b) in enumerate(zip(wv, vals)) if b is not OMEGA and a is not OMEGA and a < b
                    )
                    if coords:
                        for i in coords:
                            vals[i] = OMEGA
                        accels.append(Acceleration(w, _path_between(edges, preds, w, u), coords))
                        changed = True
            succ = ExtConfig(t.dst, tuple(vals))
            v = index.get(succ)
            k = len(edges)
            if v is None:
                if len(nodes) >= node_cap:
                    raise VassepError(
                        "NODE_CAP_EXCEEDED", f"Karp-Miller graph exceeds {node_cap} nodes",
                        cap=node_cap, nodes=len(nodes), edges=len(edges),
                    )
                v = len(nodes)
                nodes.append(succ)
                index[succ] = v
                by_state.setdefault(t.dst, []).append(v)
                creator.append(k)
                queue.append(v)
            edges.append(KmEdge(u, t, v, tuple(accels)))
            preds.setdefault(v, []).append(k)
    return KmGraph(V, nodes, edges, 0, creator, index)


def parse_target(text: str) -> ExtConfig:
    """``"q1:(3,w,0)"`` with ``w`` for omega."""
    if ":" not in text:
        raise VassepError("PARSE_ERROR", f"target must look like state:(v1,...), got {text!r}")
    state, vec = text.rsplit(":", 1)
    vec = vec.strip()
    if not (vec.startswith("(") and vec.endswith(")")):
        raise VassepError("PARSE_ERROR", f"bad target vector {vec!r}")
    inner = vec[1:-1].strip()
    vals = []
    for tok in inner.split(",") if inner else []:
        tok = tok.strip()
        if tok in ("w", "ω", "omega"):
            vals.append(OMEGA)
        else:
            try:
                v = int(tok)
            except ValueError:
                raise VassepError("PARSE_ERROR", f"bad target component {tok!r}") from None
            if v < 0:
                raise VassepError("PARSE_ERROR", "target components must be natural")
            vals.append(v)
    return ExtConfig(state.strip(), tuple(vals))


def coverable(km: KmGraph, target: ExtConfig) -> bool:
    """Some node has the target's state and dominates it (omega only by omega)."""
    if len(target.values) != km.vass.dim:
        raise VassepError("SEMANTIC_ERROR", "target dimension does not match")
    for n in km.nodes:
        if n.state != target.state:
            continue
        if all((b is OMEGA) if a is OMEGA else (b is OMEGA or b >= a) for a, b in zip(target.values, n.values)):
            return True
    return False


# ---------------------------------------------------------------------------
# concrete witnesses


def _max_update(V: Vass) -> int:
    return max((abs(z) for t in V.transitions for z in t.update), default=0)


class _Concretizer:
    def __init__(self, km: KmGraph, base: int):
        self.km = km
        self.base = base
        self.U = max(_max_update(km.vass), 1)
        self._memo: dict = {}

    def edge(self, k: int, demand: int) -> list:
        key = (k, demand)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        e = self.km.edges[k]
        seq = [e.transition]
        loops = []
        for acc in e.accels:
            body = self.path(acc.path, self.base) + [e.transition]
            loops.append(body)
        # later loops may eat what earlier loops pumped, so earlier loops run longer
        counts = [0] * len(loops)
        tail = 0
        for j in range(len(loops) - 1, -1, -1):
            counts[j] = max(demand, self.base) + tail
            tail += counts[j] * len(loops[j]) * self.U
        for body, c in zip(loops, counts):
            seq.extend(body * c)
        self._memo[key] = seq
        return seq

    def path(self, edge_ids: Sequence[int], demand: int) -> list:
        parts = []
        need = demand
        for k in reversed(edge_ids):
            seg = self.edge(k, need)
            parts.append(seg)
            need += len(seg) * self.U
        out = []
        for seg in reversed(parts):
            out.extend(seg)
        return out


def tree_path(km: KmGraph, node: int) -> list:
    """Edge ids along the creation tree from the initial node."""
    out = []
    while km.creator[node] is not None:
        k = km.creator[node]
        out.append(k)
        node = km.edges[k].src
    out.reverse()
    return out


def witness_cover(km: KmGraph, node: int, slack: int, retries: int = WITNESS_RETRIES) -> list:
    """A concrete run of the VASS from its initial configuration covering ``node``.

    Omega coordinates of the node end at least at ``slack``; the others at the
    node's value.  Pump counts start at ``slack`` and double until the run
    validates.
    """
    if isinstance(node, ExtConfig):
        idx = km.index_of(node)
        if idx is None:
            raise VassepError("SEMANTIC_ERROR", f"{node} is not a node of the graph")
        node = idx
    target = km.nodes[node]
    start = ExtConfig(km.vass.init, tuple(0 for _ in range(km.vass.dim)))
    edges = tree_path(km, node)
    base = max(slack, 1)
    for _ in range(retries):
        run = _Concretizer(km, base).path(edges, base)
        rep = check_run(km.vass, start, run)
        if rep.ok and rep.final.state == target.state and all(
            (v >= slack) if a is OMEGA else v >= a for a, v in zip(target.values, rep.final.values)
        ):
            return run
        base *= 2
    raise VassepError("INTERNAL", f"could not concretise node {node} after {retries} retries")


# ---------------------------------------------------------------------------
# the pump VASS


def node_name(c: ExtConfig) -> str:
    return f"{c.state}@{format_ext_vector(c.values)}"


@dataclass
class PumpVass:
    vass: Vass
    node_of: dict  # pump state name -> KM node id
    source_km: KmGraph
    origin: dict  # pump transition -> KM edge id


def build_pump(km_of_product: KmGraph, V: Vass, external_product: bool = False) -> PumpVass:
    """VASS whose states are the KM nodes of ``V x D_n``, keeping V's internal updates."""
    d = V.dim
    names = [node_name(c) for c in km_of_product.nodes]
    trans = []
    origin = {}
    for k, e in enumerate(km_of_product.edges):
        upd = tuple(e.transition.update) if external_product else tuple(e.transition.update[:d])
        t = Transition(names[e.src], e.transition.label, upd, names[e.dst])
        if t not in origin:
            origin[t] = k
            trans.append(t)
    finals = frozenset(names[i] for i, c in enumerate(km_of_product.nodes) if c.state in V.finals)
    dim = km_of_product.vass.dim if external_product else d
    pv = Vass(dim, km_of_product.vass.alphabet, tuple(names), names[km_of_product.init_node], finals, tuple(trans))
    return PumpVass(pv, {nm: i for i, nm in enumerate(names)}, km_of_product, origin)


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    edges: tuple  # KM edge ids in walk order
    nodes: frozenset
    delta: tuple
    phi: tuple

    @property
    def start(self) -> int:
        return min(self.nodes)


@dataclass
class CycleBasis:
    anchor: int
    scc: frozenset
    cycles: list


def _effects(km: KmGraph, edge_ids: Sequence[int], n: int) -> tuple:
    d = km.vass.dim
    delta = [0] * d
    phi = [0] * n
    for k in edge_ids:
        t = km.edges[k].transition
        for i, z in enumerate(t.update):
            delta[i] += z
        if n:
            for i, z in enumerate(label_external(t.label, n)):
                phi[i] += z
    return tuple(delta), tuple(phi)


def _dyck_n(V: Vass) -> int:
    try:
        return dyck_dimension(V.alphabet)
    except VassepError:
        return 0


def scc_of(km: KmGraph, anchor: int) -> frozenset:
    g = nx.DiGraph()
    g.add_nodes_from(range(len(km.nodes)))
    g.add_edges_from((e.src, e.dst) for e in km.edges)
    for comp in nx.strongly_connected_components(g):
        if anchor in comp:
            return frozenset(comp)
    return frozenset({anchor})


def scc_and_cycles(km: KmGraph, anchor: int, cycle_cap: int = DEFAULT_CYCLE_CAP, n: Optional[int] = None) -> CycleBasis:
    """All simple cycles inside the strongly connected component of ``anchor``."""
    if n is None:
        n = _dyck_n(km.vass)
    comp = scc_of(km, anchor)
    inner = [k for k, e in enumerate(km.edges) if e.src in comp and e.dst in comp]
    if not inner:
        return CycleBasis(anchor, comp, [])
    parallel: dict = {}
    for k in inner:
        e = km.edges[k]
        parallel.setdefault((e.src, e.dst), []).append(k)
    g = nx.DiGraph()
    g.add_nodes_from(sorted(comp))
    g.add_edges_from(sorted(parallel))
    omega = km.omega_set(anchor)
    found = []
    count = 0
    for cyc in nx.simple_cycles(g):
        # rotate so the smallest node comes first
        r = cyc.index(min(cyc))
        cyc = cyc[r:] + cyc[:r]
        choices = [parallel[(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))]
        stack = [[]]
        for opts in choices:
            stack = [p + [o] for p in stack for o in opts]
            if count + len(stack) > cycle_cap:
                raise VassepError("CYCLE_CAP_EXCEEDED", f"more than {cycle_cap} simple cycles", cap=cycle_cap)
        for edges in stack:
            count += 1
            if count > cycle_cap:
                raise VassepError("CYCLE_CAP_EXCEEDED", f"more than {cycle_cap} simple cycles", cap=cycle_cap)
            delta, phi = _effects(km, edges, n)
            assert all(delta[i] == 0 for i in range(len(delta)) if i not in omega), "cycle changes a finite coordinate"
            found.append(Cycle(tuple(edges), frozenset(cyc), delta, phi))
    found.sort(key=lambda c: (len(c.edges), c.edges))
    return CycleBasis(anchor, comp, found)


def cycles_through_components(cycles: Sequence[Cycle], chosen: Sequence[int]) -> list:
    """Connected components (lists of indices) of the union of chosen cycles."""
    parent = {i: i for i in chosen}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for i in chosen:
        for v in cycles[i].nodes:
            if v in owner:
                a, b = find(owner[v]), find(i)
                if a != b:
                    parent[a] = b
            else:
                owner[v] = i
    groups: dict = {}
    for i in chosen:
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def closed_walk(km: KmGraph, cycles: Sequence[Cycle], mult: dict, start: int) -> list:
    """Stitch cycles with multiplicities into one closed walk from ``start`` (Hierholzer)."""
    out_edges: dict = {}
    for i, m in sorted(mult.items()):
        for _ in range(m):
            for k in cycles[i].edges:
                out_edges.setdefault(km.edges[k].src, []).append(k)
    for v in out_edges:
        out_edges[v].reverse()
    stack = [(start, None)]
    walk = []
    while stack:
        v, via = stack[-1]
        if out_edges.get(v):
            k = out_edges[v].pop()
            stack.append((km.edges[k].dst, k))
        else:
            stack.pop()
            if via is not None:
                walk.append(via)
    walk.reverse()
    total = sum(m * len(cycles[i].edges) for i, m in mult.items())
    if len(walk) != total:
        raise VassepError("INTERNAL", "cycle union is not connected")
    return walk


# ---------------------------------------------------------------------------
# Buchi nonemptiness


def _nonneg_support(cycles: Sequence[Cycle], idxs: list, coords: list, must: Sequence[int] = ()) -> Optional[list]:
    """Exact LP: multiplicities >= 0, chosen ones >= 1, effect >= 0 on coords."""
    nv = len(idxs)
    A, b = [], []
    for c in coords:
        A.append([cycles[i].delta[c] for i in idxs])
        b.append(0)
    for j, i in enumerate(idxs):
        if i in must:
            A.append([1 if jj == j else 0 for jj in range(nv)])
            b.append(1)
    return lp_feasible_point(A, b, nv)


def good_cycle_support(km: KmGraph, node: int, basis: CycleBasis) -> Optional[dict]:
    """Integer multiplicities of cycles forming a closed walk through ``node``
    with nonnegative total effect on every counter."""
    cycles = basis.cycles
    if not cycles:
        return None
    coords = list(range(km.vass.dim))
    live = list(range(len(cycles)))
    while True:
        # largest support: every cycle that is positive in some feasible solution
        support = []
        for i in live:
            if _nonneg_support(cycles, live, coords, must=(i,)) is not None:
                support.append(i)
        comps = cycles_through_components(cycles, support)
        comp = next((g for g in comps if any(node in cycles[i].nodes for i in g)), None)
        if comp is None:
            return None
        if comp == sorted(live):
            break
        live = comp
    x = _nonneg_support(cycles, live, coords, must=live)
    den = 1
    for v in x:
        den = den * v.denominator // _gcd(den, v.denominator)
    return {i: int(v * den) for i, v in zip(live, x)}


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def buchi_nonempty(V: Vass, node_cap: int = DEFAULT_NODE_CAP, cycle_cap: int = DEFAULT_CYCLE_CAP) -> bool:
    return buchi_witness(V, node_cap, cycle_cap) is not None


def buchi_witness(V: Vass, node_cap: int = DEFAULT_NODE_CAP, cycle_cap: int = DEFAULT_CYCLE_CAP):
    """``(km, node, multiplicities, basis)`` for an accepting lasso, or None."""
    km = build_km(V, node_cap)
    bases: dict = {}
    for i, c in enumerate(km.nodes):
        if c.state not in V.finals:
            continue
        comp = scc_of(km, i)
        key = min(comp)
        if key not in bases:
            bases[key] = scc_and_cycles(km, i, cycle_cap, n=0)
        mult = good_cycle_support(km, i, bases[key])
        if mult is not None:
            return km, i, mult, bases[key]
    return None


def pump_lasso(km: KmGraph, node: int, mult: dict, basis: CycleBasis, slack: int = 1) -> tuple:
    """Concrete prefix reaching the node and the transitions of a repeatable loop."""
    walk = closed_walk(km, basis.cycles, mult, node)
    loop = [km.edges[k].transition for k in walk]
    need = max(slack, 1) * (len(loop) + 1) * max(_max_update(km.vass), 1)
    prefix = witness_cover(km, node, need)
    return prefix, loop

