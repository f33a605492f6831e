import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vassep.errors import VassepError
from vassep.karp_miller import (
    build_km,
    build_pump,
    buchi_nonempty,
    buchi_witness,
    coverable,
    parse_target,
    pump_lasso,
    scc_and_cycles,
    witness_cover,
)
from vassep.suites import bfs_coverable_configs, random_vass
from vassep.vass_core import OMEGA, ExtConfig, Transition, Vass, check_run, parse_vass, product_dyck


def loop_vass(step: int, final: bool = False) -> Vass:
    t = Transition("q0", (), (step,), "q0")
    return Vass(1, (), ("q0",), "q0", frozenset({"q0"} if final else ()), (t,))


CHAINED = parse_vass(
    "vass dim=2 alphabet=\n"
    "state p init\nstate q final\n"
    "trans p -> p label=eps update=(1,0)\n"
    "trans p -> q label=eps update=(0,0)\n"
    "trans q -> q label=eps update=(-1,1)\n"
    "trans q -> q label=eps update=(0,-2)\n"
)


def origin(V):
    return ExtConfig(V.init, tuple(0 for _ in range(V.dim)))


class TestBuild:
    def test_positive_loop_accelerates_once(self):
        km = build_km(loop_vass(1))
        assert {n.values for n in km.nodes} == {(0,), (OMEGA,)}

    def test_negative_loop(self):
        km = build_km(loop_vass(-1))
        assert len(km.nodes) == 1 and km.edges == []

    def test_disabled_transfer(self):
        t = Transition("q", (), (1, -1), "q")
        km = build_km(Vass(2, (), ("q",), "q", frozenset(), (t,)))
        assert km.edges == []

    def test_node_cap(self):
        with pytest.raises(VassepError) as e:
            build_km(loop_vass(1), node_cap=1)
        assert e.value.code == "NODE_CAP_EXCEEDED" and e.value.is_resource_cap

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_structure(self, seed):
        V = random_vass(random.Random(seed))
        km = build_km(V)
        reach = {km.init_node}
        frontier = [km.init_node]
        while frontier:
            i = frontier.pop()
            for k in km.out_edges(i):
                e = km.edges[k]
                if e.dst not in reach:
                    reach.add(e.dst)
                    frontier.append(e.dst)
        assert reach == set(range(len(km.nodes)))
        for e in km.edges:
            assert km.omega_set(e.src) <= km.omega_set(e.dst)


class TestCover:
    def test_examples(self):
        up = build_km(loop_vass(1))
        assert coverable(up, ExtConfig("q0", (5,)))
        assert coverable(up, ExtConfig("q0", (OMEGA,)))
        assert not coverable(build_km(loop_vass(-1)), ExtConfig("q0", (1,)))

    def test_parse_target(self):
        assert parse_target("q1:(3,w,0)") == ExtConfig("q1", (3, OMEGA, 0))
        with pytest.raises(VassepError):
            parse_target("q1(3)")

    def test_witness_slack(self):
        km = build_km(loop_vass(1))
        node = km.index_of(ExtConfig("q0", (OMEGA,)))
        run = witness_cover(km, node, 7)
        rep = check_run(km.vass, origin(km.vass), run)
        assert rep.ok and len(run) >= 7 and rep.final.values[0] >= 7

    def test_witness_root_is_empty(self):
        km = build_km(loop_vass(1))
        assert witness_cover(km, ExtConfig("q0", (0,)), 5) == []

    def test_chained_acceleration(self):
        km = build_km(CHAINED)
        assert any(n.values == (OMEGA, OMEGA) for n in km.nodes)
        for i, n in enumerate(km.nodes):
            run = witness_cover(km, i, 3)
            rep = check_run(CHAINED, origin(CHAINED), run)
            assert rep.ok and rep.final.state == n.state
            assert all(v >= 3 if a is OMEGA else v >= a for a, v in zip(n.values, rep.final.values))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_bfs_agrees(self, seed):
        V = random_vass(random.Random(seed), max_dim=2)
        km = build_km(V)
        for q, vals in bfs_coverable_configs(V, 12, 3000):
            assert coverable(km, ExtConfig(q, vals))


class TestPump:
    def test_structural_copy(self):
        V = parse_vass("vass dim=1 alphabet=a1,A1\nstate p init\nstate q final\n"
                       "trans p -> q label=a1 update=(2)\n")
        km = build_km(product_dyck(V))
        pump = build_pump(km, V)
        assert len(pump.vass.states) == 2 and len(pump.vass.transitions) == 1
        t = pump.vass.transitions[0]
        assert t.label == (("a1", 1),) and t.update == (2,)
        assert any(pump.node_of[s] == 1 for s in pump.vass.finals)


class TestCycles:
    def test_trivial_scc(self):
        km = build_km(loop_vass(-1))
        assert scc_and_cycles(km, 0).cycles == []

    def test_self_loop(self):
        km = build_km(loop_vass(1))
        top = km.index_of(ExtConfig("q0", (OMEGA,)))
        assert len(scc_and_cycles(km, top).cycles) == 1

    def test_parallel_back_edges(self):
        V = parse_vass("vass dim=0 alphabet=a,b\nstate p init\nstate q\n"
                       "trans p -> q label=a\ntrans q -> p label=a\ntrans q -> p label=b\n")
        basis = scc_and_cycles(build_km(V), 0)
        assert len(basis.cycles) == 2

    def test_cycle_cap(self):
        V = parse_vass("vass dim=0 alphabet=a,b\nstate p init\nstate q\n"
                       "trans p -> q label=a\ntrans q -> p label=a\ntrans q -> p label=b\n")
        with pytest.raises(VassepError) as e:
            scc_and_cycles(build_km(V), 0, cycle_cap=1)
        assert e.value.code == "CYCLE_CAP_EXCEEDED"


class TestBuchi:
    def test_positive_loop(self):
        assert buchi_nonempty(loop_vass(1, final=True))

    def test_only_negative_loop(self):
        assert not buchi_nonempty(loop_vass(-1, final=True))

    def test_unreachable_final(self):
        V = parse_vass("vass dim=0 alphabet=a\nstate p init\nstate q final\ntrans q -> q label=a\n")
        assert not buchi_nonempty(V)

    def test_transfer_needs_fuel(self):
        assert not buchi_nonempty(CHAINED)

    def test_lasso_is_valid(self):
        V = parse_vass("vass dim=2 alphabet=\nstate p init\nstate q final\n"
                       "trans p -> p label=eps update=(1,0)\ntrans p -> q label=eps update=(0,0)\n"
                       "trans q -> q label=eps update=(-1,1)\ntrans q -> q label=eps update=(1,-1)\n")
        km, node, mult, basis = buchi_witness(V)
        prefix, loop = pump_lasso(km, node, mult, basis)
        rep = check_run(V, origin(V), prefix + loop * 4)
        assert rep.ok and any(t.dst in V.finals for t in loop)


def bounded_lasso_exists(V: Vass, cap: int) -> bool:
    """Accepting lasso among configurations bounded by ``cap``.

    A step may also drop to any dominated configuration with the same state; by
    monotonicity the real run stays enabled, so a cycle through a final state
    here is a genuine accepting run.
    """
    configs = bfs_coverable_configs(V, cap)
    by_state = {}
    for q, vals in configs:
        by_state.setdefault(q, []).append(vals)
    g = nx.DiGraph()
    for q, vals in configs:
        for t in V.outgoing(q):
            nv = tuple(a + z for a, z in zip(vals, t.update))
            if all(0 <= v <= cap for v in nv):
                g.add_edge((q, vals), (t.dst, nv))
        for low in by_state[q]:
            if low != vals and all(a <= b for a, b in zip(low, vals)):
                g.add_edge((q, vals), (q, low))
    for comp in nx.strongly_connected_components(g):
        finals = [c for c in comp if c[0] in V.finals]
        if finals and (len(comp) > 1 or g.has_edge(finals[0], finals[0])):
            return True
    return False


@pytest.mark.parametrize("seed", range(40))
def test_buchi_nonempty_matches_bounded_search(seed):
    V = random_vass(random.Random(1000 + seed), max_dim=2)
    assert buchi_nonempty(V) == bounded_lasso_exists(V, 12)
