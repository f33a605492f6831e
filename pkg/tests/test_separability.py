import dataclasses
import random
from fractions import Fraction

import pytest

from conftest import fixture_vass
from vassep.errors import VassepError
from vassep.karp_miller import Cycle, CycleBasis, build_km
from vassep.separability import (
    Certificate,
    KmFlower,
    SearchOptions,
    UPWord,
    Verdict,
    decide,
    decide_dyck,
    demonstrate,
    flower_size_bound,
    flower_size_bound_raw,
    flower_snls,
    km_flower_search,
    km_flower_to_flower,
    member_P,
    member_S,
    validate_flower,
)
from vassep.snls import scale_to_integer, solve
from vassep.suites import random_buchi_sigma1
from vassep.vass_core import OMEGA, ExtConfig, Transition, Vass, parse_vass, product_dyck

MODES = [SearchOptions(), SearchOptions(single_km=True), SearchOptions(pump_external_product=True)]


def basis_of(*phis):
    cycles = [Cycle((i,), frozenset({0}), (), (p,)) for i, p in enumerate(phis)]
    return CycleBasis(0, frozenset({0}), cycles)


def word(prefix, period):
    return UPWord(tuple(prefix.split()), tuple(period.split()))


class TestFlowerSnls:
    def test_single_positive_cycle(self):
        S = flower_snls(basis_of(1), ((0,), (0,), (0,)), 0, 1)
        sol = solve(S)
        assert sol is not None
        assert S.holds(3, [1, 1, 1])
        assert not S.holds(2, [1, 1, 1])

    def test_balanced_pair(self):
        S = flower_snls(basis_of(1, -1), ((0,), (1,), (0,)), 0, 1)
        assert S.holds(1, [1, 1, 1])
        t, ys = scale_to_integer(S, solve(S))
        assert S.holds(t, ys)

    def test_negative_only(self):
        S = flower_snls(basis_of(-1), ((0,), (0,), (0,)), 0, 1)
        assert solve(S) is None


class TestSearch:
    def test_balanced_loops(self):
        V = fixture_vass("a_and_abar.vass")
        kf = km_flower_search(V)
        assert isinstance(kf, KmFlower) and kf.t == 1
        f = km_flower_to_flower(V, kf)
        assert f.stem == ()
        assert f.root.values == (OMEGA,)
        assert (f.bloom.alpha, f.bloom.beta, f.bloom.gamma_loop) == ((0,), (1,), (0,))

    @pytest.mark.parametrize("name", ["abar_loop.vass", "a_then_abar.vass"])
    def test_absent(self, name):
        assert km_flower_search(fixture_vass(name)) is None

    def test_multiplicity_walks_loop_twice(self):
        V = fixture_vass("a_loop.vass")
        kf = km_flower_search(V)
        once = km_flower_to_flower(V, kf)
        twice = km_flower_to_flower(V, dataclasses.replace(kf, x_alpha={c: 2 * m for c, m in kf.x_alpha.items()}))
        assert twice.bloom.alpha == once.bloom.alpha * 2
        assert twice.bloom.beta == once.bloom.beta


class TestValidator:
    def cert(self):
        V = fixture_vass("a_and_abar.vass")
        return V, decide_dyck(V).certificate

    def test_all_clauses_pass(self):
        V, c = self.cert()
        rep = validate_flower(V, c.flower, build_km(product_dyck(V)))
        assert rep.ok and all(rep.clauses.values())

    def test_perturbed_t(self):
        V, c = self.cert()
        bad = dataclasses.replace(c.flower, bloom=dataclasses.replace(c.flower.bloom, t=Fraction(2)))
        rep = validate_flower(V, bad)
        assert not rep.ok and not rep.clauses["iv_scalar_multiple"]

    def test_non_coverable_root(self):
        V = parse_vass("vass dim=1 alphabet=a1,A1\nstate p init\nstate q final\n"
                       "trans p -> q label=eps update=(0)\ntrans q -> q label=a1 update=(0)\n")
        f = decide_dyck(V).certificate.flower
        assert f.root.values == (0, OMEGA)
        lifted = dataclasses.replace(f, root=ExtConfig(f.root.state, (5, OMEGA)))
        rep = validate_flower(V, lifted)
        assert not rep.ok and not rep.clauses["root_coverable"] and rep.clauses["iv_scalar_multiple"]

    def test_bad_transition_ids(self):
        V, c = self.cert()
        bad = dataclasses.replace(c.flower, bloom=dataclasses.replace(c.flower.bloom, alpha=(7,)))
        assert not validate_flower(V, bad).ok

    def test_certificate_json_round_trip(self):
        V, c = self.cert()
        again = Certificate.from_json(c.dumps())
        assert again.flower == c.flower
        assert c.to_json()["t"] == "1/1"
        assert c.provenance["mode"] == "pump"

    def test_malformed_certificate(self):
        with pytest.raises(VassepError):
            Certificate.from_json('{"format": "vassep-certificate", "version": 1}')
        with pytest.raises(VassepError):
            Certificate.from_json('{"format": "other"}')


class TestDecide:
    @pytest.mark.parametrize("opts", MODES)
    def test_no_finals(self, opts):
        assert decide_dyck(fixture_vass("no_finals.vass"), opts).verdict == Verdict.SEPARABLE

    @pytest.mark.parametrize("opts", MODES)
    def test_a_loop(self, opts):
        dec = decide_dyck(fixture_vass("a_loop.vass"), opts)
        b = dec.certificate.flower.bloom
        assert dec.verdict == Verdict.INSEPARABLE and b.t == 3 and b.alpha == b.beta == b.gamma_loop

    @pytest.mark.parametrize("opts", MODES)
    def test_eventually_negative(self, opts):
        assert decide_dyck(fixture_vass("a_then_abar.vass"), opts).verdict == Verdict.SEPARABLE

    def test_label_counts(self):
        V = parse_vass("vass dim=0 alphabet=a1,A1\nstate q init final\ntrans q -> q label=a1^2.A1.a1.A1^2\n")
        assert decide_dyck(V).verdict == Verdict.INSEPARABLE
        # dips below zero inside the first iteration
        V = parse_vass("vass dim=0 alphabet=a1,A1\nstate q init final\ntrans q -> q label=a1^2.A1^3.a1\n")
        assert decide_dyck(V).verdict == Verdict.SEPARABLE

    def test_resource_cap_is_loud(self):
        with pytest.raises(VassepError) as e:
            decide_dyck(fixture_vass("extra/internal_swap.vass"), SearchOptions(node_cap=2))
        assert e.value.is_resource_cap

    @pytest.mark.parametrize("seed", range(20))
    def test_soundness_gate_small_random(self, seed):
        rng = random.Random(seed)
        V = random_buchi_sigma1(rng)
        trans = tuple(Transition(t.src, t.label, (rng.randint(-1, 1),), t.dst) for t in V.transitions)
        init_fuel = Transition(V.init, (), (1,), V.init)
        V = Vass(1, V.alphabet, V.states, V.init, V.finals, tuple(dict.fromkeys(trans + (init_fuel,))))
        dec = decide_dyck(V)
        if dec.verdict == Verdict.INSEPARABLE:
            assert validate_flower(V, dec.certificate.flower).ok
        assert decide_dyck(V, SearchOptions(single_km=True)).verdict == dec.verdict

    def test_two_vass(self):
        loop = "vass dim={d} alphabet=a\nstate qq init{f}\ntrans qq -> qq label=a{u}\n"
        V1 = parse_vass(loop.format(d=0, f=" final", u=""))
        V2 = parse_vass(loop.format(d=1, f=" final", u=" update=(0)"))
        dec = decide(V1, V2)
        assert dec.verdict == Verdict.INSEPARABLE and "reduction" in dec.stats
        assert decide(parse_vass(loop.format(d=0, f="", u="")), V2).verdict == Verdict.SEPARABLE
        renamed = parse_vass(loop.format(d=0, f=" final", u="").replace("qq", "zz"))
        assert decide(renamed, V2).verdict == dec.verdict


class TestBounds:
    def test_formula(self):
        assert flower_size_bound_raw(2, 1, 1) == 4
        assert flower_size_bound_raw(2, 2, 1) == 2 ** 16
        assert flower_size_bound_raw(1, 3, 1) == 2

    def test_on_vass(self):
        V = Vass(0, ("a1", "A1"), ("q",), "q", frozenset(), ())
        assert flower_size_bound(V, 1) == 2


class TestMembership:
    def test_P(self):
        assert member_P(word("A1", "a1"), 1, 0)
        assert not member_P(word("", "a1"), 1, 0)
        assert not member_P(word("a1 a1", "A1"), 1, 0)
        assert member_P(word("a1 a1", "A1"), 1, 2)

    def test_P_negative_in_later_period(self):
        assert member_P(word("a1 a1 a1", "a1 A1 A1"), 1, 4)
        assert not member_P(word("a1 a1 a1", "a1 A1 A1"), 1, 3)

    def test_S(self):
        assert member_S(word("", "A1"), (1,), 0)
        for k in (0, 1, 5):
            assert not member_S(word("", "a1 A1"), (1,), k)
        assert member_S(word("a1", "A1"), (1,), 1)

    def test_S_weights(self):
        w = UPWord(("a1",), ("a2", "A1", "A1"))
        assert member_S(w, (1, 0), 0)
        assert not member_S(w, (1, 2), 0)
        assert not member_S(word("", "a1 a1 A1 A1 A1"), (1,), 1)
        assert member_S(word("", "a1 a1 A1 A1 A1"), (1,), 2)

    def test_period_required(self):
        with pytest.raises(VassepError):
            UPWord(("a1",), ())


class TestDemonstrate:
    def test_a_loop(self):
        V = fixture_vass("a_loop.vass")
        rep = demonstrate(V, decide_dyck(V).certificate, 0, [(1,)])
        assert rep.ok and set(rep.word.period) == {"a1"}

    def test_balanced(self):
        V = fixture_vass("a_and_abar.vass")
        rep = demonstrate(V, decide_dyck(V).certificate, 1, [(1,)])
        assert rep.ok and rep.word.period == ("a1", "a1", "A1", "A1", "a1", "a1")

    def test_invalid_certificate(self):
        V = fixture_vass("a_and_abar.vass")
        c = decide_dyck(V).certificate
        bad = Certificate(dataclasses.replace(c.flower, bloom=dataclasses.replace(c.flower.bloom, t=Fraction(5))))
        rep = demonstrate(V, bad, 1, [(1,)])
        assert not rep.ok and rep.word is None and "does not validate" in rep.messages[0]
