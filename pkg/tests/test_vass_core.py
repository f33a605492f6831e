import random
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vassep.errors import VassepError
from vassep.karp_miller import build_km, buchi_nonempty
from vassep.suites import random_buchi_sigma1, random_vass
from vassep.vass_core import (
    OMEGA,
    ExtConfig,
    Transition,
    Vass,
    check_run,
    dyck_vass,
    format_label,
    is_dyck_prefix,
    normalize_labels,
    parse_label,
    parse_vass,
    path_effect,
    product_dyck,
    reduce,
    serialize_vass,
)

ONE_STATE = "vass dim=1 alphabet=a\nstate q init final\ntrans q -> q label=a update=(1)\n"


def corpus():
    root = resources.files("vassep") / "fixtures"
    for group in (root, root / "extra"):
        for entry in sorted(group.iterdir(), key=lambda e: e.name):
            if entry.name.endswith(".vass"):
                yield entry.name, entry.read_text()


class TestParsing:
    def test_minimal(self):
        V = parse_vass(ONE_STATE)
        assert V.states == ("q",) and V.dim == 1 and V.finals == {"q"}

    def test_arity_mismatch(self):
        with pytest.raises(VassepError) as e:
            parse_vass("vass dim=2 alphabet=a\nstate q init\ntrans q -> q label=a update=(1)\n")
        assert e.value.code == "SEMANTIC_ERROR"
        assert e.value.details["line"] == 3

    @pytest.mark.parametrize("bad, code", [
        ("state q init\n", "PARSE_ERROR"),
        ("vass dim=1 alphabet=a\nstate q\n", "SEMANTIC_ERROR"),
        ("vass dim=1 alphabet=a\nstate q init\ntrans q -> r label=a update=(1)\n", "SEMANTIC_ERROR"),
        ("vass dim=1 alphabet=a\nstate q init\ntrans q -> q label=b update=(1)\n", "SEMANTIC_ERROR"),
        ("vass dim=1 alphabet=a\nstate q init\ntrans q -> q label=a^x update=(1)\n", "PARSE_ERROR"),
        ("vass dim=1 alphabet=a\nstate q init\nstate q\n", "SEMANTIC_ERROR"),
        ("vass dim=1 alphabet=a\nstate q init\nfoo\n", "PARSE_ERROR"),
    ])
    def test_errors(self, bad, code):
        with pytest.raises(VassepError) as e:
            parse_vass(bad)
        assert e.value.code == code

    @pytest.mark.parametrize("name, text", list(corpus()))
    def test_round_trip_on_corpus(self, name, text):
        V = parse_vass(text)
        assert parse_vass(serialize_vass(V)) == V
        assert serialize_vass(parse_vass(serialize_vass(V))) == serialize_vass(V)

    def test_big_updates(self):
        V = parse_vass(f"vass dim=1 alphabet=a\nstate q init\ntrans q -> q label=a^{10**20} update=({-10**30})\n")
        assert V.transitions[0].update == (-10**30,)
        assert V.transitions[0].label == (("a", 10**20),)

    @given(st.lists(st.tuples(st.sampled_from(["a1", "A1", "b"]), st.integers(1, 10**6)), max_size=4))
    def test_label_round_trip(self, label):
        label = tuple(label)
        assert parse_label(format_label(label)) == label


class TestNormalize:
    def test_split(self):
        V = parse_vass("vass dim=1 alphabet=a1,A1\nstate q init final\ntrans q -> q label=a1.A1^2 update=(3)\n")
        N = normalize_labels(V)
        assert len(N.transitions) == 2 and len(N.states) == 2
        first, second = N.transitions
        assert first.label == (("a1", 1),) and second.label == (("A1", 2),)
        assert first.dst == second.src and first.update == (3,) and second.update == (0,)
        assert path_effect(N, list(N.transitions)) == path_effect(V, list(V.transitions))

    def test_idempotent(self):
        V = parse_vass(ONE_STATE)
        assert normalize_labels(V) == V
        N = normalize_labels(parse_vass("vass dim=0 alphabet=a,b\nstate q init\ntrans q -> q label=a.b.a\n"))
        assert normalize_labels(N) == N

    def test_epsilon_unchanged(self):
        V = parse_vass("vass dim=0 alphabet=a\nstate q init\ntrans q -> q label=eps\n")
        assert normalize_labels(V) == V


class TestDyck:
    def test_sizes(self):
        D1 = dyck_vass(1)
        assert len(D1.states) == 1 and len(D1.transitions) == 2
        assert sorted(t.update for t in D1.transitions) == [(-1,), (1,)]
        assert len(dyck_vass(3).transitions) == 6

    def test_prefixes(self):
        D1 = dyck_vass(1)
        up, down = (next(t for t in D1.transitions if t.label[0][0] == a) for a in ("a1", "A1"))
        start = ExtConfig("q", (0,))
        assert check_run(D1, start, [up, down, up]).ok
        assert not check_run(D1, start, [down]).ok
        assert is_dyck_prefix(["a1", "A1", "a1"], 1) and not is_dyck_prefix(["A1"], 1)
        with pytest.raises(VassepError):
            is_dyck_prefix(["b"], 1)

    def test_product(self):
        V = parse_vass("vass dim=1 alphabet=a1,A1\nstate q init\n"
                       "trans q -> q label=a1 update=(2)\ntrans q -> q label=eps update=(0)\n"
                       "trans q -> q label=A1^3 update=(0)\n")
        P = product_dyck(V)
        assert [t.update for t in P.transitions] == [(2, 1), (0, 0), (0, -3)]
        assert P.dim == 2 and P.states == V.states

    def test_product_needs_dyck_alphabet(self):
        with pytest.raises(VassepError) as e:
            product_dyck(parse_vass(ONE_STATE))
        assert e.value.code == "ALPHABET_MISMATCH"


class TestEffects:
    def test_empty(self):
        V = parse_vass("vass dim=2 alphabet=a1,A1\nstate q init\n")
        assert path_effect(V, []) == path_effect(V, []) and path_effect(V, []).combined == (0, 0, 0)

    def test_single(self):
        V = parse_vass("vass dim=1 alphabet=a1,A1\nstate q init\ntrans q -> q label=a1^2 update=(-1)\n")
        e = path_effect(V, list(V.transitions))
        assert e.internal == (-1,) and e.external == (2,)

    def test_cancellation(self):
        V = parse_vass("vass dim=0 alphabet=a1,A1\nstate q init\ntrans q -> q label=a1\ntrans q -> q label=A1\n")
        assert path_effect(V, list(V.transitions)).external == (0,)

    def test_disconnected(self):
        V = parse_vass("vass dim=0 alphabet=a1,A1\nstate p init\nstate q\n"
                       "trans p -> q label=a1\ntrans p -> p label=A1\n")
        with pytest.raises(VassepError) as e:
            path_effect(V, list(V.transitions))
        assert e.value.code == "DISCONNECTED_PATH"


class TestCheckRun:
    def test_violation(self):
        t = Transition("q", (), (-1,), "q")
        V = Vass(1, (), ("q",), "q", frozenset(), (t,))
        rep = check_run(V, ExtConfig("q", (0,)), [t])
        assert not rep.ok and rep.violation_step == 1 and rep.violation_counter == 1

    def test_omega_absorbs(self):
        t = Transition("q", (), (-10**6,), "q")
        V = Vass(1, (), ("q",), "q", frozenset(), (t,))
        rep = check_run(V, ExtConfig("q", (OMEGA,)), [t])
        assert rep.ok and rep.final.values == (OMEGA,)

    def test_empty_path(self):
        V = Vass(1, (), ("q",), "q", frozenset(), ())
        c = ExtConfig("q", (4,))
        assert check_run(V, c, []).final == c


class TestReduce:
    def test_emits_counter_updates(self):
        V1 = parse_vass("vass dim=0 alphabet=a\nstate p init final\ntrans p -> p label=a\n")
        V2 = parse_vass("vass dim=1 alphabet=a\nstate r init final\ntrans r -> r label=a update=(1)\n")
        R = reduce(V1, V2)
        assert R.dim == 0 and R.alphabet == ("a1", "A1")
        assert {t.label for t in R.transitions} == {(("a1", 1),)}
        assert buchi_nonempty(product_dyck(R))

    def test_no_finals(self):
        V1 = parse_vass("vass dim=0 alphabet=a\nstate p init\ntrans p -> p label=a\n")
        V2 = parse_vass("vass dim=1 alphabet=a\nstate r init final\ntrans r -> r label=a update=(1)\n")
        assert not buchi_nonempty(reduce(V1, V2))

    def test_padding_for_silent_steps(self):
        V1 = parse_vass("vass dim=0 alphabet=a\nstate p init final\ntrans p -> p label=a\n")
        V2 = parse_vass("vass dim=1 alphabet=a\nstate r init final\ntrans r -> r label=a update=(0)\n")
        assert {t.label for t in reduce(V1, V2).transitions} == {(("a1", 1), ("A1", 1))}

    def test_requires_counter(self):
        V = parse_vass("vass dim=0 alphabet=a\nstate p init final\ntrans p -> p label=a\n")
        with pytest.raises(VassepError):
            reduce(V, V)

    @pytest.mark.parametrize("seed", range(15))
    def test_state_bound(self, seed):
        rng = random.Random(seed)
        V1 = random_buchi_sigma1(rng)
        V2 = random_vass(rng, max_states=3, max_dim=2)
        V2 = Vass(max(V2.dim, 1), V1.alphabet, V2.states, V2.init, V2.finals,
                  tuple(Transition(t.src, rng.choice(((("a1", 1),), (("A1", 1),), ())),
                                   t.update or (1,), t.dst) for t in V2.transitions))
        R = reduce(V1, V2)
        assert len(R.states) <= 2 * len(V1.states) * len(V2.states)
        build_km(product_dyck(R))
