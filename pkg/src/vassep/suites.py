"""Seeded property suites and the oracles they compare against.

Each ``check_*`` function runs one acceptance property and returns a
:class:`CheckResult`; :func:`run_suite` groups them under the suite names the
command line exposes.
"""

from __future__ import annotations

import json
import random
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Optional

from .errors import VassepError
from .exact_arith import (
    IntPoly,
    cauchy_root_bound,
    count_real_roots,
    isolate_real_roots,
    rational_roots,
    refine_root,
    rump_separation_bound,
    sturm_count,
    NEG_INF,
    POS_INF,
)
from .karp_miller import build_km, buchi_nonempty, coverable, witness_cover
from .separability import Certificate, SearchOptions, Verdict, decide_dyck, demonstrate, validate_flower
from .snls import (
    Snls,
    brute_feasibility_probe,
    build_extended,
    candidate_points,
    eliminate_quantifier,
    per_t_lp_feasible,
    random_rational,
    solve,
    verify_solution,
)
from .vass_core import ExtConfig, Transition, Vass, check_run, dyck_dimension, parse_vass, product_dyck

SUITES = ("snls-props", "km-props", "sep-fixtures", "oracles")


@dataclass
class CheckResult:
    name: str
    passed: bool
    summary: str
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.summary} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {
            "name": self.name, "passed": self.passed, "summary": self.summary,
            "seconds": round(self.seconds, 3), "failures": self.failures[:20],
        }


def _timed(fn: Callable[..., CheckResult]) -> Callable[..., CheckResult]:
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# random instances


def random_poly(rng: random.Random, max_deg: int, max_coeff: int) -> IntPoly:
    return IntPoly([rng.randint(-max_coeff, max_coeff) for _ in range(rng.randint(0, max_deg) + 1)])


def random_snls(rng: random.Random, max_m: int = 4, max_n: int = 3, max_deg: int = 2, max_coeff: int = 4) -> Snls:
    m = rng.randint(1, max_m)
    n = rng.randint(1, max_n)

    def entry():
        # sparse-ish entries keep the systems varied
        return random_poly(rng, max_deg, max_coeff) if rng.random() < 0.7 else IntPoly()

    A = [[entry() for _ in range(n)] for _ in range(m)]
    b = [entry() for _ in range(m)]
    return Snls.from_rows(A, b, n)


def random_vass(rng: random.Random, max_states: int = 4, max_dim: int = 2, max_trans: int = 7) -> Vass:
    k = rng.randint(1, max_states)
    d = rng.randint(0, max_dim)
    states = tuple(f"q{i}" for i in range(k))
    trans = set()
    for _ in range(rng.randint(1, max_trans)):
        upd = tuple(rng.choice((-1, -1, 0, 1, 1, 2)) for _ in range(d))
        trans.add(Transition(rng.choice(states), (), upd, rng.choice(states)))
    finals = frozenset(q for q in states if rng.random() < 0.4)
    return Vass(d, (), states, states[0], finals, tuple(sorted(trans, key=str)))


def random_buchi_sigma1(rng: random.Random, max_states: int = 3, max_trans: int = 6) -> Vass:
    """Dimension-0 automaton over the alphabet a1, A1 (with some epsilon moves)."""
    k = rng.randint(1, max_states)
    states = tuple(f"q{i}" for i in range(k))
    trans = set()
    for _ in range(rng.randint(1, max_trans)):
        label = rng.choice(((("a1", 1),), (("A1", 1),), (("a1", 1),), (("A1", 1),), ()))
        trans.add(Transition(rng.choice(states), label, (), rng.choice(states)))
    finals = frozenset(q for q in states if rng.random() < 0.5)
    return Vass(0, ("a1", "A1"), states, states[0], finals, tuple(sorted(trans, key=str)))


# ---------------------------------------------------------------------------
# oracles


def bfs_coverable_configs(V: Vass, cap: int = 40, limit: int = 20000) -> list:
    """Concrete configurations reachable without any counter exceeding ``cap``."""
    start = (V.init, tuple(0 for _ in range(V.dim)))
    seen = {start}
    queue = deque([start])
    while queue and len(seen) < limit:
        q, vals = queue.popleft()
        for t in V.outgoing(q):
            nv = tuple(a + z for a, z in zip(vals, t.update))
            if any(v < 0 or v > cap for v in nv):
                continue
            c = (t.dst, nv)
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return sorted(seen, key=str)


# ---------------------------------------------------------------------------
# SNLS properties


def _t_samples(rng: random.Random, phi, count: int) -> list:
    pts = []
    for p in phi.polys():
        pts.extend(rational_roots(p))
    pts.extend(candidate_points(phi))
    pts = list(dict.fromkeys(pts))
    rng.shuffle(pts)
    pts = pts[: count // 2]
    while len(pts) < count:
        pts.append(random_rational(rng, 6))
    return pts


@_timed
def check_qe_equivalence(seed: int = 0, instances: int = 200, samples: int = 25) -> CheckResult:
    """The eliminated formula agrees with per-t linear feasibility."""
    rng = random.Random(seed)
    fails = []
    total = 0
    for k in range(instances):
        S = random_snls(rng)
        phi = eliminate_quantifier(S)
        for t in _t_samples(rng, phi, samples):
            total += 1
            if phi.holds(t) != per_t_lp_feasible(S, t):
                fails.append({"instance": k, "t": str(t), "system": S.to_json()})
    return CheckResult("qe-equivalence", not fails, f"{total - len(fails)}/{total} samples agree", failures=fails)


@_timed
def check_solve_soundness(seed: int = 1, instances: int = 1000, extra_samples: int = 100) -> CheckResult:
    """FEASIBLE answers re-verify; INFEASIBLE answers survive the brute-force probe."""
    rng = random.Random(seed)
    fails = []
    feasible = 0
    for k in range(instances):
        S = random_snls(rng)
        sol = solve(S)
        if sol is not None:
            feasible += 1
            if not verify_solution(S, sol.t, sol.y):
                fails.append({"instance": k, "kind": "unverified", "system": S.to_json()})
        else:
            probe = brute_feasibility_probe(S, extra_samples, seed=seed * 100003 + k)
            if probe.found:
                fails.append({"instance": k, "kind": "missed", "t": str(probe.feasible[0]), "system": S.to_json()})
    return CheckResult(
        "solve-soundness", not fails,
        f"{instances} instances, {feasible} feasible, {len(fails)} contradictions", failures=fails,
    )


# (t^2 - 2) y = 0 with y >= 1: only the irrational t = +-sqrt(2) would do
SQRT2_TRAP = Snls.from_rows([[IntPoly([-2, 0, 1])], [IntPoly([2, 0, -1])], [1]], [0, 0, 1])
# (4 - 2t) y = 0 and (t - 2) y = 0 with y >= 1 pin t = 2
FORCED_T = Snls.from_rows(
    [[IntPoly([4, -2])], [IntPoly([-4, 2])], [IntPoly([-2, 1])], [IntPoly([2, -1])], [1]], [0, 0, 0, 0, 1]
)


@_timed
def check_rational_discrimination(seed: int = 0) -> CheckResult:
    """The sqrt(2) trap is infeasible over Q; the forced system pins t = 2."""
    trap = solve(SQRT2_TRAP)
    forced = solve(FORCED_T)
    ok = trap is None and forced is not None and forced.t == 2
    summary = f"trap={'INFEASIBLE' if trap is None else 'FEASIBLE'}, forced t={forced.t if forced else None}"
    return CheckResult("rational-discrimination", ok, summary)


@_timed
def check_degree_bound(seed: int = 0, instances: int = 300) -> CheckResult:
    """Every polynomial of the eliminated formula has degree at most (m+2) deg of the extended system."""
    rng = random.Random(seed)
    fails = []
    checked = 0
    for k in range(instances):
        S = random_snls(rng)
        # identity rows of the extended system have degree 0, so its degree is S.deg
        bound = (S.m + 2) * build_extended(S).D.deg if S.m else 0
        bound = max(bound, (S.m + 2) * max((p.deg for p in S.b), default=0))
        for p in eliminate_quantifier(S).polys():
            checked += 1
            if p.deg > bound:
                fails.append({"instance": k, "deg": p.deg, "bound": bound})
    return CheckResult("degree-bound", not fails, f"{checked} polynomials within bound", failures=fails)


@_timed
def check_root_machinery(seed: int = 0, instances: int = 200) -> CheckResult:
    """Isolation matches Sturm counts; roots separated beyond Rump; inside the Cauchy bound."""
    rng = random.Random(seed)
    fails = []
    for k in range(instances):
        p = random_poly(rng, 6, 9)
        if p.is_zero():
            continue
        if p.deg == 0:
            if isolate_real_roots(p):
                fails.append({"instance": k, "why": "constant has roots"})
            continue
        B = cauchy_root_bound(p)
        roots = isolate_real_roots(p)
        if len(roots) != sturm_count(p, -B, B) or len(roots) != sturm_count(p, NEG_INF, POS_INF):
            fails.append({"instance": k, "why": "count", "poly": p.to_json()})
            continue
        sep = rump_separation_bound(p)
        fine = [refine_root(r, sep / 8) for r in roots]
        for r in fine:
            if r.lo < -B or r.hi > B:
                fails.append({"instance": k, "why": "outside Cauchy bound", "poly": p.to_json()})
        for r, s in zip(fine, fine[1:]):
            if not s.lo - r.hi > sep:
                fails.append({"instance": k, "why": "separation", "poly": p.to_json()})
        if count_real_roots(p) != len(roots):
            fails.append({"instance": k, "why": "count_real_roots", "poly": p.to_json()})
    return CheckResult("root-machinery", not fails, f"{instances} polynomials, {len(fails)} failures", failures=fails)


# ---------------------------------------------------------------------------
# Karp-Miller properties


@_timed
def check_km_soundness_completeness(seed: int = 0, instances: int = 50, slack: int = 3, cap: int = 40) -> CheckResult:
    """Every KM node concretises; every BFS-coverable configuration is KM-coverable."""
    rng = random.Random(seed)
    fails = []
    nodes = targets = 0
    for k in range(instances):
        V = random_vass(rng)
        km = build_km(V)
        start = ExtConfig(V.init, tuple(0 for _ in range(V.dim)))
        for i, c in enumerate(km.nodes):
            nodes += 1
            try:
                run = witness_cover(km, i, slack)
            except VassepError as exc:
                fails.append({"instance": k, "node": i, "error": exc.code})
                continue
            rep = check_run(V, start, run)
            if not (rep.ok and rep.final.state == c.state):
                fails.append({"instance": k, "node": i, "why": "run invalid"})
        for q, vals in bfs_coverable_configs(V, cap):
            targets += 1
            if not coverable(km, ExtConfig(q, vals)):
                fails.append({"instance": k, "why": "BFS target not covered", "target": [q, list(vals)]})
    return CheckResult(
        "km-sound-complete", not fails, f"{nodes} nodes concretised, {targets} BFS targets covered", failures=fails,
    )


# ---------------------------------------------------------------------------
# separability fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    text: str
    verdict: Verdict
    t: Optional[Fraction] = None
    same_loops: bool = False

    @property
    def vass(self) -> Vass:
        return parse_vass(self.text)


def _parse_expectation(name: str, text: str) -> Fixture:
    for line in text.splitlines():
        if line.startswith("# expect:"):
            toks = line.split(":", 1)[1].split()
            t = None
            for tok in toks[1:]:
                if tok.startswith("t="):
                    t = Fraction(tok[2:])
            return Fixture(name, text, Verdict(toks[0]), t, "same-loops" in toks)
    raise VassepError("PARSE_ERROR", f"fixture {name} lacks an '# expect:' line")


def load_fixtures(group: str = "") -> list:
    """The analytic fixtures shipped with the package (``group`` is a subdirectory)."""
    root = resources.files("vassep") / "fixtures"
    if group:
        root = root / group
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".vass"):
            out.append(_parse_expectation(entry.name[:-5], entry.read_text()))
    return out


def _check_fixture(fx: Fixture, V: Vass, opts: SearchOptions) -> Optional[str]:
    dec = decide_dyck(V, opts)
    if dec.verdict != fx.verdict:
        return f"verdict {dec.verdict.value}, expected {fx.verdict.value}"
    if dec.verdict == Verdict.INSEPARABLE:
        cert = Certificate.from_json(dec.certificate.dumps())
        rep = validate_flower(V, cert.flower)
        if not rep.ok:
            return f"certificate rejected: {rep.messages}"
        if fx.t is not None and cert.t != fx.t:
            return f"t = {cert.t}, expected {fx.t}"
        b = cert.flower.bloom
        if fx.same_loops and not (b.alpha == b.beta == b.gamma_loop):
            return "loops differ"
    return None


@_timed
def check_sep_fixtures(seed: int = 0) -> CheckResult:
    """Hand-derived verdicts in all search modes, with validated certificates."""
    fails = []
    fixtures = load_fixtures()
    modes = (SearchOptions(), SearchOptions(single_km=True), SearchOptions(pump_external_product=True))
    matched = 0
    for fx in fixtures:
        errs = [e for o in modes if (e := _check_fixture(fx, fx.vass, o))]
        if errs:
            fails.append({"fixture": fx.name, "errors": errs})
        else:
            matched += 1
    return CheckResult(
        "sep-fixtures", not fails and len(fixtures) == 6, f"{matched}/{len(fixtures)} analytic verdicts match",
        failures=fails,
    )


@_timed
def check_dim0_oracle(seed: int = 0, instances: int = 100) -> CheckResult:
    """For dimension 0, INSEPARABLE exactly when the product with D_1 has an accepting run."""
    rng = random.Random(seed)
    fails = []
    insep = 0
    for k in range(instances):
        V = random_buchi_sigma1(rng)
        dec = decide_dyck(V)
        expected = buchi_nonempty(product_dyck(V, 1))
        insep += dec.verdict == Verdict.INSEPARABLE
        if (dec.verdict == Verdict.INSEPARABLE) != expected:
            fails.append({"instance": k, "verdict": dec.verdict.value, "nonempty": expected})
    return CheckResult(
        "dim0-oracle", not fails, f"{instances - len(fails)}/{instances} agree ({insep} inseparable)", failures=fails,
    )


@_timed
def check_demonstrator(seed: int = 0, ks=(0, 1, 2)) -> CheckResult:
    """Demonstration words avoid every sampled basic separator and have valid runs."""
    fails = []
    count = 0
    for fx in load_fixtures():
        if fx.verdict != Verdict.INSEPARABLE:
            continue
        V = fx.vass
        cert = decide_dyck(V).certificate
        n = max(1, dyck_dimension(V.alphabet))
        for k in ks:
            count += 1
            rep = demonstrate(V, cert, k, [tuple([1] * n)])
            if not rep.ok:
                fails.append({"fixture": fx.name, "k": k, "report": rep.to_json()})
    return CheckResult("demonstrator", not fails and count > 0, f"{count - len(fails)}/{count} words outside", failures=fails)


def _rename(V: Vass) -> Vass:
    m = {q: f"s_{i}_{q[::-1]}" for i, q in enumerate(V.states)}
    return Vass(V.dim, V.alphabet, tuple(m[q] for q in V.states), m[V.init], frozenset(m[q] for q in V.finals),
                tuple(Transition(m[t.src], t.label, t.update, m[t.dst]) for t in V.transitions))


def _reorder(V: Vass, rng: random.Random) -> Vass:
    ts = list(V.transitions)
    rng.shuffle(ts)
    states = list(V.states)
    rng.shuffle(states)
    return Vass(V.dim, V.alphabet, tuple(states), V.init, V.finals, tuple(ts))


def _inject_unreachable(V: Vass) -> Vass:
    ghost = "ghost_" + "_".join(V.states)
    extra = [Transition(ghost, (), tuple(1 for _ in range(V.dim)), ghost)]
    extra += [Transition(ghost, (), tuple(0 for _ in range(V.dim)), q) for q in V.states]
    return Vass(V.dim, V.alphabet, V.states + (ghost,), V.init, V.finals | {ghost}, V.transitions + tuple(extra))


def _permute_counters(V: Vass, rng: random.Random) -> Vass:
    perm = list(range(V.dim))
    rng.shuffle(perm)
    if V.dim > 1 and perm == sorted(perm):
        perm = perm[1:] + perm[:1]
    return Vass(V.dim, V.alphabet, V.states, V.init, V.finals,
                tuple(Transition(t.src, t.label, tuple(t.update[p] for p in perm), t.dst) for t in V.transitions))


@_timed
def check_metamorphic(seed: int = 0) -> CheckResult:
    """Verdicts survive renaming, reordering, unreachable junk and counter permutation."""
    rng = random.Random(seed)
    fails = []
    checked = 0
    for fx in load_fixtures() + load_fixtures("extra"):
        V = fx.vass
        base = decide_dyck(V).verdict
        variants = {
            "rename": _rename(V), "reorder": _reorder(V, rng), "unreachable": _inject_unreachable(V),
            "permute": _permute_counters(V, rng),
        }
        for name, W in variants.items():
            checked += 1
            got = decide_dyck(W)
            if got.verdict != base or got.verdict != fx.verdict:
                fails.append({"fixture": fx.name, "variant": name, "verdict": got.verdict.value})
            elif got.certificate is not None and not validate_flower(W, got.certificate.flower).ok:
                fails.append({"fixture": fx.name, "variant": name, "why": "certificate rejected"})
    return CheckResult("metamorphic", not fails, f"{checked - len(fails)}/{checked} variants stable", failures=fails)


# ---------------------------------------------------------------------------
# suite runner

SUITE_CHECKS = {
    "snls-props": (check_qe_equivalence, check_solve_soundness, check_rational_discrimination,
                   check_degree_bound, check_root_machinery),
    "km-props": (check_km_soundness_completeness,),
    "sep-fixtures": (check_sep_fixtures, check_demonstrator, check_metamorphic),
    "oracles": (check_dim0_oracle,),
}


def run_suite(name: str, seed: int = 0) -> dict:
    """Run every check of a suite; failures are part of the report, never exceptions."""
    if name not in SUITE_CHECKS:
        raise VassepError("USAGE", f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    results = []
    for check in SUITE_CHECKS[name]:
        try:
            res = check(seed=seed)
        except VassepError as exc:
            res = CheckResult(check.__name__, False, f"raised {exc.code}: {exc.message}")
        results.append(res)
    return {"suite": name, "seed": seed, "passed": all(r.passed for r in results),
            "checks": [r.to_json() for r in results], "lines": [r.line() for r in results]}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
