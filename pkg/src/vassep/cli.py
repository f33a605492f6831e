"""Command-line entry point.

``vassep <group> <command> ...`` with groups ``snls``, ``vass``, ``sep`` and
``suite``.  The ``snls``, ``vass`` and ``sep`` console scripts are shortcuts for
the corresponding group.

Exit status: 0 success or SEPARABLE, 10 INSEPARABLE, 2 resource cap hit,
1 other structured error or failed check, 64 usage error, 66 unreadable file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import VassepError
from .exact_arith import format_rational
from .karp_miller import (
    WITNESS_RETRIES,
    build_km,
    buchi_witness,
    coverable,
    parse_target,
    pump_lasso,
    witness_cover,
)
from .separability import (
    DEFAULT_SUPPORT_CAP,
    DEFAULT_TRIPLE_CAP,
    Certificate,
    SearchOptions,
    Verdict,
    decide,
    decide_dyck,
    demonstrate,
    expand_counts,
    flower_size_bound_log2,
    validate_flower,
)
from .snls import (
    DEFAULT_FM_CAP,
    DEFAULT_SIZE_CONSTANT,
    DEFAULT_SUBSET_CAP,
    Snls,
    brute_feasibility_probe,
    candidate_points,
    dnflb_to_dinc,
    eliminate_quantifier,
    solution_diagnostics,
    solve,
)
from .suites import SUITES, run_suite
from .vass_core import (
    dyck_dimension,
    expand_label,
    normalize_labels,
    parse_vass,
    product_dyck,
    reduce,
    serialize_vass,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_RESOURCE = 2
EXIT_INSEPARABLE = 10
EXIT_USAGE = 64
EXIT_NOINPUT = 66

SEED_ENV = "VASSEP_SEED"


@dataclass(frozen=True)
class Config:
    node_cap: int = 100_000
    cycle_cap: int = 10_000
    subset_cap: int = DEFAULT_SUBSET_CAP
    fm_cap: int = DEFAULT_FM_CAP
    retry_cap: int = WITNESS_RETRIES
    support_cap: int = DEFAULT_SUPPORT_CAP
    triple_cap: int = DEFAULT_TRIPLE_CAP
    bound_constant: int = DEFAULT_SIZE_CONSTANT
    seed: int = 0
    output: str = "text"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "output":
                if v not in ("text", "json"):
                    raise VassepError("USAGE", "output must be 'text' or 'json'")
            elif f.name != "seed" and (not isinstance(v, int) or v < 1):
                raise VassepError("USAGE", f"{f.name} must be a positive integer")

    def search(self, args) -> SearchOptions:
        return SearchOptions(
            single_km=getattr(args, "single_km", False),
            pump_external_product=getattr(args, "pump_external_product", False),
            node_cap=self.node_cap, cycle_cap=self.cycle_cap,
            support_cap=self.support_cap, triple_cap=self.triple_cap,
        )


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load_config(args) -> Config:
    values: dict = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    if args.config:
        data = tomllib.loads(_read(args.config))
        known = {f.name for f in fields(Config)}
        for k, v in data.items():
            key = k.replace("-", "_")
            if key not in known:
                raise UsageError(f"unknown config key {k!r}")
            values[key] = v
    overrides = {
        "node_cap": args.max_nodes, "cycle_cap": args.max_cycles, "subset_cap": args.subset_cap,
        "fm_cap": args.fm_cap, "retry_cap": args.retry_cap, "bound_constant": args.bound_constant,
        "seed": args.seed,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.json:
        values["output"] = "json"
    try:
        return Config(**values)
    except VassepError as exc:
        raise UsageError(exc.message) from None
    except TypeError as exc:
        raise UsageError(str(exc)) from None


class FileProblem(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from None


def _load_vass(path: str):
    return parse_vass(_read(path))


def _load_snls(path: str) -> Snls:
    try:
        return Snls.from_json(_read(path))
    except json.JSONDecodeError as exc:
        raise VassepError("PARSE_ERROR", f"{path}: {exc}") from None


class _Out:
    """Collects one JSON document or prints text lines."""

    def __init__(self, cfg: Config):
        self.json = cfg.output == "json"
        self.doc: dict = {}

    def text(self, line: str = "") -> None:
        if not self.json:
            print(line)

    def put(self, **kw) -> None:
        self.doc.update(kw)

    def flush(self) -> None:
        if self.json:
            print(json.dumps(self.doc, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# snls


def cmd_snls_solve(args, cfg, out) -> int:
    S = _load_snls(args.file)
    sol = solve(S, cfg.subset_cap)
    base = S.col * S.deg * S.maxc
    expo = cfg.bound_constant * S.deg ** 2 * S.row ** 4
    out.put(size_bound=f"{base}^{expo}")
    if sol is None:
        out.put(status="INFEASIBLE")
        out.text("INFEASIBLE")
    else:
        out.put(**sol.to_json(), diagnostics=solution_diagnostics(sol))
        out.text("FEASIBLE")
        out.text(f"t = {format_rational(sol.t)}")
        out.text("y = [" + ", ".join(format_rational(v) for v in sol.y) + "]")
        out.text(f"common denominator = {sol.common_denominator}")
    out.text(f"size bound (informational) = {base}^{expo}")
    return EXIT_OK


def cmd_snls_qe(args, cfg, out) -> int:
    S = _load_snls(args.file)
    phi = eliminate_quantifier(S, cfg.subset_cap)
    dinc = dnflb_to_dinc(phi)
    pts = candidate_points(phi)
    out.put(dnflb=phi.to_json(), intervals=[str(iv) for iv in dinc.intervals],
            candidates=[format_rational(t) for t in pts])
    out.text(str(phi))
    out.text("intervals: " + (" | ".join(str(iv) for iv in dinc.intervals) or "none"))
    out.text("candidates: " + " ".join(format_rational(t) for t in pts))
    return EXIT_OK


def cmd_snls_brute(args, cfg, out) -> int:
    S = _load_snls(args.file)
    rep = brute_feasibility_probe(S, args.samples, cfg.seed, cfg.fm_cap)
    out.put(**rep.to_json())
    out.text(f"checked {rep.checked} values of t, {len(rep.feasible)} feasible")
    for t in rep.feasible:
        out.text(f"  feasible at t = {format_rational(t)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vass


def cmd_vass_print(args, cfg, out) -> int:
    V = _load_vass(args.file)
    text = serialize_vass(V)
    out.put(vass=text)
    out.text(text.rstrip("\n"))
    return EXIT_OK


def cmd_vass_normalize(args, cfg, out) -> int:
    V = normalize_labels(_load_vass(args.file))
    text = serialize_vass(V)
    out.put(vass=text)
    out.text(text.rstrip("\n"))
    return EXIT_OK


def cmd_vass_product(args, cfg, out) -> int:
    V = _load_vass(args.file)
    P = product_dyck(V)
    text = serialize_vass(P)
    out.put(vass=text)
    out.text(text.rstrip("\n"))
    return EXIT_OK


def cmd_vass_km(args, cfg, out) -> int:
    km = build_km(_load_vass(args.file), cfg.node_cap)
    if args.dot:
        _write(args.dot, km.to_dot())
    out.put(**km.to_json())
    for i, c in enumerate(km.nodes):
        out.text(f"node {i}: {c}")
    for e in km.edges:
        out.text(f"edge {e.src} -> {e.dst}: {e.transition}")
    return EXIT_OK


def cmd_vass_cover(args, cfg, out) -> int:
    V = _load_vass(args.file)
    km = build_km(V, cfg.node_cap)
    target = parse_target(args.target)
    ok = coverable(km, target)
    out.put(target=args.target, coverable=ok)
    out.text(f"{args.target}: {'coverable' if ok else 'not coverable'}")
    if ok:
        node = next(i for i, n in enumerate(km.nodes) if n.covers(target))
        finite = [v for v in target.values if isinstance(v, int)]
        run = witness_cover(km, node, max(finite + [1]), cfg.retry_cap)
        out.put(witness=[str(t) for t in run])
        out.text(f"witness run of {len(run)} transitions:")
        for t in run:
            out.text(f"  {t}")
    return EXIT_OK


def cmd_vass_nonempty(args, cfg, out) -> int:
    V = _load_vass(args.file)
    found = buchi_witness(V, cfg.node_cap, cfg.cycle_cap)
    out.put(nonempty=found is not None)
    out.text("NONEMPTY" if found else "EMPTY")
    if found:
        km, node, mult, basis = found
        prefix, loop = pump_lasso(km, node, mult, basis)
        out.put(prefix=[str(t) for t in prefix], loop=[str(t) for t in loop])
        out.text("prefix: " + " ".join(a for t in prefix for a in expand_label(t.label)))
        out.text("loop:   " + " ".join(a for t in loop for a in expand_label(t.label)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sep


def _report_decision(dec, args, cfg, out, V) -> int:
    out.put(**dec.to_json())
    out.text(dec.verdict.value)
    if V is not None:
        try:
            out.put(flower_size_bound_log2=str(flower_size_bound_log2(V, cfg.bound_constant)))
        except VassepError:
            pass
    for diag in dec.diagnostics:
        print(f"warning: rejected search hit {diag}", file=sys.stderr)
    if dec.certificate is not None:
        b = dec.certificate.flower.bloom
        out.text(f"t = {format_rational(b.t)}")
        out.text(f"loops: alpha={list(b.alpha)} beta={list(b.beta)} gamma={list(b.gamma_loop)}")
        if args.certificate:
            _write(args.certificate, dec.certificate.dumps() + "\n")
            out.text(f"certificate written to {args.certificate}")
        else:
            out.text(dec.certificate.dumps())
    return EXIT_INSEPARABLE if dec.verdict == Verdict.INSEPARABLE else EXIT_OK


def cmd_sep_dyck(args, cfg, out) -> int:
    V = _load_vass(args.file)
    return _report_decision(decide_dyck(V, cfg.search(args)), args, cfg, out, V)


def cmd_sep_decide(args, cfg, out) -> int:
    V1, V2 = _load_vass(args.v1), _load_vass(args.v2)
    return _report_decision(decide(V1, V2, cfg.search(args)), args, cfg, out, None)


def cmd_sep_reduce(args, cfg, out) -> int:
    V1, V2 = _load_vass(args.v1), _load_vass(args.v2)
    R = reduce(expand_counts(normalize_labels(V1)), expand_counts(normalize_labels(V2)))
    text = serialize_vass(R)
    out.put(vass=text)
    out.text(text.rstrip("\n"))
    return EXIT_OK


def _load_cert(path: str) -> Certificate:
    try:
        return Certificate.from_json(_read(path))
    except json.JSONDecodeError as exc:
        raise VassepError("PARSE_ERROR", f"{path}: {exc}") from None


def cmd_sep_check_cert(args, cfg, out) -> int:
    V = _load_vass(args.file)
    cert = _load_cert(args.cert)
    rep = validate_flower(V, cert.flower, build_km(product_dyck(normalize_labels(V)), cfg.node_cap))
    out.put(**rep.to_json())
    for name, ok in rep.clauses.items():
        out.text(f"{'ok  ' if ok else 'FAIL'} {name}")
    for m in rep.messages:
        out.text(f"  {m}")
    out.text("VALID" if rep.ok else "INVALID")
    return EXIT_OK if rep.ok else EXIT_ERROR


def _parse_weights(raws: Optional[Sequence[str]], n: int) -> list:
    if not raws:
        return [tuple([1] * n)]
    out = []
    for raw in raws:
        try:
            w = tuple(int(x) for x in raw.split(","))
        except ValueError:
            raise UsageError(f"bad weight vector {raw!r}") from None
        if len(w) != n or any(x < 0 for x in w):
            raise UsageError(f"weight vector {raw!r} needs {n} nonnegative entries")
        out.append(w)
    return out


def cmd_sep_demo(args, cfg, out) -> int:
    V = _load_vass(args.file)
    cert = _load_cert(args.cert)
    n = max(1, dyck_dimension(V.alphabet))
    X = _parse_weights(args.weights, n)
    rep = demonstrate(V, cert, args.k, X, cfg.node_cap, cfg.retry_cap)
    out.put(**rep.to_json())
    if rep.word is not None:
        out.text(f"word: {rep.word}")
    out.text(f"run valid: {rep.run_valid}")
    for i, v in rep.outside_P.items():
        out.text(f"outside P[{i},{args.k}]: {v}")
    for x, v in rep.outside_S.items():
        out.text(f"outside S[{','.join(map(str, x))},{args.k}]: {v}")
    for m in rep.messages:
        out.text(f"  {m}")
    out.text("OK" if rep.ok else "FAILED")
    return EXIT_OK if rep.ok else EXIT_ERROR


def cmd_suite(args, cfg, out) -> int:
    report = run_suite(args.name, cfg.seed)
    out.put(**report)
    for line in report["lines"]:
        out.text(line)
    return EXIT_OK if report["passed"] else EXIT_ERROR


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--json", action="store_true", help="emit one JSON document on stdout")
    g.add_argument("--config", metavar="FILE", help="TOML file overriding caps and seed")
    g.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV} or 0)")
    g.add_argument("--max-nodes", type=int, help="Karp-Miller node cap")
    g.add_argument("--max-cycles", type=int, help="simple cycle cap per component")
    g.add_argument("--subset-cap", type=int, help="row-subset cap for quantifier elimination")
    g.add_argument("--fm-cap", type=int, help="inequality cap for Fourier-Motzkin")
    g.add_argument("--retry-cap", type=int, help="witness concretisation retries")
    g.add_argument("--bound-constant", type=int, help="constant C in the informational size bounds")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="vassep", description="Exact separability of Buchi VASS languages from Dyck languages.")
    groups = top.add_subparsers(dest="group", metavar="{snls,vass,sep,suite}", parser_class=_Parser)
    groups.required = True

    def cmd(sub, name, fn, help_text, *positional):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        for arg, h in positional:
            p.add_argument(arg, help=h)
        p.set_defaults(func=fn)
        return p

    snls = groups.add_parser("snls", help="singly non-linear systems")
    sub = snls.add_subparsers(dest="cmd", metavar="{solve,qe,brute}", parser_class=_Parser)
    sub.required = True
    cmd(sub, "solve", cmd_snls_solve, "decide rational feasibility and print a small solution", ("file", "SNLS JSON"))
    cmd(sub, "qe", cmd_snls_qe, "print the quantifier-free formula in t", ("file", "SNLS JSON"))
    b = cmd(sub, "brute", cmd_snls_brute, "probe feasibility at candidate and random t", ("file", "SNLS JSON"))
    b.add_argument("--samples", type=int, default=100, help="random t values on top of the candidates")

    vass = groups.add_parser("vass", help="VASS utilities")
    sub = vass.add_subparsers(dest="cmd", metavar="{print,normalize,km,cover,nonempty,product-dyck}",
                              parser_class=_Parser)
    sub.required = True
    cmd(sub, "print", cmd_vass_print, "parse and re-serialize", ("file", "VASS text file"))
    cmd(sub, "normalize", cmd_vass_normalize, "split multi-letter labels", ("file", "VASS text file"))
    k = cmd(sub, "km", cmd_vass_km, "build the Karp-Miller graph", ("file", "VASS text file"))
    k.add_argument("--dot", metavar="FILE", help="also write Graphviz output")
    c = cmd(sub, "cover", cmd_vass_cover, "coverability with a witness run", ("file", "VASS text file"))
    c.add_argument("--target", required=True, help="e.g. 'q1:(3,w,0)'")
    cmd(sub, "nonempty", cmd_vass_nonempty, "Buchi nonemptiness with a lasso", ("file", "VASS text file"))
    cmd(sub, "product-dyck", cmd_vass_product, "product with the Dyck VASS", ("file", "VASS over a1..an, A1..An"))

    sep = groups.add_parser("sep", help="separability")
    sub = sep.add_subparsers(dest="cmd", metavar="{decide,dyck,reduce,check-cert,demo}", parser_class=_Parser)
    sub.required = True
    for name, fn, h, pos in (
        ("dyck", cmd_sep_dyck, "separability of L(V) from the Dyck language", (("file", "VASS over a1..an, A1..An"),)),
        ("decide", cmd_sep_decide, "separability of L(V1) from L(V2)", (("v1", "VASS"), ("v2", "VASS, dim >= 1"))),
    ):
        p = cmd(sub, name, fn, h, *pos)
        p.add_argument("--certificate", metavar="FILE", help="write the certificate here")
        p.add_argument("--single-km", action="store_true", help="search cycles of KM(V x D_n) directly")
        p.add_argument("--pump-external-product", action="store_true",
                       help="keep the external counters in the pump VASS")
    cmd(sub, "reduce", cmd_sep_reduce, "print the Dyck-visible VASS of the reduction",
        ("v1", "VASS"), ("v2", "VASS, dim >= 1"))
    cmd(sub, "check-cert", cmd_sep_check_cert, "validate a certificate independently",
        ("file", "VASS"), ("cert", "certificate JSON"))
    d = cmd(sub, "demo", cmd_sep_demo, "word avoiding the basic separators", ("file", "VASS"), ("cert", "certificate JSON"))
    d.add_argument("--k", type=int, default=0, help="separator parameter k")
    d.add_argument("--weights", action="append", metavar="W", help="weight vector like 1,0,2 (repeatable)")

    s = groups.add_parser("suite", parents=[common], help="run a seeded property suite")
    s.add_argument("name", choices=SUITES)
    s.set_defaults(func=cmd_suite)
    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "k", 0) is not None and getattr(args, "k", 0) < 0:
            raise UsageError("--k must be nonnegative")
        if getattr(args, "samples", 0) < 0:
            raise UsageError("--samples must be nonnegative")
        cfg = _load_config(args)
    except UsageError as exc:
        print(f"vassep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileProblem as exc:
        print(f"vassep: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except tomllib.TOMLDecodeError as exc:
        print(f"vassep: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    out = _Out(cfg)
    try:
        code = args.func(args, cfg, out)
    except FileProblem as exc:
        print(f"vassep: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except UsageError as exc:
        print(f"vassep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VassepError as exc:
        if out.json:
            print(json.dumps(exc.to_dict(), indent=2, sort_keys=True))
        print(f"vassep: {exc}", file=sys.stderr)
        return EXIT_RESOURCE if exc.is_resource_cap else EXIT_ERROR
    out.flush()
    return code


def _group_main(group: str) -> int:
    return main([group] + sys.argv[1:])


def snls_main() -> int:
    return _group_main("snls")


def vass_main() -> int:
    return _group_main("vass")


def sep_main() -> int:
    return _group_main("sep")


if __name__ == "__main__":
    sys.exit(main())
