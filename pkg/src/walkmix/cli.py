"""Command-line interface.

Chain files are JSON objects ``{"n": int, "p": [[...], ...], "labels": [...]}``
(``labels`` optional).  Reports are YAML documents written to stdout with
every float printed to 17 significant digits; diagnostics go to stderr.

Exit status: 0 success, 1 usage or internal error (or a failed ``verify``),
2 input validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np
import yaml

from . import __version__
from .chain import MarkovChain, classify, discriminant, load_chain, verify_similarity
from .constructions import (
    check_automorphism,
    find_automorphisms,
    prime_family_chain,
    tensor_product,
    two_state_chain,
)
from .errors import (
    ChainValidationError,
    HypothesisError,
    WalkmixError,
)
from .mixing import (
    DEFAULT_T,
    continuous_mixing_closed,
    continuous_mixing_numerical,
    is_uniform_mixing,
    mixing_closed,
    mixing_empirical,
    mixing_from_walk_idempotents,
    uniform_mixing_criterion,
    verify_properties,
)
from .spectral import DEFAULT_GROUP_TOL, decompose
from .walk import (
    arc_distribution,
    build_walk,
    evolve,
    idempotent_residuals,
    initial_state,
    vertex_marginal,
    walk_idempotents,
    walk_idempotents_direct,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2

NORMALIZE_LIMIT = 1e-6
DEFAULT_INTEGRAL_T = 2000.0
DEFAULT_STEPS = 20000


class InputError(Exception):
    """Unreadable or malformed input; maps to exit status 2."""


class UsageError(Exception):
    """Bad flag combination; maps to exit status 1."""


def format_float(x: float) -> str:
    s = format(x, ".17g")
    if s in ("nan", "inf", "-inf"):
        return {"nan": ".nan", "inf": ".inf", "-inf": "-.inf"}[s]
    mantissa, _, exp = s.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    return mantissa + ("e" + exp if exp else "")


class _ReportDumper(yaml.SafeDumper):
    pass


_ReportDumper.add_representer(
    float, lambda d, x: d.represent_scalar("tag:yaml.org,2002:float", format_float(x))
)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dump_report(report: dict) -> str:
    return yaml.dump(
        _plain(report),
        Dumper=_ReportDumper,
        sort_keys=False,
        default_flow_style=None,
        width=10 ** 6,
        allow_unicode=False,
    )


def dump_matrix(m) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return "".join(" ".join(format_float(v) for v in row) + "\n" for row in m)


def read_chain(path: str, normalize_rows: bool = False) -> MarkovChain:
    """Parse a chain file, naming the first violated constraint on failure."""
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object with keys n, p")
    if "p" not in doc:
        raise InputError(f"{path}: missing key 'p'")
    rows = doc["p"]
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{path}: 'p' must be a nonempty list of rows")
    n = doc.get("n", len(rows))
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"{path}: 'n' must be a positive integer")
    if len(rows) != n:
        raise InputError(f"{path}: 'p' has {len(rows)} rows but n = {n}")
    for x, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InputError(f"{path}: row {x} must be a list of {n} numbers")
        for y, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InputError(f"{path}: p[{x}][{y}] is not a number: {v!r}")
    p = np.array(rows, dtype=float)
    if normalize_rows:
        sums = p.sum(axis=1)
        for x, total in enumerate(sums):
            if abs(total - 1.0) > NORMALIZE_LIMIT:
                raise InputError(
                    f"{path}: RowSumViolation: row {x} sums to {format_float(total)}, "
                    f"beyond the --normalize-rows limit {NORMALIZE_LIMIT:g}"
                )
        p = p / sums[:, None]
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != n):
        raise InputError(f"{path}: 'labels' must be a list of {n} strings")
    try:
        return load_chain(p, labels)
    except ChainValidationError as exc:
        raise InputError(f"{path}: {exc}") from exc


def chain_document(chain: MarkovChain) -> str:
    doc = {"n": chain.n, "p": chain.p.tolist()}
    if chain.labels is not None:
        doc["labels"] = list(chain.labels)
    return json.dumps(doc) + "\n"


def _classification_report(chain):
    cls = classify(chain)
    out = {"ergodic": cls.ergodic, "reversible": cls.reversible, "symmetric": cls.symmetric}
    if cls.stationary is not None:
        out["stationary"] = cls.stationary
    return cls, out


def _spectrum_report(decomp):
    return [
        {"eigenvalue": float(lam), "multiplicity": int(mult)}
        for lam, mult in zip(decomp.eigenvalues, decomp.multiplicities)
    ]


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _default_T() -> int:
    raw = os.environ.get("WALKMIX_DEFAULT_T")
    if raw is None:
        return DEFAULT_T
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError(f"WALKMIX_DEFAULT_T must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise UsageError(f"WALKMIX_DEFAULT_T must be a positive integer, got {raw!r}")
    return value


def _emit(args, report: dict, matrix) -> None:
    if args.format == "matrix":
        sys.stdout.write(dump_matrix(matrix))
    else:
        sys.stdout.write(dump_report(report))


def cmd_analyze(args) -> int:
    chain = read_chain(args.chain_file, args.normalize_rows)
    cls, cls_report = _classification_report(chain)
    disc = discriminant(chain)
    decomp = decompose(disc.d, args.group_tol, unit_interval=True)
    verdict = uniform_mixing_criterion(decomp, args.tol, chain)
    report = {"command": "analyze", "n": chain.n}
    if chain.labels is not None:
        report["labels"] = list(chain.labels)
    report["classification"] = cls_report
    report["discriminant spectrum"] = _spectrum_report(decomp)
    if decomp.warnings:
        report["warnings"] = list(decomp.warnings)
    if cls.ergodic and cls.reversible:
        report["similarity residual"] = verify_similarity(chain, disc, cls)
    report["uniform mixing criterion"] = _verdict(verdict)
    _emit(args, report, disc.d)
    return EXIT_OK


_METHODS = {
    "discrete": ("closed", "idempotents", "empirical"),
    "continuous": ("closed", "integral"),
}


def _mixing(chain, kind, method, args, walk=None, decomp=None):
    if decomp is None:
        decomp = decompose(discriminant(chain).d, args.group_tol, unit_interval=True)
    if kind == "continuous":
        if method == "closed":
            return continuous_mixing_closed(decomp)
        return continuous_mixing_numerical(discriminant(chain), args.T or DEFAULT_INTEGRAL_T, args.steps, decomp)
    if method == "closed":
        return mixing_closed(chain, decomp)
    walk = walk or build_walk(chain)
    if method == "idempotents":
        return mixing_from_walk_idempotents(walk, walk_idempotents(walk, decomp))
    return mixing_empirical(walk, int(args.T) if args.T else _default_T())


def _check_method(chain, kind, method):
    if kind == "continuous":
        return "integral" if method == "closed" else "closed"
    if method == "empirical":
        cls = classify(chain)
        return "closed" if cls.ergodic and cls.reversible else "idempotents"
    return "empirical"


def cmd_mix(args) -> int:
    if args.method not in _METHODS[args.kind]:
        raise UsageError(f"--method {args.method} is not available for --kind {args.kind}")
    if args.T is not None and args.T <= 0:
        raise UsageError("--T must be positive")
    if args.kind == "discrete" and args.T is not None and int(args.T) != args.T:
        raise UsageError("--T must be an integer for the discrete walk")
    chain = read_chain(args.chain_file, args.normalize_rows)
    decomp = decompose(discriminant(chain).d, args.group_tol, unit_interval=True)
    walk = build_walk(chain) if args.kind == "discrete" and args.method != "closed" else None
    mm = _mixing(chain, args.kind, args.method, args, walk, decomp)
    report = {
        "command": "mix",
        "n": chain.n,
        "kind": mm.kind,
        "method": mm.method,
        "parameters": dict(mm.params),
        "matrix": mm.m,
        "column sum residual": mm.column_residual(),
        "uniform mixing": _verdict(is_uniform_mixing(mm, args.tol)),
    }
    if args.check:
        other = _check_method(chain, args.kind, args.method)
        if other == "empirical" and walk is None:
            walk = build_walk(chain)
        mm2 = _mixing(chain, args.kind, other, args, walk, decomp)
        report["check"] = {
            "method": mm2.method,
            "parameters": dict(mm2.params),
            "max discrepancy": float(np.max(np.abs(mm.m - mm2.m))),
        }
    _emit(args, report, mm.m)
    return EXIT_OK


def _read_permutations(path: str, n: int) -> List[List[int]]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc.msg}") from exc
    if isinstance(doc, dict):
        doc = doc.get("automorphisms")
    if not isinstance(doc, list) or not all(isinstance(s, list) for s in doc):
        raise InputError(f"{path}: expected a list of permutations")
    for s in doc:
        if sorted(s) != list(range(n)):
            raise InputError(f"{path}: {s} is not a permutation of 0..{n - 1}")
    return doc


def cmd_verify(args) -> int:
    chain = read_chain(args.chain_file, args.normalize_rows)
    n = chain.n
    cls, cls_report = _classification_report(chain)
    disc = discriminant(chain)
    decomp = decompose(disc.d, args.group_tol, unit_interval=True)
    walk = build_walk(chain)
    checks = {}
    notes = []

    def record(name, value, limit):
        checks[name] = {"residual": float(value), "limit": limit, "status": _verdict(value <= limit)}

    for key, value in walk.residuals().items():
        record(f"walk {key}", value, 0.0 if key == "involution" else (1e-9 if key == "orthogonality" else 1e-10))
    if cls.ergodic and cls.reversible:
        record("similarity", verify_similarity(chain, disc, cls), 1e-9)

    idem = walk_idempotents(walk, decomp)
    for key, value in idempotent_residuals(walk, idem).items():
        record(f"walk idempotents {key}", value, 1e-10 if key == "conjugate" else 1e-8)

    m_idem = mixing_from_walk_idempotents(walk, idem)
    m_direct = mixing_from_walk_idempotents(walk, walk_idempotents_direct(walk))
    record("idempotents vs direct eigendecomposition", np.max(np.abs(m_idem.m - m_direct.m)), 1e-7)

    closed_ok = False
    if cls.ergodic and cls.reversible:
        try:
            m_disc = mixing_closed(chain, decomp, cls)
            closed_ok = True
        except HypothesisError as exc:
            notes.append(f"closed form skipped: {exc}")
    else:
        why = "not ergodic" if not cls.ergodic else "not reversible"
        notes.append(f"closed form skipped: chain is {why}; using walk idempotents and the empirical average")
    if closed_ok:
        record("closed form vs walk idempotents", np.max(np.abs(m_disc.m - m_idem.m)), 1e-7)
    else:
        m_disc = m_idem
    T = int(args.T) if args.T else _default_T()
    m_emp = mixing_empirical(walk, T)
    record(f"empirical (T={T}) vs {m_disc.method}", np.max(np.abs(m_emp.m - m_disc.m)), 5e-3)
    record("empirical column sums", m_emp.column_residual(), 1e-8)

    m_cont = continuous_mixing_closed(decomp)
    record("continuous column sums", m_cont.column_residual(), 1e-8)

    if n <= args.search_budget:
        autos = [a.sigma for a in find_automorphisms(chain, args.search_budget)]
    else:
        autos = [tuple(range(n))]
        notes.append(f"automorphism search skipped for n = {n} > {args.search_budget}")
    if args.automorphisms:
        for s in _read_permutations(args.automorphisms, n):
            check_automorphism(chain, s, walk)
            if tuple(s) not in autos:
                autos.append(tuple(s))
    for s in autos:
        check_automorphism(chain, s, walk)
    props = verify_properties(chain, m_disc, m_cont, autos)

    theorem = {
        "trace discrete": props.trace_discrete,
        "trace continuous": props.trace_continuous,
        "trace inequality": _verdict(props.trace_inequality_ok),
    }
    if not closed_ok:
        theorem["trace inequality"] += " (informational: chain outside the reversible ergodic hypothesis)"
    if props.symmetric_ok is not None:
        theorem["symmetry"] = _verdict(props.symmetric_ok)
        theorem["symmetry residual"] = props.symmetric_residual
    theorem["column sum residual"] = props.column_stochastic_residual
    theorem["column stochastic"] = _verdict(props.column_stochastic_ok)
    theorem["automorphism residuals"] = [
        {"sigma": list(s), "residual": r} for s, r in props.automorphism_residuals.items()
    ]
    theorem["automorphism invariance"] = _verdict(props.automorphisms_ok)

    passed = all(c["status"] == "PASS" for c in checks.values())
    passed = passed and props.column_stochastic_ok and props.automorphisms_ok
    passed = passed and props.symmetric_ok is not False
    if closed_ok:
        passed = passed and props.trace_inequality_ok

    report = {
        "command": "verify",
        "n": n,
        "classification": cls_report,
        "discriminant spectrum": _spectrum_report(decomp),
        "checks": checks,
        "properties": theorem,
        "mixing matrix": {"method": m_disc.method, "matrix": m_disc.m},
    }
    if notes:
        report["notes"] = notes
    report["result"] = _verdict(passed)
    _emit(args, report, m_disc.m)
    return EXIT_OK if passed else EXIT_ERROR


def cmd_construct(args) -> int:
    if args.two_state is not None:
        chain = two_state_chain(args.two_state)
    elif args.primes is not None:
        try:
            primes = [int(q) for q in args.primes.split(",") if q.strip()]
        except ValueError as exc:
            raise InputError(f"--primes expects comma-separated integers, got {args.primes!r}") from exc
        chain = prime_family_chain(primes, args.sign)
    else:
        chain = tensor_product([read_chain(f) for f in args.tensor])
    if args.format == "matrix":
        sys.stdout.write(dump_matrix(chain.p))
    else:
        sys.stdout.write(chain_document(chain))
    return EXIT_OK


def cmd_walk(args) -> int:
    chain = read_chain(args.chain_file, args.normalize_rows)
    n = chain.n
    if not 0 <= args.start < n:
        raise UsageError(f"--start must be in 0..{n - 1}")
    if args.t < 0:
        raise UsageError("--t must be nonnegative")
    walk = build_walk(chain)
    state = evolve(walk, initial_state(walk, args.start), args.t)
    arcs = arc_distribution(state)
    marginal = vertex_marginal(arcs)
    report = {
        "command": "walk",
        "n": n,
        "start": args.start,
        "t": args.t,
        "arc distribution": arcs.reshape(n, n),
        "vertex marginal": marginal,
        "marginal sum": float(marginal.sum()),
    }
    _emit(args, report, arcs.reshape(n, n))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("report", "matrix"), default="report",
                        help="full YAML report or the bare matrix")
    chain_opts = argparse.ArgumentParser(add_help=False)
    chain_opts.add_argument("chain_file", help="JSON chain file, or - for stdin")
    chain_opts.add_argument("--normalize-rows", action="store_true",
                            help="divide each row by its sum when off by at most 1e-6")
    chain_opts.add_argument("--group-tol", type=float, default=DEFAULT_GROUP_TOL,
                            help="relative eigenvalue grouping tolerance")

    parser = _Parser(prog="walkmix", description="Average mixing of Szegedy quantum walks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common, chain_opts], help="classify a chain and test uniform mixing")
    p.add_argument("--tol", type=float, default=1e-8, help="flat-eigenvector tolerance")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mix", parents=[common, chain_opts], help="compute an average mixing matrix")
    p.add_argument("--kind", choices=("discrete", "continuous"), default="discrete")
    p.add_argument("--method", choices=("closed", "idempotents", "empirical", "integral"), default="closed")
    p.add_argument("--T", type=float, default=None,
                   help="horizon: steps for empirical (default $WALKMIX_DEFAULT_T or 20000), time for integral (default 2000)")
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="integration panels")
    p.add_argument("--tol", type=float, default=None, help="uniform-mixing tolerance")
    p.add_argument("--check", action="store_true", help="cross-check against a second method")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("verify", parents=[common, chain_opts], help="run the property and invariant battery")
    p.add_argument("--automorphisms", help="JSON file with a list of permutations")
    p.add_argument("--T", type=int, default=None, help="empirical horizon")
    p.add_argument("--search-budget", type=int, default=8, help="largest n for exhaustive automorphism search")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", parents=[common], help="emit an example chain file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--two-state", type=float, metavar="P")
    group.add_argument("--primes", metavar="Q1,Q2,...")
    group.add_argument("--tensor", nargs="+", metavar="FILE")
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("walk", parents=[common, chain_opts], help="evolve S e_y for t steps")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--t", type=int, default=0)
    p.set_defaults(func=cmd_walk)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ChainValidationError, HypothesisError) as exc:
        print(f"walkmix: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UsageError as exc:
        print(f"walkmix: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except WalkmixError as exc:
        if isinstance(exc, ValueError):
            print(f"walkmix: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print(f"walkmix: internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
