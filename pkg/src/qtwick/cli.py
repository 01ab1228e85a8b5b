"""Command-line front end.

Every tabular artifact (csv or json) starts from a flat metadata mapping that
fully determines it; `--check FILE` re-derives the artifact from the embedded
metadata and verifies the bytes match.  All randomness flows from --seed,
which falls back to the QTWICK_SEED environment variable, then to 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Optional

import numpy as np

from . import __version__
from .clt import ExperimentConfig, convergence_experiment
from .coeffs import CoefficientTable, sample_base
from .errors import ValidationError
from .fock import FockParams, commutator_residual, gram_matrix, vacuum_moment
from .jw import build_jw, check_commutation, vacuum_expectation
from .pairings import PairPartition, cross_nest, enumerate_pair_partitions
from .wickpoly import QTPolynomial, wick_field, wick_joint, wick_mixed


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _render(meta: dict[str, str], header: list[str], rows: list[list[str]], fmt: str,
            text_lines: Optional[list[str]] = None) -> str:
    if fmt == "csv":
        lines = [f"# {k}: {v}" for k, v in meta.items()]
        lines.append(",".join(header))
        lines.extend(",".join(row) for row in rows)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = {"metadata": meta, "header": header, "rows": rows}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        lines = text_lines if text_lines is not None else [" ".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------- pairings

def _pairings_artifact(meta: dict[str, str], fmt: str) -> str:
    n = int(meta["n"])
    rows = []
    text_lines = []
    for p in enumerate_pair_partitions(n):
        rep = cross_nest(p)
        rows.append(["; ".join(f"{w}-{z}" for w, z in p.pairs), str(rep.cross), str(rep.nest)])
        text_lines.append(f"{p} cross={rep.cross},nest={rep.nest}")
    return _render(meta, ["pairs", "cross", "nest"], rows, fmt, text_lines)


# -------------------------------------------------------------------- wick

def _wick_poly(meta: dict[str, str]) -> QTPolynomial:
    if meta["kind"] == "field":
        return wick_field(int(meta["n"]))
    if meta["kind"] == "joint":
        labels = tuple(int(x) for x in meta["labels"].split(";"))
        return wick_joint(labels, meta["eps"])
    return wick_mixed(meta["eps"])


def _wick_artifact(meta: dict[str, str], fmt: str) -> str:
    poly = _wick_poly(meta)
    rows = [
        [str(a), str(b), str(c)]
        for (a, b), c in sorted(poly.terms.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][1]))
    ]
    text_lines = [str(poly)]
    if "q" in meta and "t" in meta:
        value = poly.evaluate(float(meta["q"]), float(meta["t"]))
        text_lines.append(f"value = {_fmt(value)}")
    return _render(meta, ["deg_q", "deg_t", "coeff"], rows, fmt, text_lines)


# -------------------------------------------------------------------- fock

def _parse_fock_ops(text: str) -> list:
    ops = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ValidationError("empty operator token")
        if token == "n":
            ops.append(("number",))
            continue
        kind = {"c": "create", "a": "annihilate", "s": "field"}.get(token[0])
        if kind is None or not token[1:].isdigit():
            raise ValidationError(
                f"bad operator token {token!r}; use c<i>, a<i>, s<i> or n"
            )
        ops.append((kind, int(token[1:])))
    return ops


def _fock_artifact(meta: dict[str, str], fmt: str) -> str:
    params = FockParams(
        d=int(meta["d"]), m=int(meta["m"]), q=float(meta["q"]), t=float(meta["t"])
    )
    op = meta["op"]
    if op == "moment":
        value = vacuum_moment(_parse_fock_ops(meta["ops"]), params)
        return _render(meta, ["value"], [[_fmt(value)]], fmt, [f"value = {_fmt(value)}"])
    if op == "residual":
        rows = []
        text_lines = []
        for f in range(1, params.d + 1):
            for g in range(1, params.d + 1):
                r = commutator_residual(f, g, params)
                rows.append([str(f), str(g), _fmt(r)])
                text_lines.append(f"f={f} g={g} residual={_fmt(r)}")
        return _render(meta, ["f", "g", "residual"], rows, fmt, text_lines)
    if op == "gram":
        eigs = np.linalg.eigvalsh(gram_matrix(int(meta["degree"]), params))
        rows = [[str(k), _fmt(v)] for k, v in enumerate(eigs)]
        text_lines = [f"eig[{k}] = {_fmt(v)}" for k, v in enumerate(eigs)]
        return _render(meta, ["index", "eigenvalue"], rows, fmt, text_lines)
    raise ValidationError(f"unknown fock op {op!r}")


# ------------------------------------------------------------------ coeffs

def _coeffs_artifact(meta: dict[str, str], fmt: str) -> str:
    n = int(meta["n"])
    q, t, seed = float(meta["q"]), float(meta["t"]), int(meta["seed"])
    base = sample_base(n, q, t, seed)
    if "lookup" in meta:
        e1, e2, i, j = (x.strip() for x in meta["lookup"].split(","))
        value = CoefficientTable(base, t).lookup(e1, e2, int(i), int(j))
        return _render(
            meta,
            ["left", "right", "i", "j", "value"],
            [[e1, e2, i, j, _fmt(value)]],
            fmt,
            [f"mu_({e1},{e2})({i},{j}) = {_fmt(value)}"],
        )
    rows = [[str(i), str(j), _fmt(v)] for (i, j), v in sorted(base.items())]
    text_lines = [f"mu({i},{j}) = {_fmt(v)}" for (i, j), v in sorted(base.items())]
    return _render(meta, ["i", "j", "mu"], rows, fmt, text_lines)


# ---------------------------------------------------------------------- jw

def _parse_sites(text: str) -> list[tuple[int, bool]]:
    ops = []
    for token in text.split(","):
        token = token.strip()
        adjoint = token.endswith("*")
        if adjoint:
            token = token[:-1]
        if not token.isdigit():
            raise ValidationError(f"bad site token {token!r}; use <i> or <i>*")
        ops.append((int(token), adjoint))
    return ops


def _jw_artifact(meta: dict[str, str], fmt: str) -> str:
    n = int(meta["n"])
    q, t, seed = float(meta["q"]), float(meta["t"]), int(meta["seed"])
    table = CoefficientTable(sample_base(n, q, t, seed), t)
    op = meta["op"]
    if op == "expectation":
        value = vacuum_expectation(_parse_sites(meta["ops"]), n, table)
        return _render(meta, ["value"], [[_fmt(value)]], fmt, [f"value = {_fmt(value)}"])
    if op == "verify":
        report = check_commutation(n, table)
        rows = [[str(report.n), _fmt(report.max_deviation), str(len(report.failures))]]
        text_lines = [
            f"sites = {report.n}",
            f"max deviation = {_fmt(report.max_deviation)}",
            f"failures = {len(report.failures)}",
        ]
        return _render(meta, ["n", "max_deviation", "failures"], rows, fmt, text_lines)
    if op == "dump":
        site = meta["site"]
        adjoint = site.endswith("*")
        operator = build_jw(n, int(site.rstrip("*")), table, adjoint=adjoint)
        slots = []
        for action in operator.slots:
            slots.append({
                "empty": None if action[0] is None else [action[0][0], action[0][1]],
                "occupied": None if action[1] is None else [action[1][0], action[1][1]],
            })
        payload = {"metadata": meta, "scalar": operator.scalar, "slots": slots}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ValidationError(f"unknown jw op {op!r}")


# --------------------------------------------------------------------- clt

def _parse_pairing(text: str) -> PairPartition:
    pairs = []
    for token in text.replace(";", ",").split(","):
        token = token.strip()
        a, _, b = token.partition("-")
        if not a.isdigit() or not b.isdigit():
            raise ValidationError(f"bad pair token {token!r}; use w-z")
        pairs.append((int(a), int(b)))
    return PairPartition(tuple(pairs))


def _clt_config(meta: dict[str, str]) -> ExperimentConfig:
    pairing = _parse_pairing(meta["pairing"]) if "pairing" in meta else None
    return ExperimentConfig(
        mode=meta["mode"],
        eps=meta["eps"],
        q=float(meta["q"]),
        t=float(meta["t"]),
        ns=tuple(int(x) for x in meta["ns"].split(",")),
        seed=int(meta["seed"]),
        pairing=pairing,
    )


def _clt_artifact(meta: dict[str, str], fmt: str) -> str:
    report = convergence_experiment(_clt_config(meta))
    if fmt == "csv":
        return report.to_csv()
    if fmt == "json":
        return report.to_json()
    lines = []
    for row in report.rows:
        target = "none" if row.target is None else _fmt(row.target)
        err = "none" if row.abs_err is None else _fmt(row.abs_err)
        lines.append(f"N={row.n} value={_fmt(row.value)} target={target} abs_err={err}")
    return "\n".join(lines) + "\n"


ARTIFACTS: dict[str, Callable[[dict[str, str], str], str]] = {
    "pairings": _pairings_artifact,
    "wick": _wick_artifact,
    "fock": _fock_artifact,
    "coeffs": _coeffs_artifact,
    "jw": _jw_artifact,
    "clt": _clt_artifact,
}


# ------------------------------------------------------------------- check

def _parse_artifact(text: str) -> tuple[dict[str, str], str]:
    """Extract (metadata, format) from an emitted csv or json artifact."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        return dict(payload["metadata"]), "json"
    meta = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        meta[key] = value
    if not meta:
        raise ValidationError("file carries no metadata preamble; cannot re-check")
    return meta, "csv"


def run_check(path: str) -> str:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    meta, fmt = _parse_artifact(text)
    command = meta.get("command")
    if command not in ARTIFACTS:
        raise ValidationError(f"metadata names unknown command {command!r}")
    fresh = ARTIFACTS[command](meta, fmt)
    if fresh != text:
        raise ValidationError(f"artifact {path} does not match a fresh run of {command}")
    return f"ok: {path}"


# --------------------------------------------------------------- interface

def _load_config_file(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ValidationError(f"config line {line!r} is not key=value")
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    return out


def _merge_config(argv: list[str]) -> list[str]:
    """Inject config-file entries as flags after the subcommand; explicit flags
    stay later on the line, so argparse lets them win."""
    path = None
    for k, token in enumerate(argv):
        if token == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
            break
        if token.startswith("--config="):
            path = token.split("=", 1)[1]
            break
    if path is None or not argv:
        return argv
    present = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    extra: list[str] = []
    for key, value in _load_config_file(path).items():
        if key == "config" or f"--{key}" in present:
            continue
        if value.lower() == "true":
            extra.append(f"--{key}")
        elif value.lower() == "false":
            continue
        else:
            extra.extend([f"--{key}", value])
    return [argv[0]] + extra + argv[1:]


def _add_common(sub: argparse.ArgumentParser, default_format: str = "text") -> None:
    sub.add_argument("--format", choices=("text", "csv", "json"), default=default_format)
    sub.add_argument("--out", help="write the artifact to this path instead of stdout")
    sub.add_argument("--config", help="key=value file supplying defaults for flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtwick",
        description="pairing statistics, two-parameter Wick sums, and their finite-size models",
    )
    parser.add_argument("--version", action="version", version=f"qtwick {__version__}")
    parser.add_argument(
        "--check",
        metavar="FILE",
        help="verify a previously emitted csv/json artifact byte-for-byte",
    )
    subs = parser.add_subparsers(dest="command")

    p = subs.add_parser("pairings", help="enumerate pairings with crossing/nesting counts")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = subs.add_parser("wick", help="pairing-sum polynomials (note: quote patterns like '11**')")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--eps", help="letter pattern over 1 and *")
    group.add_argument("--field", type=int, help="number of pairs for the single-letter sum")
    p.add_argument("--labels", help="comma-separated labels, pairs must match")
    p.add_argument("--q", type=float)
    p.add_argument("--t", type=float)
    _add_common(p)

    p = subs.add_parser("fock", help="truncated-algebra moments, residuals, Gram spectra")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ops", help="comma list of c<i>, a<i>, s<i>, n tokens")
    group.add_argument("--residual", action="store_true")
    group.add_argument("--gram", type=int, metavar="DEGREE")
    _add_common(p)

    p = subs.add_parser("coeffs", help="sample coefficient tables, look up derived entries")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lookup", help="left,right,i,j (quote: letters include *)")
    _add_common(p)

    p = subs.add_parser("jw", help="chain-model expectations and relation checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ops", help="comma list of sites, * marks the adjoint (quote it)")
    group.add_argument("--verify", action="store_true")
    group.add_argument("--dump-op", metavar="SITE", help="site (append * for the adjoint)")
    _add_common(p)

    p = subs.add_parser("clt", help="convergence experiments against limiting targets")
    p.add_argument("--mode", choices=("moment", "lambda"), required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--ns", required=True, help="comma list of sizes, increasing")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pairing", help="pairs as w-z, comma separated (lambda mode)")
    _add_common(p, default_format="csv")

    return parser


def _resolve_seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    raw = os.environ.get("QTWICK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"QTWICK_SEED={raw!r} is not an integer") from None


def _meta_from_args(args: argparse.Namespace) -> dict[str, str]:
    command = args.command
    meta = {"command": command, "version": __version__}
    if command == "pairings":
        meta["n"] = str(args.n)
    elif command == "wick":
        if args.field is not None:
            meta["kind"] = "field"
            meta["n"] = str(args.field)
        elif args.labels is not None:
            meta["kind"] = "joint"
            meta["eps"] = args.eps
            meta["labels"] = ";".join(x.strip() for x in args.labels.split(","))
        else:
            meta["kind"] = "mixed"
            meta["eps"] = args.eps
        if (args.q is None) != (args.t is None):
            raise ValidationError("--q and --t must be given together")
        if args.q is not None:
            meta["q"] = _fmt(args.q)
            meta["t"] = _fmt(args.t)
    elif command == "fock":
        meta.update(d=str(args.d), m=str(args.m), q=_fmt(args.q), t=_fmt(args.t))
        if args.ops:
            meta["op"] = "moment"
            meta["ops"] = args.ops
        elif args.residual:
            meta["op"] = "residual"
        else:
            meta["op"] = "gram"
            meta["degree"] = str(args.gram)
    elif command == "coeffs":
        meta.update(
            n=str(args.n), q=_fmt(args.q), t=_fmt(args.t),
            seed=str(_resolve_seed(args.seed)),
        )
        if args.lookup:
            meta["lookup"] = args.lookup
    elif command == "jw":
        meta.update(
            n=str(args.n), q=_fmt(args.q), t=_fmt(args.t),
            seed=str(_resolve_seed(args.seed)),
        )
        if args.ops:
            meta["op"] = "expectation"
            meta["ops"] = args.ops
        elif args.verify:
            meta["op"] = "verify"
        else:
            meta["op"] = "dump"
            meta["site"] = args.dump_op
    elif command == "clt":
        meta.update(
            mode=args.mode, eps=args.eps, q=_fmt(args.q), t=_fmt(args.t),
            ns=args.ns, seed=str(_resolve_seed(args.seed)),
        )
        if args.pairing:
            meta["pairing"] = args.pairing.replace(",", ";")
    return meta


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = _merge_config(argv)
        args = parser.parse_args(argv)
        if args.check:
            print(run_check(args.check))
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        meta = _meta_from_args(args)
        if args.command == "clt":
            # the report module owns the exact csv schema
            text = _clt_artifact(meta, args.format)
        elif args.command == "jw" and meta.get("op") == "dump":
            text = _jw_artifact(meta, "json")
        else:
            text = ARTIFACTS[args.command](meta, args.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
