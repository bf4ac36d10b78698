"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 a checked relation or
reproduction item failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .battery import GROUPS, run_battery
from .fixtures import FIXTURE_IDS, Fixture, UnknownFixture, get_fixture
from .measures import (
    MeasureReport,
    _jsonable,
    complementarity_from_independence,
    noise_complementarity,
    preimage_measure,
    rac_exclusion,
    rac_exclusion_set,
    rac_independence,
    rac_independence_set,
    rac_uncertainty_set,
    rescaling_independence,
    volume_independence,
)
from .quantum import QuantumError, random_unitary
from .relations import (
    NotSharp,
    NotSymmetric,
    RelationReport,
    check_chsh,
    check_exclusion_pur,
    check_rescaling_pur,
    check_reverse_pur,
    icp_report,
)
from .render import statistics_set_svg
from .theory import StatisticsSet, Theory, TheoryError

OUTPUT_ENV = "COMPLEMENTARITY_OUTPUT_DIR"
MEASURES = ("rac-ind", "rac-unc", "rac-exc", "rescaling", "volume", "vi", "noise-robustness", "complementarity")
RELATIONS = ("exclusion-pur", "rescaling-pur", "reverse-pur", "icp", "chsh")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------


def _load_input(args) -> Fixture:
    if bool(args.fixture) == bool(args.theory):
        raise UsageError("give exactly one of --fixture or --theory")
    if args.fixture:
        params = {}
        if args.n_z is not None:
            params["n_z"] = args.n_z
        if args.resolution is not None:
            params["resolution"] = args.resolution
        return get_fixture(args.fixture, **params)
    path = Path(args.theory)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    theory = Theory.from_json(data)
    if len(theory.observables) < 2:
        raise UsageError("the theory needs at least two observables")
    return Fixture(path.stem, f"theory file {path}", theory, tuple(theory.observables[:2]))


def _pair(args, fx: Fixture) -> tuple[str, str]:
    if not args.pair:
        return fx.pair
    parts = [p.strip() for p in args.pair.split(",")]
    if len(parts) != 2:
        raise UsageError("--pair expects two names separated by a comma")
    for p in parts:
        if p not in fx.theory.observables:
            raise UsageError(f"unknown observable {p!r}; theory lists {', '.join(fx.theory.observables)}")
    return parts[0], parts[1]


def _parse_decomposition(text: str):
    """'X=0.5:X1,0.5:X2' -> ('X', [(0.5, 'X1'), (0.5, 'X2')])."""
    try:
        target, rhs = text.split("=", 1)
        parts = []
        for chunk in rhs.split(","):
            w, name = chunk.split(":", 1)
            parts.append((float(w), name.strip()))
    except ValueError:
        raise UsageError(f"cannot parse decomposition {text!r}; expected NAME=w:OBS,w:OBS") from None
    return target.strip(), parts


def _parse_scan(text: str) -> np.ndarray:
    """'n_z=-0.99:0.99:101' -> 101 evenly spaced values."""
    try:
        key, rng = text.split("=", 1)
        lo, hi, n = rng.split(":")
        if key.strip() != "n_z":
            raise ValueError
        return np.round(np.linspace(float(lo), float(hi), int(n)), 12)
    except ValueError:
        raise UsageError(f"cannot parse scan {text!r}; expected n_z=LO:HI:N") from None


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def _emit(args, text: str, default_name: str) -> None:
    out = args.output
    outdir = args.output_dir or os.environ.get(OUTPUT_ENV)
    if out is None and outdir:
        out = str(Path(outdir) / default_name)
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    if outdir and not path.is_absolute() and args.output is not None:
        path = Path(outdir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


def _rank_one_bases(fx: Fixture):
    if fx.measurements and all(m.is_rank_one for m in fx.measurements):
        return fx.measurements[0].basis, fx.measurements[1].basis
    return None


def compute_measure(name: str, fx: Fixture, X: str, Y: str, decompositions=()) -> MeasureReport:
    S = StatisticsSet.from_points(fx.theory.table(X), fx.theory.table(Y), X, Y)
    bases = _rank_one_bases(fx) if (X, Y) == fx.pair else None
    if name == "rac-ind":
        if bases is not None:
            return MeasureReport("rac-ind", rac_independence(*bases), source="quantum closed form")
        return rac_independence_set(S)
    if name == "rac-unc":
        return MeasureReport("rac-unc", rac_uncertainty_set(S), {"normalized": True})
    if name == "rac-exc":
        return rac_exclusion(*bases) if bases is not None else rac_exclusion_set(S)
    if name == "rescaling":
        return rescaling_independence(S)
    if name == "volume":
        return volume_independence(S)
    if name == "vi":
        return preimage_measure(S)
    if name == "noise-robustness":
        return noise_complementarity(fx.theory, X, Y)
    if name == "complementarity":
        return complementarity_from_independence(fx.theory, X, Y, decompositions=decompositions)
    raise UsageError(f"unknown measure {name!r}")


def _decompositions(args, fx: Fixture, X: str, Y: str):
    if not args.decompose:
        return fx.decompositions if (X, Y) == fx.pair else ()
    xs, ys = [(1.0, X)], [(1.0, Y)]
    for text in args.decompose:
        target, parts = _parse_decomposition(text)
        if target == X:
            xs = parts
        elif target == Y:
            ys = parts
        else:
            raise UsageError(f"decomposition target {target!r} is not in the pair")
    return ((xs, ys),)


def cmd_measure(args) -> int:
    fx = _load_input(args)
    X, Y = _pair(args, fx)
    rep = compute_measure(args.measure, fx, X, Y, _decompositions(args, fx, X, Y))
    if args.format == "svg":
        text = statistics_set_svg(StatisticsSet.from_points(fx.theory.table(X), fx.theory.table(Y)), fx.id)
    elif args.format == "csv":
        text = _csv([{"name": rep.name, "value": rep.value}], ["name", "value"])
    else:
        text = _dump_json(rep.to_json())
    _emit(args, text, f"measure-{fx.id}-{args.measure}.{args.format}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def _relation_reports(args) -> list[RelationReport]:
    rel = args.relation
    if rel == "icp":
        return [icp_report()]
    if rel == "rescaling-pur":
        values = _parse_scan(args.scan) if args.scan else [args.n_z if args.n_z is not None else 0.0]
        return [check_rescaling_pur(float(v), geometric=args.geometric) for v in values]
    if rel == "exclusion-pur":
        if args.random:
            if args.seed is None:
                raise UsageError("--random needs --seed")
            rng = np.random.default_rng(args.seed)
            out = []
            for k in range(args.random):
                r = check_exclusion_pur(random_unitary(args.d, rng), random_unitary(args.d, rng))
                r.parameter = k
                out.append(r)
            return out
        bases = _rank_one_bases(_load_input(args))
        if bases is None:
            raise UsageError("exclusion-pur needs a fixture with two rank-one bases")
        return [check_exclusion_pur(*bases)]
    if rel == "reverse-pur":
        if args.scan:
            return [_with_param(check_reverse_pur(get_fixture("qubit", n_z=float(v)).statistics_set), float(v))
                    for v in _parse_scan(args.scan)]
        return [check_reverse_pur(_load_input(args).statistics_set)]
    if rel == "chsh":
        return [check_chsh(_load_input(args).statistics_set, grid=args.grid)]
    raise UsageError(f"unknown relation {rel!r}")


def _with_param(rep: RelationReport, value) -> RelationReport:
    rep.parameter = value
    return rep


def cmd_check(args) -> int:
    reports = _relation_reports(args)
    if args.format == "csv":
        rows = [{"parameter": r.parameter, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "holds": r.holds}
                for r in reports]
        text = _csv(rows, ["parameter", "lhs", "rhs", "slack", "holds"])
    elif args.format == "svg":
        raise UsageError("check writes json or csv")
    else:
        text = _dump_json([r.to_json() for r in reports])
    _emit(args, text, f"check-{args.relation}.{args.format}")
    failed = [r for r in reports if not r.holds]
    print(f"{args.relation}: {len(reports) - len(failed)}/{len(reports)} hold", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# verify-paper and list-fixtures
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


SVG_FIXTURES = (("square-bit", {}), ("c-bit", {}), ("diamond", {}), ("qubit", {"n_z": 0.0}), ("qubit", {"n_z": 0.6}))


def cmd_verify(args) -> int:
    items = run_battery(args.only)
    if args.format == "json":
        text = _dump_json([i.row() for i in items])
    elif args.format == "csv":
        text = _csv([i.row() for i in items], ["group", "item", "expected", "computed", "tol", "pass"])
    else:
        w = max(len(f"{i.group}: {i.name}") for i in items)
        lines = [f"{'item'.ljust(w)}  {'expected':>12}  {'computed':>12}  result"]
        for i in items:
            lines.append(f"{(i.group + ': ' + i.name).ljust(w)}  {_fmt(i.expected):>12}  {_fmt(i.computed):>12}  "
                         f"{'PASS' if i.passed else 'FAIL'}")
        lines.append(f"{sum(i.passed for i in items)}/{len(items)} passed")
        text = "\n".join(lines) + "\n"
    _emit(args, text, f"verify-paper.{'txt' if args.format == 'table' else args.format}")
    if args.svg_dir:
        d = Path(args.svg_dir)
        d.mkdir(parents=True, exist_ok=True)
        for fid, params in SVG_FIXTURES:
            tag = fid + "".join(f"-{k}{v:g}" for k, v in params.items())
            (d / f"{tag}.svg").write_text(statistics_set_svg(get_fixture(fid, **params).statistics_set, tag))
    failed = [i for i in items if not i.passed]
    for i in failed:
        print(f"FAILED {i.group}: {i.name} (expected {_fmt(i.expected)}, got {_fmt(i.computed)})", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_list(args) -> int:
    rows = []
    for fid in FIXTURE_IDS:
        fx = get_fixture(fid)
        rows.append({"id": fid, "description": fx.description, "pair": ",".join(fx.pair)})
    if args.format == "json":
        text = _dump_json(rows)
    elif args.format == "csv":
        text = _csv(rows, ["id", "pair", "description"])
    else:
        text = "".join(f"{r['id']:<12} {r['pair']:<6} {r['description']}\n" for r in rows)
    _emit(args, text, f"fixtures.{'txt' if args.format == 'table' else args.format}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fixture", help=f"built-in fixture id ({', '.join(FIXTURE_IDS)})")
    p.add_argument("--theory", help="path to a theory JSON file")
    p.add_argument("--n_z", "--n-z", dest="n_z", type=float, help="qubit fixture parameter")
    p.add_argument("--resolution", type=int, help="polygon resolution for the qubit fixture")


def _add_output(p: argparse.ArgumentParser, formats, default) -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--output", "-o", help="output file ('-' for stdout)")
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV}, else stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complementarity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="evaluate a measure on a theory or fixture")
    m.add_argument("measure", choices=MEASURES)
    _add_input(m)
    m.add_argument("--pair", help="observable names X,Y")
    m.add_argument("--decompose", action="append", help="convex decomposition NAME=w:OBS,w:OBS (repeatable)")
    _add_output(m, ("json", "csv", "svg"), "json")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("check", help="check an uncertainty relation")
    c.add_argument("relation", choices=RELATIONS)
    _add_input(c)
    c.add_argument("--scan", help="parameter sweep n_z=LO:HI:N")
    c.add_argument("--random", type=int, help="number of random basis pairs")
    c.add_argument("--d", type=int, default=2, help="dimension for random campaigns")
    c.add_argument("--seed", type=int)
    c.add_argument("--grid", type=int, default=101, help="CHSH grid resolution per axis")
    c.add_argument("--geometric", action="store_true", help="use the polygon pipeline for rescaling-pur")
    _add_output(c, ("json", "csv"), "json")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify-paper", help="run the reproduction battery")
    v.add_argument("--only", choices=tuple(GROUPS), help="run a single group")
    v.add_argument("--svg-dir", help="also write statistics-set drawings here")
    _add_output(v, ("table", "json", "csv"), "table")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("list-fixtures", help="list built-in fixtures")
    _add_output(f, ("table", "json", "csv"), "table")
    f.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownFixture as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (UsageError, TheoryError, QuantumError, NotSharp, NotSymmetric, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
