r"""Command-line surface.

Subcommands: validate, coeff, decompose, filtrate, asympt, cache.  Every
command is deterministic given configuration and cache state; rerunning
with a warm cache produces byte-identical output.  Exit status is 0 only
when every gate (orthogonality, integrality, reconstruction) passes.

Cache resolution precedence: --cache flag, then the MOONMOD_CACHE
environment variable (a directory holding <group>_coeffs.ldjson), then the
packaged precomputed store when present.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

from . import chartab, decomp, filtration
from .chartab import CharacterTable, FusedProvider, TableError, bundled_table, load_table
from .numerics import PrecisionContext
from .rademacher import (CoefficientCache, NonConvergent, RademacherEngine,
                         TruncationPolicy, ENGINE_C_LIMIT)

BUNDLED_GROUPS = ("m24", "a5")


@dataclass
class RunConfig:
    group: str
    cache_path: str | None
    precision: int | None
    tolerance: float | None
    fmt: str
    out: str | None
    jobs: int


def _resolve_cache(args, group: str) -> str | None:
    if args.cache:
        return args.cache
    env_dir = os.environ.get("MOONMOD_CACHE")
    if env_dir:
        return os.path.join(env_dir, f"{group}_coeffs.ldjson")
    try:
        ref = resources.files("moonmod.data").joinpath("m24_coeffs.ldjson")
        if ref.is_file():
            return str(ref)
    except (FileNotFoundError, ModuleNotFoundError):
        pass
    return None


def _load_group(name_or_path: str) -> CharacterTable:
    if name_or_path.lower() in BUNDLED_GROUPS:
        return bundled_table(name_or_path.lower())
    return load_table(name_or_path)


def _make_engine(args, table: CharacterTable):
    """(engine, provider): the provider serves the requested table's classes.

    Tables whose classes carry fusion targets are subgroups of M24: the
    engine runs on the ambient M24 data and values flow through fusion.
    """
    fused = all(c.fusion_target for c in table.classes) and table.group_name != "M24"
    ambient = bundled_table("m24") if fused else table
    ctx = None
    if args.precision or args.tol:
        ctx = PrecisionContext(
            working_precision=args.precision or 80,
            truncation_tolerance=args.tol or 1e-4,
        )
    policy = None
    if args.tol:
        policy = TruncationPolicy(c_max_limit=ENGINE_C_LIMIT,
                                  residual_tolerance=args.tol)
    cache = CoefficientCache(_resolve_cache(args, ambient.group_name.lower()))
    engine = RademacherEngine(ambient, policy=policy, ctx=ctx, cache=cache)
    provider = FusedProvider(table, engine) if fused else engine
    return engine, provider


def _parse_grades(spec: str) -> list[int]:
    """Single value, comma list, or lo..hi range."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty grade range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return out


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------

def cmd_validate(args) -> int:
    target = args.table or args.group
    checks = []
    try:
        table = _load_group(target)
    except TableError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    checks.append(f"parsed {table.group_name}: {len(table.classes)} classes, "
                  f"{len(table.irreps)} irreps")
    checks.append(f"class sizes sum to |G| = {table.group_order}")
    total = sum(chi.dim ** 2 for chi in table.irreps)
    checks.append(f"sum of dim^2 = {total}"
                  + (" = |G|" if total == table.group_order else " (MISMATCH)"))
    checks.append("row orthogonality exact")
    checks.append("column orthogonality exact")
    report = "\n".join("ok: " + line for line in checks) + "\npass\n"
    _emit(report, args.out)
    return 0 if total == table.group_order else 1


def cmd_coeff(args) -> int:
    table = _load_group(args.group)
    engine, provider = _make_engine(args, table)
    class_names = (args.cls.split(",") if args.cls
                   else [c.name for c in table.classes])
    grades = _parse_grades(args.n)
    rows = []

    def fetch(name):
        if isinstance(provider, FusedProvider):
            target = provider.fusion[name]
            return [(name, engine.coefficient(engine.params_for(target), n))
                    for n in grades]
        return [(name, engine.coefficient(engine.params_for(name), n))
                for n in grades]

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for batch in pool.map(fetch, class_names):
                rows.extend(batch)
    else:
        for name in class_names:
            rows.extend(fetch(name))
    rows.sort(key=lambda item: (class_names.index(item[0]), item[1].n))
    if args.format == "json":
        doc = {
            "schema": 1,
            "group": table.group_name,
            "records": [
                {
                    "class": name,
                    "n": rec.n,
                    "value": str(rec.value),
                    "residual": rec.residual,
                    "c_max_used": rec.c_max_used,
                    "mode": rec.dedekind_mode_used.value,
                    "gate": rec.gate,
                }
                for name, rec in rows
            ],
        }
        _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["class", "n", "value", "residual", "c_max_used",
                         "mode", "gate"])
        for name, rec in rows:
            writer.writerow([name, rec.n, rec.value, f"{rec.residual:.3e}",
                             rec.c_max_used, rec.dedekind_mode_used.value, rec.gate])
        _emit(buf.getvalue(), args.out)
    return 0


def cmd_decompose(args) -> int:
    table = _load_group(args.group)
    engine, provider = _make_engine(args, table)
    grades = _parse_grades(args.n)
    positives = [n for n in grades if n >= 1]
    profiles = decomp.ratio_profile(table, positives, provider)
    by_n = {p.n: p for p in profiles}
    buf = io.StringIO()
    if args.format == "json":
        doc = {"schema": 1, "group": table.group_name, "grades": []}
        for n in grades:
            if n >= 1:
                prof = by_n[n]
                mv = prof.mv
            else:
                mv = decomp.multiplicities(table, n, provider)
                prof = None
            doc["grades"].append({
                "n": n,
                "multiplicities": {chi.name: mv.m[i]
                                   for i, chi in enumerate(table.irreps)},
                "max_deviation": prof.max_deviation if prof else None,
            })
        buf.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "irrep", "dim", "multiplicity", "ratio",
                         "limit_ratio"])
        for n in grades:
            if n >= 1:
                prof = by_n[n]
                for i, chi in enumerate(table.irreps):
                    writer.writerow([n, chi.name, chi.dim, prof.mv.m[i],
                                     f"{float(prof.observed[i]):.12g}",
                                     f"{float(prof.limits[i]):.12g}"])
            else:
                mv = decomp.multiplicities(table, n, provider)
                for i, chi in enumerate(table.irreps):
                    writer.writerow([n, chi.name, chi.dim, mv.m[i], "", ""])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_filtrate(args) -> int:
    table = _load_group(args.group)
    engine, provider = _make_engine(args, table)
    if args.residue is not None:
        if args.modulus is None:
            raise SystemExit("--residue requires --modulus")
        profile = filtration.sign_profile(table, provider, (1, 60))
        modulus = args.modulus
        for name, cs in profile.classes.items():
            if cs.source != "aperiodic" and modulus % cs.period != 0:
                raise SystemExit(
                    f"class {name} has sign period {cs.period}, "
                    f"not dividing modulus {modulus}"
                )
        result = filtration.filtrate_asymptotic(table, profile, args.residue, modulus)
    else:
        if args.n is None:
            raise SystemExit("either --n or --residue/--modulus is required")
        grades = _parse_grades(args.n)
        if len(grades) != 1:
            raise SystemExit("filtrate takes a single grade")
        n = grades[0]
        mv = decomp.multiplicities(table, n, provider)
        signs = filtration.signs_at(table, provider, n)
        result = filtration.filtrate_exact(mv, table, signs)
        total = list(mv.m)
        for lvl in result.chain:
            for i, coeff in lvl.direction.items():
                total[i] -= lvl.r * coeff
        if not result.approximate and tuple(total) != result.residual:
            print("reconstruction check failed", file=sys.stderr)
            return 1
    _emit(filtration.result_to_json(result, table) + "\n", args.out)
    return 0


def cmd_asympt(args) -> int:
    table = _load_group(args.group)
    engine, provider = _make_engine(args, table)
    grades = _parse_grades(args.n)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if args.free:
        writer.writerow(["n", "max_deviation"])
        for prof in decomp.ratio_profile(table, grades, provider):
            writer.writerow([prof.n, f"{prof.max_deviation:.6g}"])
    else:
        writer.writerow(["n", "irrep", "observed", "predicted", "ratio"])
        for n in grades:
            mv = decomp.multiplicities(table, n, provider)
            _, nonfree = decomp.free_part_split(mv, table)
            signs = filtration.signs_at(table, provider, n)
            pred = filtration.nonfree_asymptotic(table, signs, n)
            for i, chi in enumerate(table.irreps):
                ratio = (nonfree.m[i] / pred[i]) if pred[i] else ""
                writer.writerow([n, chi.name, nonfree.m[i], f"{pred[i]:.6g}",
                                 f"{ratio:.6g}" if ratio != "" else ""])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_cache(args) -> int:
    path = args.cache or _resolve_cache(args, (args.group or "m24").lower())
    if path is None or not os.path.exists(path):
        print("no cache file", file=sys.stderr)
        return 1
    if args.clear:
        os.remove(path)
        _emit(f"removed {path}\n", args.out)
        return 0
    cache = CoefficientCache(path)
    by_class: dict[str, int] = {}
    for (_, cls, _n) in cache.records:
        by_class[cls] = by_class.get(cls, 0) + 1
    lines = [f"{path}: {len(cache)} records"]
    for cls in sorted(by_class):
        lines.append(f"  {cls}: {by_class[cls]}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- parser ------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", default="m24",
                   help="bundled group name (m24, a5) or a table file path")
    p.add_argument("--cache", help="coefficient cache file (ldjson)")
    p.add_argument("--precision", type=int, help="working precision in digits")
    p.add_argument("--tol", type=float, help="integrality residual tolerance")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel coefficient workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moonmod",
        description="Rademacher coefficients, character decompositions, and "
                    "regular-representation filtrations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a table and run every exact gate")
    p.add_argument("table", nargs="?", help="table file (defaults to --group)")
    _add_common(p)

    p = sub.add_parser("coeff", help="compute Fourier coefficients")
    p.add_argument("--class", dest="cls",
                   help="comma-separated class names (default: all)")
    p.add_argument("--n", required=True,
                   help="grade: single value, comma list, or lo..hi")
    _add_common(p)

    p = sub.add_parser("decompose", help="irreducible multiplicities per grade")
    p.add_argument("--n", required=True)
    _add_common(p)

    p = sub.add_parser("filtrate", help="regular-representation filtration")
    p.add_argument("--n", help="single grade for exact mode")
    p.add_argument("--residue", type=int, help="residue class for asymptotic mode")
    p.add_argument("--modulus", type=int, help="modulus for asymptotic mode")
    _add_common(p)

    p = sub.add_parser("asympt", help="observed vs predicted asymptotics")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--free", action="store_true",
                       help="dimension-ratio deviations (free part)")
    group.add_argument("--nonfree", action="store_true",
                       help="leading non-free correction")
    p.add_argument("--n", required=True)
    _add_common(p)

    p = sub.add_parser("cache", help="inspect or clear the coefficient cache")
    p.add_argument("--clear", action="store_true")
    _add_common(p)

    return parser


COMMANDS = {
    "validate": cmd_validate,
    "coeff": cmd_coeff,
    "decompose": cmd_decompose,
    "filtrate": cmd_filtrate,
    "asympt": cmd_asympt,
    "cache": cmd_cache,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NonConvergent as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TableError, decomp.DecompositionError, filtration.FiltrationError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
