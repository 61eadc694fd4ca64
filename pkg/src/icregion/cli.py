"""``icregion`` command line.

Exit codes: 0 pass, 1 usage or I/O error, 2 semantic failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .channel_model import (
    Dmic,
    GaussianIC,
    InterferencePattern,
    ProductDistribution,
    random_conforming_instance,
    validate,
)
from .conditions import check_conditions, classify_gaussian, dmic_condition_gap
from .errors import ConditionError, EmptySliceError, ICRegionError, PreconditionError, ValidationError
from .info_metrics import dmic_mi, gaussian_mi, mc_gaussian_mi, query
from .region import capacity_polytope, max_weighted_sum, slice2d, vertices
from .serialization import (
    distribution_from_json,
    dump_json,
    gaussian_to_json,
    load_channel,
    load_json,
    pattern_to_json,
    polytope_to_json,
)
from .verify import verify_instance

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


def _users(text: str) -> list[int]:
    try:
        out = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad user list {text!r}") from exc
    return out


def _pattern(text: str | None, k: int) -> InterferencePattern | None:
    """``--pattern 2,3,1``: strong interferer at each receiver, 1-based."""
    if text is None:
        return None
    strong = _users(text)
    if len(strong) != k:
        raise UsageError(f"--pattern needs {k} entries")
    return InterferencePattern.from_strong(strong)


def _g(x: float) -> str:
    return f"{x:.6g}"


def _load(args):
    ch = load_channel(args.input)
    validate(ch)
    dist = None
    if isinstance(ch, Dmic):
        path = getattr(args, "dist", None)
        dist = distribution_from_json(load_json(path)) if path else ProductDistribution.uniform(ch.input_sizes)
        validate(dist, ch.k)
    return ch, dist


def _gaussian_pattern(ch: GaussianIC, args) -> InterferencePattern:
    pattern = _pattern(args.pattern, ch.k)
    if pattern is not None:
        return pattern
    cls = classify_gaussian(ch)
    if cls.pattern is not None:
        return cls.pattern
    if args.force:
        return InterferencePattern.cyclic(ch.k)
    raise ConditionError(f"no valid interference pattern; receivers {[j + 1 for j in cls.uncovered]} uncovered")


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    ch, dist = _load(args)
    if isinstance(ch, Dmic):
        pattern = _pattern(args.pattern, ch.k) or InterferencePattern.cyclic(ch.k)
        rep = dmic_condition_gap(ch, pattern, args.samples, args.seed)
        doc = {
            "type": "dmic",
            "status": rep.status,
            "distributions": rep.n_distributions,
            "pattern": pattern_to_json(pattern),
            "conditions": [
                {"kind": g.kind, "user": g.user + 1, "receiver": g.receiver + 1,
                 "condition": f"{g.satisfied_side.label()} >= {g.other_side.label()}",
                 "min_gap": g.min_gap, "status": g.status}
                for g in rep.gaps
            ],
        }
        if args.json:
            _write(dump_json(doc), None)
        else:
            print(f"pattern: {pattern.describe()}")
            for c in doc["conditions"]:
                print(f"  {c['condition']}: min gap {_g(c['min_gap'])} ({c['status']})")
            print(f"status: {rep.status} over {rep.n_distributions} distributions")
        return EXIT_FAIL if rep.status == "violated" else EXIT_OK

    pattern = _pattern(args.pattern, ch.k)
    if pattern is None:
        cls = classify_gaussian(ch)
        report = cls.report
        pattern = cls.pattern
    else:
        cls = None
        report = check_conditions(ch, pattern)
    doc = {"type": "gaussian", "passed": bool(report is not None and report.passed)}
    if cls is not None:
        doc["links"] = [{"user": m + 1, "receiver": j + 1, "label": lab}
                        for (m, j), lab in sorted(cls.labels.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
        doc["uncovered_receivers"] = [j + 1 for j in cls.uncovered]
        if cls.case is not None:
            doc["case"] = cls.case
            doc["paper_labeling"] = cls.paper_labeling
    if pattern is not None:
        doc["pattern"] = pattern_to_json(pattern)
        doc["margins"] = [{"kind": i.kind, "user": i.user + 1, "receiver": i.receiver + 1,
                           "lhs": i.lhs, "rhs": i.rhs, "margin": i.margin}
                          for i in report.inequalities]
    if args.json:
        _write(dump_json(doc), None)
    else:
        if pattern is None:
            print(f"no valid pattern; uncovered receivers: {doc['uncovered_receivers']}")
        else:
            if "case" in doc:
                print(f"case {doc['case']}" + (" (reference labeling)" if doc["paper_labeling"] else ""))
            print(f"pattern: {pattern.describe()}")
            for i in report.inequalities:
                print("  " + i.describe())
        print("PASS" if doc["passed"] else "FAIL")
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def _region(args):
    ch, dist = _load(args)
    if isinstance(ch, GaussianIC):
        pattern = _gaussian_pattern(ch, args)
    else:
        pattern = _pattern(args.pattern, ch.k) or InterferencePattern.cyclic(ch.k)
    return capacity_polytope(ch, pattern, dist, force=args.force), pattern


def cmd_region(args) -> int:
    poly, pattern = _region(args)
    verts = vertices(poly)
    if args.format == "hrep":
        lines = [f"{h.lhs_text()} <= {_g(h.bound)}    # {h.label}" for h in poly.halfspaces]
        text = "\n".join(lines) + "\n"
    elif args.format == "vertices":
        text = "".join(", ".join(_g(x) for x in v) + "\n" for v in verts)
    else:
        doc = polytope_to_json(poly, verts, pattern)
        value, point = max_weighted_sum(poly, [1.0] * poly.dim, verts)
        doc["sum_capacity"] = value
        doc["sum_capacity_point"] = [float(x) for x in point]
        text = dump_json(doc)
    _write(text, args.out)
    return EXIT_OK


def _fixed(items, k: int) -> dict:
    out = {}
    for item in items or []:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                name, val = part.split("=")
                user = int(name.strip().lstrip("Rr_")) - 1
                out[user] = float(val)
            except ValueError as exc:
                raise UsageError(f"bad --fixed entry {part!r}; expected like R3=0.5") from exc
            if not 0 <= user < k:
                raise UsageError(f"--fixed user {user + 1} out of range")
    return out


def cmd_slice(args) -> int:
    poly, _ = _region(args)
    users = _users(args.users)
    if len(users) != 2:
        raise UsageError("--users needs two users, e.g. 1,2")
    fixed = _fixed(args.fixed, poly.dim)
    for u in range(poly.dim):
        if u not in users:
            fixed.setdefault(u, 0.0)
    sl = slice2d(poly, users[0], users[1], fixed, args.grid)
    _write(sl.to_csv(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    reports = []
    if args.random:
        k, seed, n = args.random
        for i in range(n):
            inst = random_conforming_instance(k, seed + i)
            rep = verify_instance(inst.ic, inst.pattern, samples=args.samples, seed=args.seed,
                                  tol=args.tol, force=args.force)
            rep["instance"] = {"k": k, "seed": seed + i, "power_scale": inst.power_scale}
            reports.append(rep)
    elif args.input:
        ch, dist = _load(args)
        rep = verify_instance(ch, _pattern(args.pattern, ch.k), dist, samples=args.samples,
                              seed=args.seed, tol=args.tol, force=args.force)
        rep["instance"] = {"path": args.input}
        reports.append(rep)
    else:
        raise UsageError("verify needs an input file or --random K SEED N")
    passed = all(r["passed"] for r in reports)
    if args.json:
        _write(dump_json({"passed": passed, "instances": reports}), args.out)
    else:
        for r in reports:
            print(f"{json.dumps(r['instance'], sort_keys=True)}: {'PASS' if r['passed'] else 'FAIL'}")
            for name, c in r["checks"].items():
                extras = {key: v for key, v in c.items() if key != "status"}
                print(f"  {name:24s} {c['status']}  {json.dumps(extras, sort_keys=True)}")
        print(f"overall: {'PASS' if passed else 'FAIL'} ({len(reports)} instances)")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_mi(args) -> int:
    ch, dist = _load(args)
    q = query(_users(args.senders), int(args.receiver) - 1, _users(args.given or ""))
    if isinstance(ch, GaussianIC):
        doc = {"query": q.label(), "bits": gaussian_mi(ch, q)}
        if args.mc:
            est, se = mc_gaussian_mi(ch, q, args.mc, args.seed)
            doc.update({"mc_estimate": est, "mc_stderr": se})
    else:
        doc = {"query": q.label(), "bits": dmic_mi(ch, dist, q)}
    if args.json:
        _write(dump_json(doc), None)
    else:
        line = f"{doc['query']} = {doc['bits']:.10g} bits"
        if "mc_estimate" in doc:
            line += f"  (Monte Carlo {doc['mc_estimate']:.10g} +/- {doc['mc_stderr']:.3g})"
        print(line)
    return EXIT_OK


def cmd_random(args) -> int:
    powers = [float(p) for p in args.powers.split(",")] if args.powers else None
    inst = random_conforming_instance(args.k, args.seed, powers)
    meta = {"seed": args.seed, "power_scale": inst.power_scale,
            "pattern": pattern_to_json(inst.pattern)}
    _write(dump_json(gaussian_to_json(inst.ic, meta)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icregion",
        description="Capacity regions of K-user interference channels with mixed "
                    "strong / very strong interference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def channel_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="channel JSON file")
        p.add_argument("--pattern", help="strong interferer per receiver, 1-based, e.g. 2,3,1")
        p.add_argument("--dist", help="input distribution JSON (DMIC only; default uniform)")
        return p

    p = channel_cmd("check", "classify interference and check conditions")
    p.add_argument("--json", action="store_true")
    p.add_argument("--samples", type=int, default=1000, help="sampled distributions (DMIC)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = channel_cmd("region", "capacity-region polytope")
    p.add_argument("--format", choices=["hrep", "vertices", "json"], default="hrep")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true", help="build the polytope even if conditions fail")
    p.set_defaults(func=cmd_region)

    p = channel_cmd("slice", "2D section of the region as CSV")
    p.add_argument("--users", required=True, help="two users, e.g. 1,2")
    p.add_argument("--fixed", action="append", help="rates of other users, e.g. R3=0.5")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("input", nargs="?")
    p.add_argument("--random", nargs=3, type=int, metavar=("K", "SEED", "N"))
    p.add_argument("--pattern")
    p.add_argument("--dist")
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples per MI term")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--force", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = channel_cmd("mi", "one conditional mutual information term")
    p.add_argument("--senders", required=True)
    p.add_argument("--receiver", required=True)
    p.add_argument("--given", default="")
    p.add_argument("--mc", type=int, default=0, help="also estimate by Monte Carlo (Gaussian)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("random", help="write a seeded conforming Gaussian instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--powers", help="comma-separated power hint")
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PreconditionError, EmptySliceError) as exc:
        print(f"icregion: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ValidationError, ICRegionError, OSError, json.JSONDecodeError, IndexError) as exc:
        print(f"icregion: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
