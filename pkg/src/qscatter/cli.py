"""Command-line front end.

    qscatter scatter   SEED      complete a plane seed diagram, check the loop identity
    qscatter canonical INPUT     canonical diagram on B and the ray presentations
    qscatter theta     INPUT     structure constants for --charges
    qscatter relations INPUT     relations among the fixture generators
    qscatter check     INPUT     consistency, torus grading and q-integrality

INPUT is a JSON file or the name of a bundled fixture (pentagon, dp5, v1,
v2, toric_p2).  JSON is the output of record; text is rendered from it.
Exit codes: 0 pass, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional

from .affine_base import SurfaceError, canonical_point, format_point, integral_points, parse_point, surface_from_json
from .brokenlines import (
    DegreeCapExceeded,
    SearchExhausted,
    q_integrality,
    table_from_json,
    weight_check,
)
from .canonical import SeedError, build_seed_diagram, canonical_diagram, rho_presentation, seed_from_json
from .fixtures import FIXTURES, Fixture, FixtureError, fixture_from_json, fixture_text
from .mirror_algebra import NonGenerating, build_algebra, derive_relations, format_coeff, poisson_relations
from .qcoeff import QArithmeticError, QScalar
from .qtorus import QTorusError
from .scattering import DiagramError, check_loop_identity, complete, consistency_check_on_B, diagram_to_json

COMMANDS = ("scatter", "canonical", "theta", "relations", "check")


class InputError(Exception):
    """Bad input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# input


def _read(source: str):
    if os.path.exists(source):
        with open(source) as fh:
            text = fh.read()
        where = source
    elif source in FIXTURES:
        text = fixture_text(source)
        where = f"<fixture {source}>"
    else:
        raise InputError(f"{source}: no such file or bundled fixture")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}:{exc.lineno}:{exc.colno}: parse error: {exc.msg}") from None


def _kind(obj) -> str:
    if not isinstance(obj, dict):
        raise InputError("input must be a JSON object")
    if "seed_vectors" in obj:
        return "seed"
    if "surface" in obj and "table" in obj:
        return "table"
    if "surface" in obj:
        return "fixture"
    if "rays" in obj:
        return "surface"
    raise InputError("unrecognized input: expected a seed, a fixture, a surface or a table")


def _fixture(obj) -> Fixture:
    kind = _kind(obj)
    if kind == "fixture":
        return fixture_from_json(obj)
    if kind == "surface":
        return fixture_from_json({"surface": obj})
    raise InputError(f"this command needs a fixture or a surface, got a {kind}")


def split_charges(text: str) -> List[str]:
    """Split "v1,(2,1)@0,v2" at commas outside parentheses."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


# ---------------------------------------------------------------------------
# commands; each returns (report, exit code)


def cmd_scatter(obj, args):
    if _kind(obj) == "seed":
        seed = seed_from_json(obj)
    elif obj.get("seed"):
        seed = seed_from_json(obj["seed"])
    else:
        raise InputError("scatter needs a seed")
    N = args.order or 3
    diagram = complete(build_seed_diagram(seed, N), N)
    loop = check_loop_identity(diagram)
    added = [w for w in diagram.walls if w.added]
    report = {
        "command": "scatter",
        "order": N,
        "diagram": diagram_to_json(diagram),
        "added_walls": [{"direction": list(w.direction), "f": w.f.format(diagram.labels)} for w in added],
        "loop_identity": loop,
        "pass": loop["pass"],
    }
    return report, 0 if loop["pass"] else 1


def cmd_canonical(obj, args):
    if _kind(obj) == "seed":
        seed = seed_from_json(obj)
        N = args.order or 3
        diagram = canonical_diagram(seed, None, N)
    else:
        fx = _fixture(obj)
        N = args.order or fx.order
        diagram = fx.diagram(N)
    rays = [rho_presentation(diagram, j, N) for j in range(diagram.surface.r)]
    ok = all(x["pass"] for x in rays)
    report = {
        "command": "canonical",
        "order": N,
        "diagram": diagram_to_json(diagram),
        "rays": [{"ray": format_point(diagram.surface, canonical_point(diagram.surface, parse_point(diagram.surface, f"v{j + 1}"))), "pass": x["pass"]} for j, x in enumerate(rays)],
        "pass": ok,
    }
    return report, 0 if ok else 1


def _charges(surface, args, default_bound: int):
    if args.charges:
        try:
            return [canonical_point(surface, parse_point(surface, c)) for c in split_charges(args.charges)]
        except SurfaceError as exc:
            raise InputError(f"--charges: {exc}") from None
    return integral_points(surface, default_bound)


def _q_value(c: QScalar, at: Optional[Fraction]):
    if at is None:
        return None
    # display only: s = q^(1/2) is evaluated at the square root when it is rational
    num, den = at.numerator, at.denominator
    rn, rd = _isqrt(num), _isqrt(den)
    if rn is None or rd is None:
        return None
    return str(c.evaluate(Fraction(rn, rd)))


def _isqrt(n: int) -> Optional[int]:
    if n < 0:
        return None
    r = int(n ** 0.5)
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r if r * r == n else None


def cmd_theta(obj, args):
    fx = _fixture(obj)
    N = args.order or fx.order
    surface = fx.surface
    charges = _charges(surface, args, 1)
    algebra = build_algebra(fx.diagram(N), fx.charge_bound, N, retry_seed=args.retry_seed)
    rows = []
    for p1 in charges:
        for p2 in charges:
            row = algebra.product(p1, p2)
            terms = []
            for p in sorted(row, key=lambda x: (x.a + x.b, x.chart, x.a, x.b)):
                for beta in sorted(row[p]):
                    c = row[p][beta]
                    item = {"p": format_point(surface, p), "class": surface.class_to_dict(beta), "q": c.to_json(), "text": format_coeff(c)}
                    value = _q_value(c, args.q_eval)
                    if value is not None:
                        item["value"] = value
                    terms.append(item)
            rows.append({"p1": format_point(surface, p1), "p2": format_point(surface, p2), "terms": terms})
    report = {"command": "theta", "fixture": fx.name, "order": N, "table": rows, "pass": True}
    return report, 0


def cmd_relations(obj, args):
    fx = _fixture(obj)
    if not fx.generators:
        raise InputError("the input names no generators")
    N = args.order or fx.relation_order
    diagram = fx.diagram(N)
    algebra = build_algebra(diagram, max(4, fx.charge_bound), N, retry_seed=args.retry_seed)
    rels = derive_relations(algebra, fx.generators)
    report = {"command": "relations", "fixture": fx.name, "order": N, "relations": [r.to_json() for r in rels]}
    if args.poisson:
        report["poisson"] = [r.to_json() for r in poisson_relations(diagram, fx.generators, N)]
    report["pass"] = True
    return report, 0


def cmd_check(obj, args):
    kind = _kind(obj)
    if kind == "table":
        surface = surface_from_json(obj["surface"])
        table = table_from_json(obj["table"], surface, int(obj.get("order", args.order or 3)))
        checks = {"weights": weight_check(table), "q_integrality": q_integrality(table)}
        N = table.order
        name = surface.name
    else:
        fx = _fixture(obj)
        N = args.order or fx.order
        diagram = fx.diagram(N)
        algebra = build_algebra(diagram, fx.charge_bound, N, retry_seed=args.retry_seed)
        table = algebra.table(_charges(fx.surface, args, fx.charge_bound))
        checks = {
            "consistency": consistency_check_on_B(diagram, order=N),
            "weights": weight_check(table),
            "q_integrality": q_integrality(table),
        }
        name = fx.name
    failed = [k for k, v in checks.items() if not v["pass"]]
    report = {"command": "check", "fixture": name, "order": N, "checks": checks, "pass": not failed}
    if failed:
        report["first_failure"] = {"check": failed[0], **checks[failed[0]]}
    return report, 0 if not failed else 1


HANDLERS = {
    "scatter": cmd_scatter,
    "canonical": cmd_canonical,
    "theta": cmd_theta,
    "relations": cmd_relations,
    "check": cmd_check,
}


# ---------------------------------------------------------------------------
# output


def render_text(report: dict) -> str:
    """Human-readable view of a JSON report."""
    cmd = report.get("command")
    lines = []
    if cmd == "error":
        return f"error: {report['message']}"
    if cmd == "scatter":
        lines.append(f"order {report['order']}: {len(report['diagram']['walls'])} walls, {len(report['added_walls'])} added")
        for w in report["added_walls"]:
            lines.append(f"  added wall {tuple(w['direction'])}: {w['f']}")
        lines.append(f"loop identity: {'pass' if report['loop_identity']['pass'] else 'FAIL'}")
    elif cmd == "canonical":
        lines.append(f"order {report['order']}: {len(report['diagram']['walls'])} walls")
        for x in report["rays"]:
            lines.append(f"  ray {x['ray']}: presentation {'pass' if x['pass'] else 'FAIL'}")
    elif cmd == "theta":
        for row in report["table"]:
            parts = []
            for t in row["terms"]:
                cls = "+".join(k if v == 1 else f"{v}{k}" for k, v in t["class"].items())
                mono = f"theta_{t['p']}" + (f"*z^{{{cls}}}" if cls else "")
                coeff = QScalar.from_json(t["q"])
                parts.append(mono if coeff == 1 else f"({format_coeff(coeff)})*{mono}")
            lines.append(f"theta_{row['p1']} * theta_{row['p2']} = {' + '.join(parts) if parts else '0'}")
    elif cmd == "relations":
        lines.extend(r["text"] for r in report["relations"])
        if "poisson" in report:
            lines.append("classical brackets:")
            lines.extend("  " + r["text"] for r in report["poisson"])
    elif cmd == "check":
        for k, v in report["checks"].items():
            lines.append(f"{k}: {'pass' if v['pass'] else 'FAIL'}")
        if "first_failure" in report:
            lines.append("first failure: " + json.dumps(report["first_failure"], sort_keys=True))
    return "\n".join(lines)


def _emit(report: dict, args) -> None:
    if args.format == "text":
        out = render_text(report) + "\n"
    else:
        out = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qscatter", description="Quantum scattering diagrams, broken lines and theta functions.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("input", help="JSON file or bundled fixture name")
    parser.add_argument("--order", type=_positive_int, default=None, help="truncation order N (class degree < N)")
    parser.add_argument("--charges", default=None, help='comma separated points, e.g. "v1,v2,(2,1)@0"')
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument("--retry-seed", type=int, default=0, help="seed for the generic-endpoint perturbation")
    parser.add_argument("--q-eval", type=Fraction, default=None, help="also print coefficient values at this q (display only)")
    parser.add_argument("--poisson", action="store_true", help="relations: add the classical brackets")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        obj = _read(args.input)
        report, code = HANDLERS[args.command](obj, args)
    except (InputError, SeedError, SurfaceError, FixtureError, DiagramError, QTorusError, NonGenerating, DegreeCapExceeded) as exc:
        sys.stderr.write(f"qscatter: {exc}\n")
        return 2
    except (KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"qscatter: malformed input: {exc}\n")
        return 2
    except (SearchExhausted, QArithmeticError) as exc:
        sys.stderr.write(f"qscatter: {exc}\n")
        return 1
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
