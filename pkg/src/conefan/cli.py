"""The ``conefan`` command line.

Exit codes: 0 success, 1 domain error, 2 usage error, 3 overflow or
resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict

from . import io
from .complex import ComplexPoint, ConeComplex
from .contact import contact_components, lift_discrete_data
from .errors import ConeFanError, FormatError, LatticeOverflow, ResourceCap
from .lattice import LatticeVector
from .subdivision import (
    ample_coefficients,
    barycentric,
    is_subdivision,
    resolve,
    star_subdivide,
)

EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _emit(doc, path: str | None) -> None:
    if path:
        io.write(path, doc)
    else:
        sys.stdout.write(io.dumps(doc))


def _parse_star(spec: str) -> tuple[str, LatticeVector]:
    body = spec[2:] if spec.startswith("x=") else spec
    coords, sep, cone = body.rpartition("@")
    if not sep or not coords or not cone:
        raise argparse.ArgumentTypeError(f"expected x=<coords>@<cone>, got {spec!r}")
    try:
        return cone, LatticeVector(int(c) for c in coords.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coordinates in {spec!r}") from None


def resolve_report(X: ConeComplex, f) -> dict:
    Y = f.source
    return {
        "schema_version": io.SCHEMA_VERSION,
        "command": "resolve",
        "target": io.complex_to_doc(X),
        "source": io.complex_to_doc(Y),
        "charts": io.charts_to_doc(f),
        "history": io.history_to_doc(f),
        "S": Y.rays(),
        "S_prime": f.exceptional_rays,
        "multiplicity_trace": io.multiplicity_trace(f),
        "ample_coefficients": ample_coefficients(f),
        "boundary_labeling": Y.boundary_map(),
    }


# -- subcommands --------------------------------------------------------


def cmd_validate(args) -> int:
    X = io.load_complex(args.fan)
    report = X.validate()
    for d in report.diagnostics:
        print(d, file=sys.stderr)
    _emit(
        {
            "schema_version": io.SCHEMA_VERSION,
            "valid": report.ok,
            "mode": X.mode,
            "cones": len(X.cones),
            "diagnostics": [str(d) for d in report.diagnostics],
        },
        None,
    )
    return 0 if report.ok else EXIT_DOMAIN


def cmd_resolve(args) -> int:
    X = io.load_complex(args.fan)
    f = resolve(X, barycentric_pass=args.barycentric_pass)
    report = resolve_report(X, f)
    if args.out:
        io.write(args.out, io.complex_to_doc(f.source))
    if args.report or not args.out:
        _emit(report, args.report)
    return 0


def cmd_subdivide(args) -> int:
    X = io.load_complex(args.fan)
    if args.barycentric:
        f = barycentric(X)
    else:
        cone, p = args.star
        f = star_subdivide(X, (X.resolve_id(cone), p))
    _emit(io.complex_to_doc(f.source), args.out)
    if args.report:
        io.write(
            args.report,
            {
                "schema_version": io.SCHEMA_VERSION,
                "command": "subdivide",
                "target": io.complex_to_doc(X),
                "source": io.complex_to_doc(f.source),
                "charts": io.charts_to_doc(f),
                "history": io.history_to_doc(f),
                "S_prime": f.exceptional_rays,
                "ample_coefficients": ample_coefficients(f),
            },
        )
    return 0


def cmd_check_subdivision(args) -> int:
    Y = io.load_complex(args.source)
    X = io.load_complex(args.target)
    f = io.subdivision_from_docs(Y, X, io.read(args.assignment))
    cert = is_subdivision(f, bound=args.bound)
    _emit({"schema_version": io.SCHEMA_VERSION, **cert.to_json()}, None)
    if not cert.ok:
        print(f"not a subdivision: {cert.reason}", file=sys.stderr)
    return 0 if cert.ok else EXIT_DOMAIN


def cmd_contacts(args) -> int:
    X = io.load_complex(args.fan)
    comps = contact_components(X, args.bound)
    _emit(io.components_doc(comps, args.bound), args.out)
    return 0


def cmd_degree(args) -> int:
    X = io.load_complex(args.fan)
    report = io.read(args.subdivision)
    if "target" in report:
        claimed = io.complex_from_doc(report["target"])
        if claimed.canonical_form() != X.canonical_form():
            raise FormatError("the subdivision report was computed for a different complex")
    Y = io.complex_from_doc(io._field(report, "source", "subdivision report"))
    f = io.subdivision_from_docs(Y, X, report)
    m = io.divisor_from_doc(io._field(report, "ample_coefficients", "subdivision report"))
    gamma = io.contact_data_from_doc(io.read(args.contacts), X)
    lifted = lift_discrete_data(f, gamma, m)
    _emit({"schema_version": io.SCHEMA_VERSION, **lifted.to_json()}, args.out)
    return 0


def _dot_quote(s: str) -> str:
    return json.dumps(s)


def dot_graph(X: ConeComplex) -> str:
    """Face-lattice graph: one node per cone orbit, one edge per face map."""
    parent = {c: c for c in X.cones}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for m in X.groupoid.morphisms.values():
        if X.cones[m.source].dim == X.cones[m.target].dim:
            a, b = find(m.source), find(m.target)
            if a != b:
                parent[max(a, b)] = min(a, b)
    members = defaultdict(list)
    for c in X.cones:
        members[find(c)].append(c)
    lines = ["digraph conefan {", "  rankdir=BT;"]
    for rep in sorted(members):
        c = X.cones[rep]
        label = f"{rep}\\ndim {c.dim}\\n" + " ".join(
            "(" + ",".join(map(str, r)) + ")" for r in c.rays
        )
        if len(members[rep]) > 1:
            label += "\\n~ " + " ".join(sorted(members[rep])[1:])
        lines.append(f"  {_dot_quote(rep)} [label=\"{label}\"];")
    edges = []
    for fm in X.face_maps:
        a, b = find(fm.source), find(fm.target)
        gap = X.cones[fm.target].dim - X.cones[fm.source].dim
        if X.mode == "fan" and gap != 1:
            continue
        style = ' [style=dashed, label="aut"]' if gap == 0 else ""
        edges.append(f"  {_dot_quote(a)} -> {_dot_quote(b)}{style};")
    lines.extend(sorted(edges))
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_emit_dot(args) -> int:
    X = io.load_complex(args.fan)
    text = dot_graph(X)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# -- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conefan", description="Cone complexes, subdivisions and contact orders.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a fan or diagram file")
    s.add_argument("fan")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("resolve", help="smooth subdivision with every vector stable")
    s.add_argument("fan")
    s.add_argument("--out", help="write the resolved complex here")
    s.add_argument("--report", help="write the resolution report here")
    s.add_argument("--barycentric-pass", choices=["auto", "always", "never"], default="auto")
    s.set_defaults(func=cmd_resolve)

    s = sub.add_parser("subdivide", help="one star or barycentric subdivision")
    s.add_argument("fan")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--star", type=_parse_star, metavar="x=COORDS@CONE")
    g.add_argument("--barycentric", action="store_true")
    s.add_argument("--out")
    s.add_argument("--report", help="also write charts and history here")
    s.set_defaults(func=cmd_subdivide)

    s = sub.add_parser("check-subdivision", help="test whether an assignment is a subdivision")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("assignment")
    s.add_argument("--bound", type=int, default=8)
    s.set_defaults(func=cmd_check_subdivision)

    s = sub.add_parser("contacts", help="contact components with their bands")
    s.add_argument("fan")
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_contacts)

    s = sub.add_parser("degree", help="degree_L and degree_total of lifted contact data")
    s.add_argument("fan")
    s.add_argument("contacts")
    s.add_argument("--subdivision", required=True, help="report from resolve or subdivide")
    s.add_argument("--out")
    s.set_defaults(func=cmd_degree)

    s = sub.add_parser("emit-dot", help="face-lattice graph in DOT")
    s.add_argument("fan")
    s.add_argument("--out")
    s.set_defaults(func=cmd_emit_dot)
    return p


def _error(exc: BaseException) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    w = getattr(exc, "witness", None)
    if isinstance(w, ComplexPoint):
        doc["witness"] = w.to_json()
    return doc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "bound", 1) < 1:
        parser.error("--bound must be at least 1")
    try:
        return args.func(args)
    except (LatticeOverflow, ResourceCap) as e:
        print(json.dumps(_error(e), sort_keys=True), file=sys.stderr)
        return EXIT_RESOURCE
    except (ConeFanError, OSError) as e:
        print(json.dumps(_error(e), sort_keys=True), file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
