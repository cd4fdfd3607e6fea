"""JSON documents for complexes, contact data, subdivisions and reports.

Every document carries ``schema_version``.  Output is written with sorted
keys and a fixed indent so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .complex import ComplexPoint, ConeComplex, FaceMap, from_fan
from .cone import Cone
from .contact import ContactComponent, DiscreteData, component
from .errors import FormatError
from .lattice import IntegerMatrix, LatticeVector
from .subdivision import PLDivisor, SubdivisionMap

SCHEMA_VERSION = 1


def to_jsonable(obj: Any) -> Any:
    """Convert library values into plain JSON values."""
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, IntegerMatrix):
        return obj.tolist()
    if isinstance(obj, LatticeVector):
        return list(obj)
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else str(obj)
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    return obj


def dumps(doc: Mapping) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write(path: str | Path, doc: Mapping) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def _field(doc: Mapping, key: str, where: str = "document"):
    if key not in doc:
        raise FormatError(f"{where} is missing {key!r}")
    return doc[key]


# -- complexes ----------------------------------------------------------


def complex_from_doc(doc: Mapping) -> ConeComplex:
    n = int(_field(doc, "ambient_rank"))
    mode = doc.get("mode", "fan")
    entries = _field(doc, "cones")
    ids = [str(_field(c, "id", "cone entry")) for c in entries]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise FormatError(f"duplicate cone ids {dup}")
    meta = doc.get("metadata") or {}
    if mode == "fan":
        if doc.get("face_maps"):
            raise FormatError("face_maps are only allowed in diagram mode")
        rays = [[list(r) for r in _field(c, "rays", "cone entry")] for c in entries]
        return from_fan(n, rays, ids, metadata=meta)
    if mode != "diagram":
        raise FormatError(f"unknown mode {mode!r}")
    cones = {}
    for cid, c in zip(ids, entries):
        cones[cid] = Cone([list(r) for r in c["rays"]], int(c.get("rank", n)))
    maps = []
    for fm in doc.get("face_maps", []):
        src, tgt = str(_field(fm, "from", "face map")), str(_field(fm, "to", "face map"))
        if src not in cones or tgt not in cones:
            raise FormatError(f"face map {src} -> {tgt} names an unknown cone")
        M = IntegerMatrix(_field(fm, "matrix", "face map"), cols=cones[src].ambient_rank)
        maps.append(FaceMap(src, tgt, M))
    return ConeComplex(cones, maps, mode="diagram", metadata=meta)


def complex_to_doc(X: ConeComplex) -> dict:
    if X.mode == "fan":
        ranks = {c.ambient_rank for c in X.cones.values()}
        n = ranks.pop() if ranks else 0
        cones = [{"id": cid, "rays": sorted(X.cones[cid].rays)} for cid in X.maximal_cones()]
        return {
            "schema_version": SCHEMA_VERSION,
            "ambient_rank": n,
            "mode": "fan",
            "cones": cones,
            "metadata": X.metadata,
        }
    n = max((c.ambient_rank for c in X.cones.values()), default=0)
    cones = [
        {"id": cid, "rank": c.ambient_rank, "rays": sorted(c.rays)} for cid, c in X.cones.items()
    ]
    maps = sorted(
        ({"from": fm.source, "to": fm.target, "matrix": fm.map.tolist()} for fm in X.face_maps),
        key=lambda d: (d["from"], d["to"], d["matrix"]),
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "ambient_rank": n,
        "mode": "diagram",
        "cones": cones,
        "face_maps": maps,
        "metadata": X.metadata,
    }


def load_complex(path: str | Path) -> ConeComplex:
    return complex_from_doc(read(path))


# -- subdivisions ---------------------------------------------------------


def charts_to_doc(f: SubdivisionMap) -> dict:
    return {
        t: [{"cone": s, "matrix": M.tolist()} for s, M in entries]
        for t, entries in sorted(f.charts.items())
    }


def charts_from_doc(doc: Mapping, source: ConeComplex, target: ConeComplex) -> dict:
    charts: dict[str, list] = {}
    for t, entries in doc.items():
        tid = target.resolve_id(str(t))
        out = charts.setdefault(tid, [])
        for e in entries:
            sid = source.resolve_id(str(_field(e, "cone", "chart entry")))
            cols = source.cones[sid].ambient_rank
            out.append((sid, IntegerMatrix(_field(e, "matrix", "chart entry"), cols=cols)))
    return charts


def subdivision_from_docs(source: ConeComplex, target: ConeComplex, assignment: Mapping) -> SubdivisionMap:
    """Accepts a bare ``{"charts": ...}`` document or a resolve report."""
    charts = charts_from_doc(_field(assignment, "charts", "assignment"), source, target)
    return SubdivisionMap(source, target, charts)


def history_to_doc(f: SubdivisionMap) -> list:
    return to_jsonable(f.history)


def multiplicity_trace(f: SubdivisionMap) -> list[list[int]]:
    steps = [h for h in f.history if h.get("phase") == "resolution"]
    if not steps:
        return []
    return [list(steps[0]["multiplicities_before"])] + [list(h["multiplicities"]) for h in steps]


def divisor_from_doc(entries) -> PLDivisor:
    return PLDivisor({ComplexPoint.from_json(e["ray"]): int(e["m"]) for e in entries})


# -- contact data ---------------------------------------------------------


def contact_data_from_doc(doc: Mapping, X: ConeComplex) -> DiscreteData:
    marks = []
    for m in _field(doc, "markings", "contact file"):
        cid = X.resolve_id(str(_field(m, "cone", "marking")))
        marks.append(component(X, (cid, _field(m, "point", "marking"))))
    genus = int(doc.get("genus", 0))
    if genus < 0:
        raise FormatError("genus must be non-negative")
    return DiscreteData(genus, tuple(marks), int(doc.get("base_degree", 0)))


def components_doc(comps: list[ContactComponent], bound: int) -> dict:
    return {"schema_version": SCHEMA_VERSION, "bound": bound, "components": comps}
