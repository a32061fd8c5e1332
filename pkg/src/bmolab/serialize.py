"""Reading grid functions and partitions; writing JSON and CSV reports."""

from __future__ import annotations

import csv
import json
import os
from fractions import Fraction
from pathlib import Path

from .decomposition_geometry import TriPartition
from .errors import BmoLabError
from .grid_core import AxisCube, CellSet, GridFunction, GridSpec, Region, SpecialRectangle

__all__ = [
    "ParseError",
    "parse_number",
    "load_function",
    "dump_function",
    "load_partition",
    "parse_region",
    "region_to_json",
    "write_json",
    "write_csv",
    "to_jsonable",
]


class ParseError(BmoLabError, ValueError):
    """Malformed input file or argument."""


def parse_number(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact number: {text!r}") from exc


def _spec_from(obj) -> GridSpec:
    try:
        return GridSpec(int(obj["dim"]), int(obj["level"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("need integer 'dim' and 'level'") from exc


def load_function(path: str | Path) -> GridFunction:
    """JSON ``{dim, level, values: [...]}`` or CSV with one ``value`` per row (header ``dim,level`` line first)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
        if len(rows) < 2 or [c.strip() for c in rows[0][:2]] != ["dim", "level"]:
            raise ParseError("CSV must start with 'dim,level' followed by their values")
        spec = _spec_from({"dim": rows[1][0], "level": rows[1][1]})
        body = rows[2:]
        if body and body[0][0].strip() == "value":
            body = body[1:]
        values = [parse_number(r[0]) for r in body]
    else:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(obj, dict) or "values" not in obj:
            raise ParseError("JSON input needs 'dim', 'level' and 'values'")
        spec = _spec_from(obj)
        values = [parse_number(v) for v in obj["values"]]
    if len(values) != spec.cell_count:
        raise ParseError(f"expected {spec.cell_count} values, got {len(values)}")
    integer = all(v.denominator == 1 and v >= 0 for v in values)
    return GridFunction(spec, tuple(values), integer)


def dump_function(f: GridFunction, path: str | Path):
    write_json(path, {"dim": f.spec.dim, "level": f.spec.level, "values": [str(v) for v in f.values]})


def load_partition(path: str | Path) -> TriPartition:
    """JSON ``{dim, level, labels}`` (0 = G, 1 = E+, 2 = E-) or ``{dim, level, plus_hex, minus_hex}``."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read partition {path}: {exc}") from exc
    spec = _spec_from(obj)
    if "labels" in obj:
        labels = obj["labels"]
        if len(labels) != spec.cell_count or any(x not in (0, 1, 2) for x in labels):
            raise ParseError("labels must be one of 0, 1, 2 per cell")
        return TriPartition.from_labels(spec, labels)
    try:
        plus = CellSet.from_hex(spec, obj["plus_hex"])
        minus = CellSet.from_hex(spec, obj["minus_hex"])
    except (KeyError, ValueError) as exc:
        raise ParseError("need 'labels' or 'plus_hex' and 'minus_hex'") from exc
    return TriPartition(plus, minus, (plus | minus).complement())


def parse_region(text: str | None, dim: int) -> Region | None:
    """``level:c1,c2,...:s1,s2,...``; a single side makes a cube, otherwise a special rectangle."""
    if not text:
        return None
    try:
        lvl, corner, sides = text.split(":")
        corner = tuple(int(x) for x in corner.split(","))
        sides = tuple(int(x) for x in sides.split(","))
        level = int(lvl)
    except ValueError as exc:
        raise ParseError(f"region must look like level:c1,...:s1,...; got {text!r}") from exc
    if len(corner) != dim:
        raise ParseError(f"region corner has {len(corner)} coordinates, grid has {dim}")
    if len(sides) == 1 or len(set(sides)) == 1:
        return AxisCube(level, corner, sides[0])
    return SpecialRectangle(level, corner, sides)


def region_to_json(r: Region | None):
    if r is None:
        return None
    return {"type": type(r).__name__, "level": r.level, "corner": list(r.corner), "sides": list(r.sides)}


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if isinstance(obj, (AxisCube, SpecialRectangle)):
        return region_to_json(obj)
    return obj


def write_json(path: str | Path, obj) -> Path:
    """Sorted keys, trailing newline, atomic replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n")
    os.replace(tmp, path)
    return path


def write_csv(path: str | Path, rows: list[dict], columns: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = columns or (sorted({k for r in rows for k in r}) if rows else [])
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: to_jsonable(r.get(k)) for k in columns})
    return path
