"""Line-oriented instance files and JSON/CSV result records.

Instance file::

    fpn v1 p=3 n=2
    X: 1 2 5
    Y: 0 4
    Z: 3

Matched-collection file: same header, then one ``T: x y z`` line per triple.
Points are little-endian base-p indices.  ``#`` starts a comment.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .fpn import GroupParams
from .triangles import MatchedTriples, Triangle, TripleSystem

HEADER = re.compile(r"^fpn\s+v1\s+p=(\d+)\s+n=(\d+)\s*$")


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _ints(body: str, no: int) -> list[int]:
    try:
        return [int(tok) for tok in body.split()]
    except ValueError:
        raise ParseError(f"expected integers, got {body!r}", no) from None


def parse_instance(text: str) -> TripleSystem | MatchedTriples:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty instance file", 1)
    no, head = lines[0]
    m = HEADER.match(head)
    if not m:
        raise ParseError(f"bad header {head!r}; expected 'fpn v1 p=<p> n=<n>'", no)
    try:
        params = GroupParams(int(m.group(1)), int(m.group(2)))
    except ValidationError as e:
        raise ParseError(str(e), no) from None
    sets: dict[str, tuple[int, list[int]]] = {}
    triples = []
    for no, line in lines[1:]:
        tag, sep, body = line.partition(":")
        tag = tag.strip()
        if not sep or tag not in ("X", "Y", "Z", "T"):
            raise ParseError(f"unrecognised line {line!r}", no)
        vals = _ints(body, no)
        bad = [v for v in vals if not 0 <= v < params.N]
        if bad:
            raise ParseError(f"point {bad[0]} out of range [0, {params.N})", no)
        if tag == "T":
            if len(vals) != 3:
                raise ParseError("a T line needs exactly three points", no)
            triples.append((no, vals))
        else:
            if tag in sets:
                raise ParseError(f"duplicate {tag} line", no)
            sets[tag] = (no, vals)
    if triples and sets:
        raise ParseError("file mixes T lines with X/Y/Z lines", triples[0][0])
    if triples:
        out = []
        for no, (x, y, z) in triples:
            try:
                out.append(MatchedTriples(params, (Triangle(x, y, z),)).triples[0])
            except Exception:
                raise ParseError(f"triple {(x, y, z)} does not sum to zero", no) from None
        return MatchedTriples(params, tuple(out))
    missing = [r for r in "XYZ" if r not in sets]
    if missing:
        raise ParseError(f"missing {', '.join(missing)} line(s)", len(text.splitlines()) or 1)
    return TripleSystem.from_indices(params, *(sets[r][1] for r in "XYZ"))


def read_instance(path) -> TripleSystem | MatchedTriples:
    return parse_instance(Path(path).read_text())


def format_instance(obj: TripleSystem | MatchedTriples) -> str:
    p = obj.params
    lines = [f"fpn v1 p={p.p} n={p.n}"]
    if isinstance(obj, MatchedTriples):
        lines += [f"T: {t.x} {t.y} {t.z}" for t in obj.triples]
    else:
        for r, s in zip("XYZ", obj.sets):
            lines.append(f"{r}: " + " ".join(str(int(u)) for u in s.members) if s.size else f"{r}:")
    return "\n".join(lines) + "\n"


def write_instance(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_instance(obj))
    return path


def as_system(obj) -> TripleSystem:
    return obj.system() if isinstance(obj, MatchedTriples) else obj


def jsonable(value):
    """Convert to JSON types. Rationals become {numerator, denominator}; floats are left
    as floats (Python's repr round-trips exactly) except non-finite ones, which become strings."""
    if isinstance(value, Fraction):
        return {"numerator": value.numerator, "denominator": value.denominator}
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def csv_cell(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


@dataclass
class ExperimentRecord:
    command: str
    seed: int
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    wall_millis: int = 0

    def to_json(self) -> str:
        return json.dumps(jsonable({
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "outputs": self.outputs,
            "wall_millis": self.wall_millis,
        }), indent=2, sort_keys=True)


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([csv_cell(v) for v in row])
    return path
