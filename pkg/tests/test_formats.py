import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from removal_lab.errors import ParseError
from removal_lab.formats import (
    ExperimentRecord,
    csv_cell,
    format_instance,
    jsonable,
    parse_instance,
    read_instance,
    write_csv,
    write_instance,
)
from removal_lab.fpn import GroupParams
from removal_lab.triangles import MatchedTriples, TripleSystem

from conftest import random_system


def test_parse_example():
    sys = parse_instance("fpn v1 p=3 n=2\n# comment\nX: 1 2 5\nY: 0 4   # trailing\nZ: 3\n")
    assert sys.params == GroupParams(3, 2)
    assert list(sys.X) == [1, 2, 5] and list(sys.Y) == [0, 4] and list(sys.Z) == [3]


def test_empty_role_line():
    sys = parse_instance("fpn v1 p=2 n=2\nX:\nY: 1\nZ: 1\n")
    assert sys.X.size == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 3), (3, 2), (5, 1), (2, 0)]), st.integers(0, 2**32 - 1))
def test_roundtrip_system(pn, seed):
    sys = random_system(*pn, seed)
    assert parse_instance(format_instance(sys)) == sys


def test_roundtrip_matched(tmp_path):
    mt = MatchedTriples(GroupParams(2, 2), ((0, 0, 0), (1, 2, 3)))
    path = write_instance(tmp_path / "sub" / "m.txt", mt)
    back = read_instance(path)
    assert isinstance(back, MatchedTriples) and back.triples == mt.triples


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("fpn v2 p=2 n=1\nX: 0\nY: 0\nZ: 0\n", 1),
        ("fpn v1 p=4 n=1\nX: 0\nY: 0\nZ: 0\n", 1),
        ("fpn v1 p=2 n=1\nX: 0\nY: 2\nZ: 0\n", 3),
        ("fpn v1 p=2 n=1\nX: 0\nY: a\nZ: 0\n", 3),
        ("fpn v1 p=2 n=1\nX: 0\nX: 1\nZ: 0\n", 3),
        ("fpn v1 p=2 n=1\nX: 0\nW: 1\n", 3),
        ("fpn v1 p=2 n=1\nX: 0\nY: 1\n", 3),
        ("fpn v1 p=3 n=1\nT: 1 1 0\n", 2),
        ("fpn v1 p=3 n=1\nT: 1 2\n", 2),
        ("fpn v1 p=3 n=1\nT: 1 2 0\nX: 1\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        parse_instance(text)
    assert e.value.line == line
    assert str(e.value).startswith(f"line {line}:")


def test_jsonable():
    assert jsonable(Fraction(3, 6)) == {"numerator": 1, "denominator": 2}
    assert jsonable(np.int64(5)) == 5 and isinstance(jsonable(np.int64(5)), int)
    assert jsonable(math.inf) == "inf" and jsonable(math.nan) == "nan"
    x = 0.1 + 0.2
    assert json.loads(json.dumps(jsonable(x))) == x
    assert jsonable({"a": (1, np.float64(2.5))}) == {"a": [1, 2.5]}
    with pytest.raises(TypeError):
        jsonable(object())


def test_csv_cells(tmp_path):
    assert csv_cell(Fraction(1, 3)) == "1/3"
    assert float(csv_cell(1 / 3)) == 1 / 3
    assert csv_cell(None) == ""
    path = write_csv(tmp_path / "t.csv", ["a", "b"], [(1, Fraction(2, 4))])
    assert path.read_text().splitlines() == ["a,b", "1,1/2"]


def test_record_json_is_sorted():
    rec = ExperimentRecord("count", 3, {"b": 1, "a": 2}, {"delta": Fraction(1, 4)}, 7)
    data = json.loads(rec.to_json())
    assert list(data) == sorted(data)
    assert data["outputs"]["delta"] == {"numerator": 1, "denominator": 4}
