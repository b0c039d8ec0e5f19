import json
import math

import numpy as np
import pytest

from singular_eig.output import dumps_csv, dumps_json, format_float


def test_format_float():
    assert format_float(0.1) == "1.0000000000000001e-01"
    assert format_float(-2) == "-2.0000000000000000e+00"
    assert format_float(math.nan) == "nan"
    assert format_float(-math.inf) == "-inf"
    assert float(format_float(1 / 3)) == 1 / 3


def test_json_round_trip_and_nulls():
    obj = {"a": np.float64(1.5), "b": [1, 2.5, np.int64(3)], "c": math.nan,
           "d": {"e": True, "f": None, "g": []}, "h": np.array([0.25, math.inf]),
           "i": [{"x": 1}]}
    text = dumps_json(obj)
    assert text.endswith("\n")
    back = json.loads(text)
    assert back["a"] == 1.5 and back["c"] is None
    assert back["h"] == [0.25, None]
    assert back["b"] == [1, 2.5, 3]
    assert back["d"] == {"e": True, "f": None, "g": []}
    assert '"b": [1, 2.5000000000000000e+00, 3]' in text


def test_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps_json({"x": object()})


def test_csv_cells():
    text = dumps_csv(["a", "b", "c"], [[1, 0.5, None], [True, "x", math.nan]])
    assert text == ("a,b,c\n1,5.0000000000000000e-01,\n"
                    "true,x,nan\n")
    with pytest.raises(ValueError):
        dumps_csv(["a"], [["x,y"]])
