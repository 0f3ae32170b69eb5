import json

import numpy as np
import pytest

from ccvar.errors import InvalidDimensionError, ParseError
from ccvar.serialize import (SCHEMAS, RunManifest, load_schema, to_plain, validate,
                             vector_from_json, vector_to_json)


def test_vector_round_trip(rng):
    v = rng.normal(size=15) + 1j * rng.normal(size=15)
    obj = vector_to_json(v, 2, 6)
    assert list(obj)[:2] == ["[1,2]", "[1,3]"]
    validate(obj, "coefficient_vector")
    assert np.array_equal(vector_from_json(json.loads(json.dumps(obj)), 2, 6), v)


def test_vector_reference_fill_and_reals():
    v = vector_from_json({"[3,1]": 2.0, "[2,4]": [0.0, 1.5]}, 2, 4, reference=1.0)
    assert v[0] == 1 and v[1] == 2 and v[4] == 1.5j
    assert np.count_nonzero(v) == 3


@pytest.mark.parametrize("obj", [{"[1,5]": 1.0}, {"oops": 1.0}, {"[1,2]": "a"}, {"[1,2]": [1, 2, 3]}, [1]])
def test_vector_errors(obj):
    with pytest.raises(ParseError):
        vector_from_json(obj, 2, 4)


def test_vector_wrong_length():
    with pytest.raises(InvalidDimensionError):
        vector_to_json(np.zeros(5), 2, 4)


def test_manifest(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("abc")
    m = RunManifest("forward", {"d": 2, "sigma": (1,)}, 7, "0.1")
    m.add_input(p)
    m.finish(0, {"count": np.int64(3)})
    d = m.to_dict()
    assert d["inputs"][str(p)].startswith("ba7816bf")
    assert d["summary"]["count"] == 3 and d["parameters"]["sigma"] == [1]
    validate(d, "manifest")


def test_to_plain():
    assert to_plain({1: (np.float64(np.inf), np.bool_(True), 1 + 2j, np.arange(2))}) == \
        {"1": [None, True, [1.0, 2.0], [0, 1]]}


def test_all_schemas_load():
    import jsonschema
    for name in SCHEMAS:
        jsonschema.Draft202012Validator.check_schema(load_schema(name))
