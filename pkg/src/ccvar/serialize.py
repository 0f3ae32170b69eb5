"""JSON forms of coefficient vectors and run manifests, plus schema validation."""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .errors import InvalidDimensionError, ParseError
from .indexing import orbital_basis


def vector_to_json(vec, d: int, n: int) -> dict:
    """{"[1,2,4]": [re, im], ...} in the global order."""
    basis = orbital_basis(d, n)
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (basis.size,):
        raise InvalidDimensionError(f"vector has shape {vec.shape}, expected ({basis.size},)")
    return {json.dumps(list(I), separators=(",", ":")): [float(c.real), float(c.imag)]
            for I, c in zip(basis.sets, vec)}


def vector_from_json(obj: dict, d: int, n: int, reference: complex | None = None) -> np.ndarray:
    """Dense vector from the map form; missing entries are 0.

    ``reference`` fills position [d] when the map omits it (amplitude vectors
    usually do).  Values may be [re, im] pairs or plain reals.
    """
    basis = orbital_basis(d, n)
    out = np.zeros(basis.size, dtype=complex)
    if reference is not None:
        out[0] = reference
    if not isinstance(obj, dict):
        raise ParseError("coefficient vector must be a JSON object keyed by index sets")
    for key, val in obj.items():
        try:
            I = tuple(sorted(int(i) for i in json.loads(key)))
        except (json.JSONDecodeError, TypeError, ValueError):
            raise ParseError(f"bad index-set key {key!r}") from None
        if I not in basis.position:
            raise ParseError(f"index set {list(I)} is not a {d}-subset of [{n}]")
        if isinstance(val, (int, float)):
            out[basis.position[I]] = val
        elif isinstance(val, list) and len(val) == 2:
            out[basis.position[I]] = complex(float(val[0]), float(val[1]))
        else:
            raise ParseError(f"value for {key} must be a number or [re, im]")
    return out


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    version: str
    started: float = field(default_factory=time.time)
    wall_seconds: float | None = None
    exit_code: int | None = None
    summary: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)   # path -> sha256
    outputs: dict = field(default_factory=dict)

    def add_input(self, path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def finish(self, exit_code: int, summary: dict | None = None) -> None:
        self.wall_seconds = round(time.time() - self.started, 4)
        self.exit_code = exit_code
        if summary:
            self.summary.update(summary)

    def to_dict(self) -> dict:
        return to_plain(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def to_plain(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


SCHEMAS = ("coefficient_vector", "solution_set", "manifest", "variety", "degree",
           "ccdegree", "masterpoly", "spectrum", "selftest", "hamiltonian")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("ccvar.schemas").joinpath(f"{name}.json").read_text())


def validate(obj, name: str) -> None:
    """Raise jsonschema.ValidationError if ``obj`` does not match the shipped schema."""
    import jsonschema
    jsonschema.validate(obj, load_schema(name))
