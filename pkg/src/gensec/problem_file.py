"""JSON problem files: schema validation and construction of ProblemSpec.

Example::

    {
      "dimension": 2,
      "f": {"affine": {"matrix": [[2, 1], [1, 2]], "offset": [-1, -1]}},
      "g": "none",
      "term": {"normal_cone_box": {"lower": [0, 0], "upper": [null, null]}},
      "set": {"box": {"lower": [0, 0], "upper": [1, 1]}},
      "known_solution": [0.3333333333333333, 0.3333333333333333],
      "lipschitz_L": 0.0
    }

``null`` (or the strings "inf" / "-inf") in a bound means unbounded.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from gensec import feasible_set as fs
from gensec import maps
from gensec import setvalued as sv
from gensec.errors import ProblemFileError
from gensec.solver import ProblemSpec

_NUM_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_BOUND_LIST = {
    "type": "array",
    "minItems": 1,
    "items": {"anyOf": [{"type": "number"}, {"type": "null"}, {"enum": ["inf", "-inf"]}]},
}
_MATRIX = {"type": "array", "minItems": 1, "items": _NUM_LIST}


def _obj(props, required=None):
    return {
        "type": "object",
        "properties": props,
        "required": list(required if required is not None else props),
        "additionalProperties": False,
    }


def _one_key(key, body):
    return _obj({key: body})


SET_SCHEMA = {
    "anyOf": [
        {"const": "whole"},
        _one_key("box", _obj({"lower": _BOUND_LIST, "upper": _BOUND_LIST})),
        _one_key("ball", _obj({"center": _NUM_LIST, "radius": {"type": "number", "exclusiveMinimum": 0}})),
        _one_key("simplex", _obj({"scale": {"type": "number", "exclusiveMinimum": 0}})),
        _one_key("polytope", _obj({"vertices": _MATRIX})),
    ]
}

PROBLEM_SCHEMA = _obj(
    {
        "name": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1},
        "f": {
            "anyOf": [
                _one_key("affine", _obj({"matrix": _MATRIX, "offset": _NUM_LIST})),
                _one_key("builtin", {"enum": sorted(maps.BUILTIN_F)}),
            ]
        },
        "g": {
            "anyOf": [
                {"const": "none"},
                _one_key("scaled_abs", _obj({"scale": {"type": "number"}})),
                _one_key("builtin", {"enum": sorted(maps.BUILTIN_G)}),
            ]
        },
        "term": {
            "anyOf": [
                {"const": "zero"},
                _one_key("normal_cone_box", _obj({"lower": _BOUND_LIST, "upper": _BOUND_LIST})),
                _one_key("product_cone", _obj({"s": {"type": "integer", "minimum": 0}})),
            ]
        },
        "set": SET_SCHEMA,
        "known_solution": _NUM_LIST,
        "lipschitz_L": {"type": "number", "minimum": 0},
        "dd_bound_M": {"type": "number", "minimum": 0},
    },
    required=["dimension", "f"],
)


def _bounds(values, default):
    out = []
    for v in values:
        if v is None:
            out.append(default)
        elif isinstance(v, str):
            out.append(float(v))
        else:
            out.append(float(v))
    return np.array(out)


def _check_len(field, vec, n):
    if len(vec) != n:
        raise ProblemFileError(f"{field}: expected {n} entries, got {len(vec)}")


def _validate(doc, schema, what):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.path), list(e.path)))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ProblemFileError(f"{what} invalid at '{where}': {err.message}")


def build_set(desc, n: int) -> fs.FeasibleSet:
    _validate(desc, SET_SCHEMA, "set")
    if desc == "whole":
        return fs.WholeSpace(n)
    (kind, body), = desc.items()
    try:
        if kind == "box":
            lo, up = _bounds(body["lower"], -np.inf), _bounds(body["upper"], np.inf)
            _check_len("set/box/lower", lo, n)
            _check_len("set/box/upper", up, n)
            return fs.Box(lo, up)
        if kind == "ball":
            _check_len("set/ball/center", body["center"], n)
            return fs.Ball(np.array(body["center"], float), float(body["radius"]))
        if kind == "simplex":
            return fs.Simplex(n, float(body["scale"]))
        V = np.array(body["vertices"], dtype=float)
        if V.ndim != 2 or V.shape[1] != n:
            raise ProblemFileError(f"set/polytope/vertices: every vertex needs {n} entries")
        return fs.Polytope(V)
    except ValueError as exc:
        raise ProblemFileError(f"set/{kind}: {exc}") from exc


def parse_set_argument(text: str, n: int) -> fs.FeasibleSet:
    """Inline JSON (or a bare name like ``whole``) or a path to a JSON file."""
    path = Path(text)
    if path.is_file():
        text = path.read_text()
    try:
        desc = json.loads(text)
    except json.JSONDecodeError:
        desc = text.strip()
    return build_set(desc, n)


def build_problem(doc: dict) -> ProblemSpec:
    _validate(doc, PROBLEM_SCHEMA, "problem file")
    n = doc["dimension"]

    (fkind, fbody), = doc["f"].items()
    if fkind == "affine":
        matrix = np.array(fbody["matrix"], dtype=float)
        if matrix.shape != (n, n):
            raise ProblemFileError(f"f/affine/matrix: expected shape {(n, n)}, got {matrix.shape}")
        _check_len("f/affine/offset", fbody["offset"], n)
        f_map = maps.Affine(matrix, np.array(fbody["offset"], dtype=float))
        f, jac = f_map, f_map.jacobian
    else:
        entry = maps.BUILTIN_F[fbody]
        if entry.dimension is not None and entry.dimension != n:
            raise ProblemFileError(f"f/builtin: '{fbody}' is defined for dimension {entry.dimension}")
        f, jac = entry.func, entry.jacobian

    g_desc = doc.get("g", "none")
    if g_desc == "none":
        g = maps.zero
    elif "scaled_abs" in g_desc:
        g = maps.ScaledAbs(float(g_desc["scaled_abs"]["scale"]))
    else:
        g = maps.BUILTIN_G[g_desc["builtin"]].func

    t_desc = doc.get("term", "zero")
    if t_desc == "zero":
        term = sv.Zero()
    elif "normal_cone_box" in t_desc:
        body = t_desc["normal_cone_box"]
        lo, up = _bounds(body["lower"], -np.inf), _bounds(body["upper"], np.inf)
        _check_len("term/normal_cone_box/lower", lo, n)
        _check_len("term/normal_cone_box/upper", up, n)
        if np.any(lo > up):
            raise ProblemFileError("term/normal_cone_box: lower must not exceed upper")
        term = sv.NormalConeBox(lo, up)
    else:
        s = t_desc["product_cone"]["s"]
        if s > n:
            raise ProblemFileError(f"term/product_cone/s: {s} exceeds dimension {n}")
        term = sv.ProductCone(s)

    set_ = build_set(doc.get("set", "whole"), n)
    x_star = doc.get("known_solution")
    if x_star is not None:
        _check_len("known_solution", x_star, n)
    try:
        return ProblemSpec(
            dimension=n,
            f=f,
            g=g,
            term=term,
            set=set_,
            analytic_jacobian_f=jac,
            known_solution=None if x_star is None else np.array(x_star, dtype=float),
            lipschitz_L=doc.get("lipschitz_L"),
            dd_bound_M=doc.get("dd_bound_M"),
            name=doc.get("name", ""),
        )
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from exc


def load_problem(path) -> ProblemSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a JSON object")
    return build_problem(doc)
