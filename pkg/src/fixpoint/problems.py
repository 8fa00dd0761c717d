"""Problem files: parsing, schema validation and construction of solver inputs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .coupled_tripled import TripledProblem
from .errors import ParseError, SchemaError
from .maps import build_map, compile_components, parse_expr
from .nonneg_matrix import NonnegativeMatrix
from .perov import ProductSpace, SystemOfMaps, linear_system

KINDS = ("matrix", "linear_system", "tripled", "coupled", "system")
DEFAULT_OPTIONS = {"tol": 1e-10, "max_iter": 1_000_000, "route": "vector", "output": None}


def load_schema(name: str) -> dict:
    return json.loads(resources.files("fixpoint").joinpath("schemas", name).read_text())


@dataclass
class ProblemFile:
    kind: str
    payload: dict
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "options": self.options}


def parse_problem_text(text: str) -> ProblemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return parse_problem(doc)


def parse_problem(doc) -> ProblemFile:
    try:
        jsonschema.validate(doc, load_schema("problem.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"problem file invalid at {where}: {exc.message}") from None
    options = dict(DEFAULT_OPTIONS)
    options.update(doc.get("options", {}))
    pf = ProblemFile(doc["kind"], doc["payload"], options)
    # Build once so semantic errors (bad expressions, shapes) surface at ingest.
    build(pf)
    return pf


def read_problem(path) -> ProblemFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem_text(text)


def matrix_from_json(raw) -> NonnegativeMatrix:
    if isinstance(raw, dict):
        return NonnegativeMatrix.from_dict(raw)
    return NonnegativeMatrix(raw)


def _function_of_slots(raw, slots: int, m: int):
    exprs = raw if isinstance(raw, list) else [raw]
    if len(exprs) != m:
        raise SchemaError(f"F needs {m} component expression(s), got {len(exprs)}")
    f = compile_components([parse_expr(e, slots, m) for e in exprs])
    return lambda *args: f(*args)


def build(pf: ProblemFile):
    """Solver input for a problem file: a matrix, a ``(SystemOfMaps, matrix)`` pair or a :class:`TripledProblem`."""
    p = pf.payload
    try:
        if pf.kind == "matrix":
            return matrix_from_json(p)
        if pf.kind == "linear_system":
            A = matrix_from_json(p["A"])
            return linear_system(A, p["b"], p.get("start"), p.get("order")), A
        if pf.kind == "system":
            A = matrix_from_json(p["contraction"])
            T, n = build_map(p["map"], A.n)
            if n != A.n:
                raise SchemaError(f"map acts on R^{n} but the contraction matrix is {A.n}x{A.n}")
            space = ProductSpace.coordinates(n, p.get("order"))
            comps = [(lambda x, i=i: T(x)[i]) for i in range(n)]
            return SystemOfMaps(space, comps, p.get("start", [0.0] * n)), A
        m = int(p.get("base_dim", 1))
        if pf.kind == "tripled":
            F = _function_of_slots(p["F"], 3, m)
            return TripledProblem(F, p["alphas"], np.asarray(p["start"], dtype=float), m,
                                  bool(p.get("monotone", True)))
        if pf.kind == "coupled":
            F = _function_of_slots(p["F"], 2, m)
            return TripledProblem.coupled(F, p["alpha"], np.asarray(p["start"], dtype=float), m,
                                          bool(p.get("monotone", True)))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad {pf.kind} payload: {exc}") from None
    raise SchemaError(f"unknown kind {pf.kind!r}")
