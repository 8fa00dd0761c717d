"""Map families that can be described in JSON.

Expressions are small trees::

    3.5                       constant
    {"const": 3.5}            constant
    {"var": 2}                coordinate 2 of the (single) argument
    {"var": [1, 0]}           coordinate 0 of argument 1
    {"add": [e, ...]}         sum
    {"mul": [e, ...]}         product
    {"min": [e, ...]}         minimum
    {"max": [e, ...]}         maximum

Families (selected by ``"family"``):

* ``linear``: ``x -> A x + b``
* ``affine_saturated``: ``x -> clip(A x + b, lower, upper)``
* ``expression``: one expression per output coordinate
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .errors import SchemaError

_NARY = {
    "add": lambda vals: sum(vals),
    "mul": lambda vals: reduce(lambda a, b: a * b, vals),
    "min": min,
    "max": max,
}


@dataclass(frozen=True)
class Expr:
    op: str
    value: float = 0.0
    slot: int = 0
    coord: int = 0
    args: tuple["Expr", ...] = ()

    def __call__(self, args: Sequence[np.ndarray]) -> float:
        if self.op == "const":
            return self.value
        if self.op == "var":
            return float(args[self.slot][self.coord])
        return _NARY[self.op]([a(args) for a in self.args])


def parse_expr(node, slots: int, dim: int) -> Expr:
    """Parse and bounds-check an expression tree for ``slots`` arguments in ``R^dim``."""
    if isinstance(node, bool):
        raise SchemaError("booleans are not expressions")
    if isinstance(node, (int, float)):
        return Expr("const", float(node))
    if not isinstance(node, dict) or len(node) != 1:
        raise SchemaError(f"expression node must be a number or a one-key object, got {node!r}")
    (op, body), = node.items()
    if op == "const":
        if isinstance(body, bool) or not isinstance(body, (int, float)):
            raise SchemaError("const needs a number")
        return Expr("const", float(body))
    if op == "var":
        if isinstance(body, int) and not isinstance(body, bool):
            slot, coord = 0, body
        elif (isinstance(body, list) and len(body) == 2
              and all(isinstance(v, int) and not isinstance(v, bool) for v in body)):
            slot, coord = body
        else:
            raise SchemaError(f"var needs an index or [slot, index], got {body!r}")
        if not (0 <= slot < slots and 0 <= coord < dim):
            raise SchemaError(f"var {body!r} out of range for {slots} argument(s) in R^{dim}")
        return Expr("var", slot=slot, coord=coord)
    if op in _NARY:
        if not isinstance(body, list) or not body:
            raise SchemaError(f"{op} needs a nonempty list of operands")
        return Expr(op, args=tuple(parse_expr(b, slots, dim) for b in body))
    raise SchemaError(f"unknown expression operator {op!r}")


def compile_components(exprs: Sequence[Expr]) -> Callable[..., np.ndarray]:
    """Vector-valued function of ``len(slots)`` arguments from per-coordinate expressions."""

    def f(*args):
        arrs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in args]
        return np.array([e(arrs) for e in exprs])

    return f


def _matrix(raw, name: str) -> np.ndarray:
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SchemaError(f"{name} must be a square matrix")
    return a


def build_map(desc: dict, dim: int | None = None) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    """Selfmap of ``R^dim`` from a family description. Returns ``(map, dim)``."""
    family = desc.get("family")
    if family in ("linear", "affine_saturated"):
        a = _matrix(desc["A"], "A")
        b = np.asarray(desc["b"], dtype=float)
        n = a.shape[0]
        if b.shape != (n,):
            raise SchemaError(f"b must have length {n}")
        if family == "linear":
            return (lambda x: a @ x + b), n
        lo = np.asarray(desc.get("lower", [-np.inf] * n), dtype=float)
        hi = np.asarray(desc.get("upper", [np.inf] * n), dtype=float)
        if lo.shape != (n,) or hi.shape != (n,) or np.any(lo > hi):
            raise SchemaError("lower/upper must be length-n vectors with lower <= upper")
        return (lambda x: np.clip(a @ x + b, lo, hi)), n
    if family == "expression":
        comps = desc.get("components")
        if not isinstance(comps, list) or not comps:
            raise SchemaError("expression family needs a nonempty 'components' list")
        n = len(comps) if dim is None else dim
        if len(comps) != n:
            raise SchemaError(f"expected {n} components, got {len(comps)}")
        f = compile_components([parse_expr(c, 1, n) for c in comps])
        return (lambda x: f(x)), n
    raise SchemaError(f"unknown map family {family!r}; expected one of {sorted(FAMILIES)}")


FAMILIES = ("linear", "affine_saturated", "expression")
