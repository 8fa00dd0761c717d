"""Coupled and tripled fixed points as fixed points of an associated selfmap.

For ``F : X^3 -> X`` a tripled fixed point ``(b1, b2, b3)`` satisfies::

    b1 = F(b1, b2, b3),  b2 = F(b2, b1, b2),  b3 = F(b3, b2, b1)

which is ``b = T b`` for ``T x = (F(x1,x2,x3), F(x2,x1,x2), F(x3,x2,x1))``
on ``X^3`` ordered by ``x1 <= y1, x2 >= y2, x3 <= y3``. The coupled case
``F : X^2 -> X`` uses ``T(x, y) = (F(x, y), F(y, x))`` with directions
``(+1, -1)``. States are flat vectors of length ``slots * base_dim``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AlphaOutOfRange,
    InvalidAlpha,
    InvalidInput,
    NonpositiveAlpha,
    NotAscendingStart,
    RouteDisagreement,
)
from .nonneg_matrix import NonnegativeMatrix
from .perov import ProductSpace, SystemOfMaps, perov_solve
from .picard import OrderedProblem, PicardRun, l1_distance, picard_iterate

TRIPLED_PATTERN = ((0, 1, 2), (1, 0, 1), (2, 1, 0))
TRIPLED_DIRECTIONS = (1.0, -1.0, 1.0)
COUPLED_PATTERN = ((0, 1), (1, 0))
COUPLED_DIRECTIONS = (1.0, -1.0)


class MonotonicityWarning(RuntimeWarning):
    pass


def tripled_matrix(alphas) -> NonnegativeMatrix:
    """Rows ``(a1, a2, a3)``, ``(a2, a1 + a3, 0)``, ``(a3, a2, a1)``; every row sums to ``a1 + a2 + a3``."""
    a1, a2, a3 = (float(a) for a in alphas)
    if min(a1, a2, a3) <= 0:
        raise NonpositiveAlpha(f"tripled contraction constants must be positive, got {tuple(alphas)}")
    return NonnegativeMatrix([[a1, a2, a3], [a2, a1 + a3, 0.0], [a3, a2, a1]])


def coupled_matrix(alpha: float) -> NonnegativeMatrix:
    if not (0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"coupled alpha must lie in (0, 1), got {alpha}")
    h = alpha / 2.0
    return NonnegativeMatrix([[h, h], [h, h]])


def _blocks(x, slots: int, m: int) -> list[np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if x.size != slots * m:
        raise InvalidInput(f"state of length {x.size}, expected {slots} blocks of {m}")
    return [x[i * m:(i + 1) * m] for i in range(slots)]


def _associated(F: Callable, pattern, m: int) -> Callable[[np.ndarray], np.ndarray]:
    slots = len(pattern)

    def T(x):
        b = _blocks(x, slots, m)
        return np.concatenate([np.atleast_1d(np.asarray(F(*(b[j] for j in row)), dtype=float)).ravel()
                               for row in pattern])

    return T


def tripled_associated_map(F: Callable, base_dim: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    return _associated(F, TRIPLED_PATTERN, base_dim)


def coupled_associated_map(F: Callable, base_dim: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    return _associated(F, COUPLED_PATTERN, base_dim)


def _mixed_leq(x, y, directions, m: int) -> bool:
    bx, by = _blocks(x, len(directions), m), _blocks(y, len(directions), m)
    return all(np.all(s * (v - u) >= 0) for s, u, v in zip(directions, bx, by))


def tripled_order(x, y, base_dim: int = 1) -> bool:
    return _mixed_leq(x, y, TRIPLED_DIRECTIONS, base_dim)


def coupled_order(x, y, base_dim: int = 1) -> bool:
    return _mixed_leq(x, y, COUPLED_DIRECTIONS, base_dim)


def max_metric(x, y, base_dim: int = 1, d: Callable = l1_distance, slots: int = 3) -> float:
    """``max_i d(x_i, y_i)`` over the blocks."""
    return max(d(u, v) for u, v in zip(_blocks(x, slots, base_dim), _blocks(y, slots, base_dim)))


@dataclass
class TripledProblem:
    """``F`` with contraction constants and a start ``a`` satisfying ``a <= T a``.

    Use :meth:`coupled` for two-argument maps.
    """

    F: Callable
    alphas: tuple[float, ...]
    start: np.ndarray
    base_dim: int = 1
    monotone_declared: bool = True
    pattern: tuple = TRIPLED_PATTERN
    directions: tuple = TRIPLED_DIRECTIONS
    base_metric: Callable = l1_distance

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        if len(self.alphas) != self.slots:
            raise InvalidInput(f"expected {self.slots} contraction constants")
        if min(self.alphas) <= 0:
            raise NonpositiveAlpha(f"contraction constants must be positive, got {self.alphas}")
        if not self.alpha < 1.0:
            raise InvalidAlpha(f"contraction constants sum to {self.alpha}, need < 1")
        self.start = np.asarray(self.start, dtype=float).ravel()
        if self.start.size != self.slots * self.base_dim:
            raise InvalidInput(f"start must have {self.slots} blocks of length {self.base_dim}")
        if not self.leq(self.start, self.selfmap(self.start)):
            raise NotAscendingStart("start point violates the mixed-order start condition")

    @classmethod
    def coupled(cls, F: Callable, alpha: float, start, base_dim: int = 1,
                monotone_declared: bool = True) -> "TripledProblem":
        if not (0.0 < alpha < 1.0):
            raise AlphaOutOfRange(f"coupled alpha must lie in (0, 1), got {alpha}")
        return cls(F, (alpha / 2.0, alpha / 2.0), start, base_dim, monotone_declared,
                   COUPLED_PATTERN, COUPLED_DIRECTIONS)

    @property
    def slots(self) -> int:
        return len(self.pattern)

    @property
    def is_coupled(self) -> bool:
        return self.slots == 2

    @property
    def alpha(self) -> float:
        return sum(self.alphas)

    @property
    def matrix(self) -> NonnegativeMatrix:
        return coupled_matrix(self.alpha) if self.is_coupled else tripled_matrix(self.alphas)

    @property
    def space(self) -> ProductSpace:
        m = self.base_dim
        return ProductSpace((m,) * self.slots, [np.full(m, s) for s in self.directions],
                            [self.base_metric] * self.slots)

    @property
    def order(self) -> np.ndarray:
        return np.repeat(np.asarray(self.directions), self.base_dim)

    def selfmap(self, x) -> np.ndarray:
        return _associated(self.F, self.pattern, self.base_dim)(x)

    def leq(self, x, y) -> bool:
        return _mixed_leq(x, y, self.directions, self.base_dim)

    def blocks(self, x) -> list[np.ndarray]:
        return _blocks(x, self.slots, self.base_dim)

    def system(self) -> SystemOfMaps:
        m = self.base_dim
        comps = []
        for i, row in enumerate(self.pattern):
            comps.append(lambda x, row=row: np.atleast_1d(
                np.asarray(self.F(*(x[j * m:(j + 1) * m] for j in row)), dtype=float)))
        return SystemOfMaps(self.space, comps, self.start)

    def residuals(self, b) -> list[float]:
        """``d(b_i, F(pattern_i(b)))`` for each slot."""
        tb = self.selfmap(b)
        return [self.base_metric(u, v) for u, v in zip(self.blocks(b), self.blocks(tb))]

    def max_metric(self, x, y) -> float:
        return max_metric(x, y, self.base_dim, self.base_metric, self.slots)


def check_mixed_monotone(p: TripledProblem, pairs) -> list[int]:
    """Indices of sampled pairs ``x <= y`` with ``T x <= T y`` failing; warns if any."""
    bad = []
    for i, (x, y) in enumerate(pairs):
        if not p.leq(x, y):
            continue
        if not p.leq(p.selfmap(x), p.selfmap(y)):
            bad.append(i)
    if bad and p.monotone_declared:
        warnings.warn(f"declared mixed monotone map failed on {len(bad)} sampled pair(s)",
                      MonotonicityWarning, stacklevel=2)
    return bad


@dataclass
class TripledResult:
    run: PicardRun
    residuals: list[float]
    route: str
    cross_run: PicardRun | None = None
    cross_residuals: list[float] | None = None
    route_gap: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def fixed_point(self) -> np.ndarray | None:
        return self.run.fixed_point


def _solve_vector(p: TripledProblem, tol, max_iter) -> PicardRun:
    return perov_solve(p.system(), p.matrix, tol, max_iter)


def _solve_max_metric(p: TripledProblem, tol, max_iter) -> PicardRun:
    problem = OrderedProblem(p.selfmap, p.start, p.alpha, order=p.order, metric=p.max_metric)
    return picard_iterate(problem, tol, max_iter)


ROUTES = ("vector", "max_metric", "both")


def solve_tripled(p: TripledProblem, tol: float = 1e-10, max_iter: int = 1_000_000,
                  route: str = "vector") -> TripledResult:
    """Solve through the product/Perov pipeline (``vector``), the max-metric
    scalar contraction (``max_metric``), or both with a cross-check.

    In ``both`` mode the vector route is primary and the routes must agree
    within ``20 * tol`` (max-abs difference) or :class:`RouteDisagreement`
    is raised.
    """
    if route not in ROUTES:
        raise InvalidInput(f"route must be one of {ROUTES}, got {route!r}")
    if route == "max_metric":
        run = _solve_max_metric(p, tol, max_iter)
        return TripledResult(run, p.residuals(run.fixed_point), route)
    run = _solve_vector(p, tol, max_iter)
    res = TripledResult(run, p.residuals(run.fixed_point), route)
    if route == "both":
        other = _solve_max_metric(p, tol, max_iter)
        gap = float(np.max(np.abs(run.fixed_point - other.fixed_point)))
        res.cross_run, res.cross_residuals, res.route_gap = other, p.residuals(other.fixed_point), gap
        if gap > 20 * tol:
            raise RouteDisagreement(f"vector and max-metric routes differ by {gap:.3g} > {20 * tol:.3g}")
    return res
