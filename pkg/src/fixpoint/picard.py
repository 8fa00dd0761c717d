"""Picard iteration for monotone contractions on ordered finite-dimensional spaces.

States are flat float vectors. The order on ``R^dim`` is given by direction
flags: ``x <= y`` iff ``flag_i * (y_i - x_i) >= 0`` for every coordinate,
so ``+1`` is the usual order and ``-1`` its reverse.

The guarantees below hold when the space is complete for ascending Cauchy
sequences and limits of ascending sequences are upper bounds of them. Both
hold for ``R^dim`` with direction-flag orders; for a user metric they are the
caller's obligation.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    CoincidentPair,
    ContractionViolated,
    IncomparablePair,
    InvalidAlpha,
    InvalidInput,
    InvalidMetric,
    InvalidTolerance,
    MaxIterExceeded,
    NotAscending,
    NotAscendingStart,
)

log = logging.getLogger(__name__)

Map = Callable[[np.ndarray], np.ndarray]
Metric = Callable[[np.ndarray, np.ndarray], float]

CONTRACTION_SLACK = 1e-9
_ROUNDING = 64 * np.finfo(float).eps


class OrderWarning(RuntimeWarning):
    pass


def l1_distance(x, y) -> float:
    return float(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)).sum())


def normalize_order(order, dim: int) -> np.ndarray:
    if order is None:
        return np.ones(dim)
    flags = np.asarray(order, dtype=float).ravel()
    if flags.size == 1 and dim != 1:
        flags = np.full(dim, flags[0])
    if flags.shape != (dim,) or not np.all(np.isin(flags, (-1.0, 1.0))):
        raise InvalidInput(f"order must be {dim} flags in {{+1, -1}}")
    return flags


def leq(x, y, order) -> bool:
    """``x <= y`` under the direction-flag order."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return bool(np.all(np.asarray(order) * (y - x) >= 0))


def comparable(x, y, order) -> bool:
    return leq(x, y, order) or leq(y, x, order)


@dataclass
class OrderedProblem:
    """A monotone selfmap of ``R^dim`` with an asserted contraction factor.

    The start point must satisfy ``start <= map(start)``; this is checked here.

    ``increment`` is optional: a linear map ``L`` with ``T(x + h) - T(x) = L h``
    (affine ``T``). When given, the iteration propagates steps as
    ``h_{n+1} = L h_n`` instead of differencing nearly equal iterates, and
    ``metric`` must be translation invariant.
    """

    map: Map
    start: np.ndarray
    alpha: float
    order: np.ndarray | None = None
    metric: Metric | None = None
    increment: Map | None = None

    def __post_init__(self):
        self.start = np.atleast_1d(np.asarray(self.start, dtype=float)).ravel()
        if not (0.0 < self.alpha < 1.0):
            raise InvalidAlpha(f"alpha must lie in (0, 1), got {self.alpha}")
        self.order = normalize_order(self.order, self.dim)
        if self.metric is None:
            self.metric = l1_distance
        t0 = self.apply(self.start)
        if t0.shape != self.start.shape:
            raise InvalidInput(f"map returned shape {t0.shape} for a state of shape {self.start.shape}")
        if not leq(self.start, t0, self.order):
            raise NotAscendingStart("start point is not below its image")

    @property
    def dim(self) -> int:
        return self.start.size

    def apply(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.map(x), dtype=float)).ravel()


@dataclass
class PicardRun:
    """Trace of a Picard iteration.

    ``residuals[n] = d(x_n, x_{n+1})``; ``a_priori[n]`` and ``a_posteriori[n]``
    both bound ``d(x_n, x*)``. Each includes a one-step rounding allowance
    ``64 eps (1 + d(x_n, 0)) / (1 - alpha)`` so that it stays an upper bound
    for computed iterates, where the exact-arithmetic bound is often attained.
    """

    iterates: list[np.ndarray]
    residuals: list[float]
    a_priori: list[float]
    a_posteriori: list[float]
    ascending: list[bool]
    alpha: float
    tol: float
    converged: bool = False
    fixed_point: np.ndarray | None = None
    termination: str = "running"
    vector_residuals: list[np.ndarray] | None = None
    extras: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def to_dict(self, trace_every: int = 1) -> dict:
        k = max(1, int(trace_every))
        idx = list(range(0, len(self.iterates), k))
        if idx[-1] != len(self.iterates) - 1:
            idx.append(len(self.iterates) - 1)
        out = {
            "termination": self.termination,
            "converged": self.converged,
            "steps": self.steps,
            "alpha": self.alpha,
            "tol": self.tol,
            "fixed_point": None if self.fixed_point is None else self.fixed_point.tolist(),
            "trace_every": k,
            "trace_index": idx,
            "iterates": [self.iterates[i].tolist() for i in idx],
            "residuals": list(self.residuals),
            "a_priori": list(self.a_priori),
            "a_posteriori": list(self.a_posteriori),
            "ascending": all(self.ascending),
            "final_residual": self.extras.get("final_residual"),
        }
        if self.vector_residuals is not None:
            out["vector_residuals"] = [np.asarray(v).tolist() for v in self.vector_residuals]
        return out


def residual_bounds(alpha: float, d01: float, n: int) -> tuple[float, float]:
    """``(alpha^n d01 / (1 - alpha), alpha / (1 - alpha))``: the a-priori distance
    bound after ``n`` steps and the factor turning the last step length into the
    a-posteriori bound."""
    if not (0.0 < alpha < 1.0):
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    if d01 < 0:
        raise InvalidInput("d01 must be nonnegative")
    return alpha ** n * d01 / (1.0 - alpha), alpha / (1.0 - alpha)


def _spot_check_metric(metric: Metric, x, y):
    if metric(x, x) != 0.0 or metric(y, y) != 0.0:
        raise InvalidMetric("metric is not zero on the diagonal")
    a, b = metric(x, y), metric(y, x)
    if not math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0) or a < 0:
        raise InvalidMetric("metric is not symmetric and nonnegative")


def picard_iterate(problem: OrderedProblem, tol: float = 1e-10, max_iter: int = 1_000_000,
                   require_ascending: bool = False) -> PicardRun:
    """Iterate ``x_{n+1} = T x_n`` until the a-posteriori bound drops to ``tol``.

    Raises :class:`ContractionViolated` as soon as a step grows faster than
    the asserted ``alpha`` allows, :class:`MaxIterExceeded` (with the partial
    run attached) when ``max_iter`` steps do not suffice.
    """
    if not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InvalidInput("max_iter must be at least 1")
    T, d, alpha, order = problem.apply, problem.metric, problem.alpha, problem.order
    q = 1.0 - alpha

    x = problem.start
    tx = T(x)
    _spot_check_metric(d, x, tx)
    r = d(x, tx)
    d01 = r
    fuzz0 = _ROUNDING * (1.0 + d(x, np.zeros_like(x)))
    run = PicardRun([x], [r], [(r + fuzz0) / q], [(r + fuzz0) / q], [], alpha, tol)
    if r == 0.0:
        run.converged, run.fixed_point, run.termination = True, x, "converged"
        return run

    inc = problem.increment
    if inc is not None:
        zero = np.zeros_like(x)
        step = tx - x
        comp = np.zeros_like(x)  # Neumaier compensation for the running sum
        hi = x.copy()

    warned = False
    n = 0
    while True:
        if n >= max_iter:
            run.termination = "max_iter"
            raise MaxIterExceeded(f"no convergence within {max_iter} steps", run)
        if inc is None:
            x_next = tx
        else:
            t = hi + step
            big = np.abs(hi) >= np.abs(step)
            comp += np.where(big, (hi - t) + step, (step - t) + hi)
            hi = t
            x_next = hi + comp
        n += 1
        up = leq(x, x_next, order)
        run.ascending.append(up)
        if not up:
            if require_ascending:
                raise NotAscending(f"iterate {n} is not above iterate {n - 1}")
            if not warned:
                warnings.warn(f"iterate {n} is not above iterate {n - 1}", OrderWarning, stacklevel=2)
                warned = True
        if inc is None:
            tx_next = T(x_next)
            r_next = d(x_next, tx_next)
        else:
            step = np.asarray(inc(step), dtype=float)
            r_next = d(zero, step)
        floor = _ROUNDING * (1.0 + d(x_next, np.zeros_like(x_next)))
        if r_next > alpha * r * (1.0 + CONTRACTION_SLACK) + floor:
            raise ContractionViolated(
                f"step {n - 1}: d(x_{n}, x_{n + 1}) = {r_next:.6g} exceeds "
                f"alpha * d(x_{n - 1}, x_{n}) = {alpha * r:.6g}",
                index=n - 1,
            )
        run.iterates.append(x_next)
        run.residuals.append(r_next)
        # bounds carry one step of evaluation rounding; stopping uses the exact-arithmetic part
        run.a_priori.append((alpha ** n * d01 + floor) / q)
        run.a_posteriori.append((alpha * r + floor) / q)
        if alpha * r / q <= tol or r_next == 0.0:
            run.converged, run.fixed_point, run.termination = True, x_next, "converged"
            # directly measured, so rounding in the map shows up here
            run.extras["final_residual"] = d(x_next, T(x_next))
            return run
        if inc is None:
            x, tx, r = x_next, tx_next, r_next
        else:
            x, r = x_next, r_next


def check_ascending(run: PicardRun | Sequence, order=None) -> bool:
    """True iff every consecutive pair of iterates is ordered upward."""
    its = run.iterates if isinstance(run, PicardRun) else list(run)
    if not its:
        raise InvalidInput("empty run")
    its = [np.atleast_1d(np.asarray(x, dtype=float)).ravel() for x in its]
    flags = normalize_order(order, its[0].size)
    return all(leq(a, b, flags) for a, b in zip(its, its[1:]))


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> bool:
        a, b = self.find(i), self.find(j)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True


def comparability_components(points: Iterable, order=None) -> list[list[int]]:
    """Connected components (as index lists) of the comparability graph of ``points``.

    One component means every pair of sample points is linked by a chain of
    comparable points. That is a witness on the sample only; it says nothing
    about points outside it.
    """
    pts = [np.atleast_1d(np.asarray(p, dtype=float)).ravel() for p in points]
    if not pts:
        return []
    flags = normalize_order(order, pts[0].size)
    uf = UnionFind(len(pts))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if comparable(pts[i], pts[j], flags):
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(len(pts)):
        groups.setdefault(uf.find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def sample_contractivity(map: Map, order, pairs: Iterable, metric: Metric | None = None) -> float:
    """Largest observed ``d(Tx, Ty) / d(x, y)`` over comparable pairs.

    This is a lower bound on the best valid contraction factor, never a proof.
    """
    d = metric or l1_distance
    best = 0.0
    for x, y in pairs:
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        flags = normalize_order(order, x.size)
        if not comparable(x, y, flags):
            raise IncomparablePair(f"{x.tolist()} and {y.tolist()} are not comparable")
        dxy = d(x, y)
        if dxy == 0.0:
            raise CoincidentPair(f"{x.tolist()} and {y.tolist()} coincide")
        tx = np.atleast_1d(np.asarray(map(x), dtype=float))
        ty = np.atleast_1d(np.asarray(map(y), dtype=float))
        best = max(best, d(tx, ty) / dxy)
    return best
