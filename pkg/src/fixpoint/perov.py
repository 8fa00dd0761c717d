"""Vector-valued metrics on product spaces and the Perov solver.

A product space ``X = X_1 x ... x X_q`` of coordinate blocks carries the
vector distance ``Delta(x, y) = (d_1(x_1, y_1), ..., d_q(x_q, y_q))`` and the
product order (blockwise direction flags). A selfmap that satisfies
``Delta(Tx, Ty) <= A Delta(x, y)`` for comparable ``x <= y`` with a normal
matrix ``A`` becomes a scalar ``alpha``-contraction for
``e(x, y) = ||Delta(x, y)||_A``, which is what :func:`perov_solve` iterates in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, IncomparablePair, InvalidInput, InvalidMetric, NotAscendingStart
from .nonneg_matrix import as_matrix, normality_certificate
from .norms import Renorming, renorming_from_certificate, weighted_max_norm
from .picard import OrderedProblem, PicardRun, l1_distance, leq, normalize_order, picard_iterate


@dataclass
class ProductSpace:
    factor_dims: tuple[int, ...]
    factor_orders: list[np.ndarray] | None = None
    factor_metrics: list[Callable] | None = None

    def __post_init__(self):
        self.factor_dims = tuple(int(k) for k in self.factor_dims)
        if not self.factor_dims or min(self.factor_dims) < 1:
            raise InvalidInput("need at least one factor, each of dimension >= 1")
        if self.factor_orders is None:
            self.factor_orders = [None] * self.q
        if len(self.factor_orders) != self.q:
            raise InvalidInput(f"expected {self.q} factor orders")
        self.factor_orders = [normalize_order(o, k) for o, k in zip(self.factor_orders, self.factor_dims)]
        if self.factor_metrics is None:
            self.factor_metrics = [l1_distance] * self.q
        if len(self.factor_metrics) != self.q:
            raise InvalidInput(f"expected {self.q} factor metrics")
        self._spot_check()

    def _spot_check(self):
        rng = np.random.default_rng(0)
        for i, (k, d) in enumerate(zip(self.factor_dims, self.factor_metrics)):
            u, v = rng.standard_normal(k), rng.standard_normal(k)
            if d(u, u) != 0.0 or not np.isclose(d(u, v), d(v, u), rtol=1e-12, atol=0) or d(u, v) < 0:
                raise InvalidMetric(f"metric of factor {i} is not a symmetric distance")

    @classmethod
    def coordinates(cls, n: int, order=None) -> "ProductSpace":
        """``R^n`` as ``n`` one-dimensional factors with ``|.|``."""
        flags = normalize_order(order, n)
        return cls((1,) * n, [flags[i:i + 1] for i in range(n)])

    @property
    def q(self) -> int:
        return len(self.factor_dims)

    @property
    def dim(self) -> int:
        return sum(self.factor_dims)

    @property
    def order(self) -> np.ndarray:
        """Product order flattened to per-coordinate flags."""
        return np.concatenate(self.factor_orders)

    def slices(self) -> list[slice]:
        out, lo = [], 0
        for k in self.factor_dims:
            out.append(slice(lo, lo + k))
            lo += k
        return out

    def check(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        if x.size != self.dim:
            raise DimensionMismatch(f"state of length {x.size} in a space of dimension {self.dim}")
        return x

    def split(self, x) -> list[np.ndarray]:
        x = self.check(x)
        return [x[s] for s in self.slices()]

    def leq(self, x, y) -> bool:
        return all(leq(a, b, o) for a, b, o in zip(self.split(x), self.split(y), self.factor_orders))


def product_metric(space: ProductSpace, x, y) -> np.ndarray:
    """``(d_1(x_1, y_1), ..., d_q(x_q, y_q))``."""
    return np.array([d(a, b) for d, a, b in zip(space.factor_metrics, space.split(x), space.split(y))])


def scalarize(delta, r: Renorming) -> float:
    """``e = max_i delta_i / weights_i``; all-ones weights give the max-norm of ``delta``."""
    return weighted_max_norm(delta, r)


@dataclass
class SystemOfMaps:
    """Component maps ``T_i : X -> X_i`` with an admissible start ``a_i <=_i T_i(a)``.

    ``increment`` optionally gives the linear part of an affine system; see
    :class:`~fixpoint.picard.OrderedProblem`.
    """

    space: ProductSpace
    components: Sequence[Callable]
    start: np.ndarray
    increment: Callable | None = None

    def __post_init__(self):
        if len(self.components) != self.space.q:
            raise InvalidInput(f"expected {self.space.q} component maps, got {len(self.components)}")
        self.start = self.space.check(self.start)
        image = associate_selfmap(self)(self.start)
        if not self.space.leq(self.start, image):
            raise NotAscendingStart("start point is not below its image in every factor")


def associate_selfmap(system: SystemOfMaps) -> Callable[[np.ndarray], np.ndarray]:
    """``T x = (T_1 x, ..., T_q x)``."""
    space, comps = system.space, list(system.components)

    def T(x):
        x = space.check(x)
        parts = []
        for k, f in zip(space.factor_dims, comps):
            part = np.atleast_1d(np.asarray(f(x), dtype=float)).ravel()
            if part.size != k:
                raise DimensionMismatch(f"component returned {part.size} values, factor has {k}")
            parts.append(part)
        return np.concatenate(parts)

    return T


def linear_system(A, b, start=None, order=None) -> SystemOfMaps:
    """``x = A x + b`` on ``R^n`` split into scalar factors; ``start`` defaults to 0."""
    a = np.asarray(as_matrix(A).entries)
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    n = a.shape[0]
    if b.size != n:
        raise DimensionMismatch(f"b has length {b.size}, A is {n}x{n}")
    space = ProductSpace.coordinates(n, order)
    comps = [(lambda x, i=i: a[i] @ x + b[i]) for i in range(n)]
    return SystemOfMaps(space, comps, np.zeros(n) if start is None else start,
                        increment=lambda h: a @ h)


@dataclass
class ContractionReport:
    checked: int
    worst_slack: float
    violations: list[tuple[int, list[float]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "worst_slack": self.worst_slack,
            "violations": [{"pair": i, "slack": s} for i, s in self.violations],
        }


def verify_vector_contraction(map, space: ProductSpace, A, pairs, atol: float = 1e-9) -> ContractionReport:
    """Check ``Delta(Tx, Ty) <= A Delta(x, y) + atol`` on sampled comparable pairs.

    ``worst_slack`` is the largest componentwise ``Delta(Tx,Ty) - A Delta(x,y)``.
    """
    a = as_matrix(A).entries
    if a.shape[0] != space.q:
        raise DimensionMismatch(f"matrix is {a.shape[0]}x{a.shape[0]} for {space.q} factors")
    worst = -np.inf
    violations = []
    count = 0
    for i, (x, y) in enumerate(pairs):
        if not (space.leq(x, y) or space.leq(y, x)):
            raise IncomparablePair(f"pair {i} is not comparable")
        slack = product_metric(space, map(x), map(y)) - a @ product_metric(space, x, y)
        worst = max(worst, float(slack.max()))
        if np.any(slack > atol):
            violations.append((i, slack.tolist()))
        count += 1
    return ContractionReport(count, float(worst) if count else 0.0, violations)


def sample_comparable_pairs(space: ProductSpace, rng: np.random.Generator, count: int,
                            center=None, scale: float = 1.0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random pairs ``x <= y`` around ``center``."""
    c = np.zeros(space.dim) if center is None else space.check(center)
    flags = space.order
    out = []
    for _ in range(count):
        x = c + scale * rng.standard_normal(space.dim)
        y = x + flags * scale * np.abs(rng.standard_normal(space.dim))
        out.append((x, y))
    return out


def perov_solve(system: SystemOfMaps, A, tol: float = 1e-10, max_iter: int = 1_000_000,
                require_ascending: bool = False) -> PicardRun:
    """Solve ``x = T x`` for a system contracting with the normal matrix ``A``.

    Certificate, renorming and contraction factor come from ``A``; the Picard
    loop then runs in ``e = ||Delta||_A``. The stopping threshold in ``e`` is
    ``tol / gamma``, so the returned point is within ``tol`` of the fixed point
    in ``||Delta||_1``. Raises :class:`~fixpoint.errors.NotNormal`.
    """
    M = as_matrix(A)
    space = system.space
    if M.n != space.q:
        raise DimensionMismatch(f"matrix is {M.n}x{M.n} for {space.q} factors")
    verdict = normality_certificate(M)
    ren = renorming_from_certificate(M.entries, verdict.certificate)

    def e(x, y):
        return scalarize(product_metric(space, x, y), ren)

    problem = OrderedProblem(associate_selfmap(system), system.start, ren.effective_alpha,
                             order=space.order, metric=e, increment=system.increment)
    run = picard_iterate(problem, tol / ren.gamma, max_iter, require_ascending)
    its = run.iterates + [problem.apply(run.iterates[-1])]
    run.vector_residuals = [product_metric(space, u, v) for u, v in zip(its, its[1:])]
    run.extras.update(requested_tol=tol, certificate=verdict, renorming=ren)
    return run
