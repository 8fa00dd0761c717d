"""Normality of nonnegative matrices.

A nonnegative square matrix ``A`` is *normal* when some ``z > 0`` satisfies
``Az < z`` componentwise. Four equivalent tests are provided:

* the division-free elimination pivots of ``I - A`` are all positive
  (:func:`is_normal_matkowski`);
* the leading principal minors of ``I - A`` are all positive
  (:func:`is_admissible`);
* the spectral radius is below one (:func:`spectral_radius`);
* ``A^p -> 0`` (:func:`is_asymptotic`).

Positive certificates ``z`` come from :func:`normality_certificate`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadRightHandSide,
    InternalDisagreement,
    InvalidInput,
    InvalidTolerance,
    NotNormal,
    Undecided,
)
from .norms import induced_norm_1, induced_norm_inf

log = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-12


class NonnegativeMatrix:
    """Immutable square matrix with finite nonnegative entries."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInput(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix entries must be finite")
        if np.any(a < 0):
            raise InvalidInput("matrix entries must be nonnegative")
        a.setflags(write=False)
        self._a = a

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @classmethod
    def identity(cls, n: int) -> "NonnegativeMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> "NonnegativeMatrix":
        return cls(np.zeros((n, n)))

    def perturb(self, eps: float) -> "NonnegativeMatrix":
        """``A + eps`` in every entry."""
        return NonnegativeMatrix(self._a + eps)

    def scaled(self, factor: float) -> "NonnegativeMatrix":
        return NonnegativeMatrix(self._a * factor)

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": self._a.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NonnegativeMatrix":
        m = cls(d["rows"])
        if "n" in d and d["n"] != m.n:
            raise InvalidInput(f"declared n={d['n']} but rows give n={m.n}")
        return m

    def __eq__(self, other):
        if not isinstance(other, NonnegativeMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self._a.shape, self._a.tobytes()))

    def __repr__(self):
        return f"NonnegativeMatrix({self._a.tolist()!r})"

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)


def as_matrix(A) -> NonnegativeMatrix:
    return A if isinstance(A, NonnegativeMatrix) else NonnegativeMatrix(A)


# --------------------------------------------------------------------------
# elimination


@dataclass
class EliminationTable:
    """Stages of the division-free elimination of ``I - A``.

    Stage ``k`` (0-based here) is the trailing ``(n-k) x (n-k)`` block. Its
    diagonal holds the signed diagonal coefficients and its off-diagonal the
    *magnitudes* of the (negative) off-diagonal coefficients, so every
    off-diagonal entry stays nonnegative.
    """

    n: int
    stages: list[np.ndarray]
    pivots: tuple[float, ...]
    sigma: list[np.ndarray]
    scaled: bool

    @property
    def complete(self) -> bool:
        return len(self.pivots) == self.n and self.pivots[-1] > 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "pivots": list(self.pivots),
            "stages": [s.tolist() for s in self.stages],
            "sigma": [s.tolist() for s in self.sigma],
            "scaled": self.scaled,
        }


def matkowski_eliminate(A, y=None, scale: bool = False) -> EliminationTable:
    """Run the fraction-free elimination on ``I - A`` with right-hand side ``y``.

    Each step multiplies the remaining rows by the current pivot and adds a
    nonnegative multiple of the pivot row, so no division occurs. The process
    stops at the first pivot ``<= 0``. With ``scale=True`` each new stage row
    (and its ``sigma`` entry) is divided by the row's largest magnitude; this
    only multiplies by positive factors and leaves every sign unchanged.
    """
    M = as_matrix(A)
    n = M.n
    a = M.entries
    stage = a.copy()
    np.fill_diagonal(stage, 1.0 - np.diag(a))
    sig = np.ones(n) if y is None else np.asarray(y, dtype=float).copy()
    if sig.shape != (n,):
        raise InvalidInput(f"right-hand side has shape {sig.shape}, expected ({n},)")

    stages = [stage]
    sigmas = [sig]
    pivots = []
    for k in range(n):
        p = stage[0, 0]
        pivots.append(float(p))
        if p <= 0 or k == n - 1:
            break
        col = stage[1:, 0]
        row = stage[0, 1:]
        sub = stage[1:, 1:]
        nxt = p * sub + np.outer(col, row)
        np.fill_diagonal(nxt, p * np.diag(sub) - col * row)
        nsig = p * sig[1:] + col * sig[0]
        if scale:
            s = np.abs(nxt).max(axis=1)
            s[s == 0] = 1.0
            nxt = nxt / s[:, None]
            nsig = nsig / s
        stage, sig = nxt, nsig
        stages.append(stage)
        sigmas.append(sig)
    return EliminationTable(n, stages, tuple(pivots), sigmas, scale)


def is_normal_matkowski(A, tol: float = POSITIVITY_TOL) -> bool:
    """True iff every elimination pivot exists and exceeds ``tol``.

    Pivots are compared after per-stage row rescaling; unscaled pivots shrink
    or grow doubly exponentially with the stage index, which would make any
    fixed absolute tolerance meaningless.
    """
    table = matkowski_eliminate(A, scale=True)
    return len(table.pivots) == table.n and min(table.pivots) > tol


def pivots_from_minors(minors: Sequence[float]) -> list[float]:
    """Unscaled pivots predicted from the leading minors of ``I - A``.

    Without division the elimination carries an accumulated factor
    ``c_i = p_1 ... p_{i-1}``, so ``p_i = c_i * D_i / D_{i-1}`` (``D_0 = 1``).
    This agrees with ``p_i = D_i`` for ``i <= 2`` only.
    """
    out = []
    c = 1.0
    prev = 1.0
    for d in minors:
        p = c * d / prev
        out.append(p)
        c *= p
        prev = d
    return out


def _det_cofactor(m: np.ndarray) -> float:
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    total = 0.0
    for j in range(n):
        if m[0, j] == 0.0:
            continue
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * _det_cofactor(minor)
    return total


def leading_minors(A) -> tuple[float, ...]:
    """Leading principal minors ``D_1, ..., D_n`` of ``I - A``.

    Computed independently of the elimination: Laplace expansion for
    ``n <= 4``, partially pivoted LU (LAPACK via numpy) above that.
    """
    M = as_matrix(A)
    B = np.eye(M.n) - M.entries
    out = []
    for i in range(1, M.n + 1):
        block = B[:i, :i]
        out.append(_det_cofactor(block) if M.n <= 4 else float(np.linalg.det(block)))
    return tuple(out)


def is_admissible(A, tol: float = POSITIVITY_TOL) -> bool:
    return all(d > tol for d in leading_minors(A))


# --------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Refutation:
    """Evidence against normality: ``A v ~ lam v`` with ``lam >= 1``, ``v >= 0``."""

    lam: float
    vector: tuple[float, ...]
    residual: float

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "vector": list(self.vector), "residual": self.residual}


@dataclass(frozen=True)
class NormalityVerdict:
    normal: bool
    certificate: tuple[float, ...] | None = None
    refutation: Refutation | None = None
    method: str = "matkowski"

    def __post_init__(self):
        if (self.certificate is None) == (self.refutation is None):
            raise ValueError("exactly one of certificate/refutation must be given")

    def to_dict(self) -> dict:
        return {
            "normal": self.normal,
            "method": self.method,
            "certificate": None if self.certificate is None else list(self.certificate),
            "refutation": None if self.refutation is None else self.refutation.to_dict(),
        }


def normality_certificate(A, y=None, tol: float = POSITIVITY_TOL) -> NormalityVerdict:
    """Solve ``(I - A) z = y`` by elimination and back-substitution.

    Returns a verdict whose certificate ``z`` satisfies ``z > 0`` and
    ``Az = z - y < z``. ``y`` defaults to all ones.
    """
    M = as_matrix(A)
    n = M.n
    y = np.ones(n) if y is None else np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise BadRightHandSide(f"right-hand side has shape {y.shape}, expected ({n},)")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise BadRightHandSide("right-hand side must be strictly positive")
    table = matkowski_eliminate(M, y, scale=True)
    if len(table.pivots) < n or min(table.pivots) <= tol:
        raise NotNormal(f"elimination pivot {min(table.pivots):.3g} is not positive")

    z = np.zeros(n)
    for k in range(n - 1, -1, -1):
        row = table.stages[k][0]
        z[k] = (table.sigma[k][0] + row[1:] @ z[k + 1:]) / row[0]

    Az = M.entries @ z
    if not (np.all(z > tol) and np.all(Az < z * (1.0 - tol))):
        raise Undecided("certificate lost strict positivity to rounding")
    return NormalityVerdict(True, tuple(float(v) for v in z), None, "matkowski")


def witness_lambda(A, lam: float):
    """Return ``z > 0`` with ``Az < lam z`` if one exists (so ``nu(A) < lam``), else ``None``.

    ``lam = 0`` is witnessed only by the zero matrix, with ``z`` all ones.
    """
    M = as_matrix(A)
    if lam <= 0:
        return tuple([1.0] * M.n) if not M.entries.any() and lam == 0 else None
    try:
        return normality_certificate(M.scaled(1.0 / lam)).certificate
    except (NotNormal, Undecided):
        return None


def nu_bracket(A, tol: float = 1e-10) -> tuple[float, float]:
    """Bisection bracket ``[lo, hi]`` of width ``<= tol`` around ``nu(A)``.

    ``A / lam`` is normal exactly when ``nu(A) < lam``; the search starts
    from ``[0, max row sum]``.
    """
    if not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    M = as_matrix(A)
    lo, hi = 0.0, induced_norm_inf(M.entries)
    if hi == 0.0:
        return 0.0, 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if is_normal_matkowski(M.entries / mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def nu_estimate(A, tol: float = 1e-10) -> float:
    lo, hi = nu_bracket(A, tol)
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# spectral radius and powers


@dataclass(frozen=True)
class SpectralEstimate:
    """Spectral radius estimate with a Collatz-Wielandt bracket ``lower <= rho <= upper``."""

    rho: float
    lower: float
    upper: float
    epsilon_used: float
    vector: tuple[float, ...] = field(repr=False, default=())
    converged: bool = True

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "lower": self.lower,
            "upper": self.upper,
            "epsilon_used": self.epsilon_used,
            "converged": self.converged,
        }


EPS_LEVELS = 20
_ITER_PER_LEVEL = 60


def _subinvariance_lower(a: np.ndarray, v: np.ndarray) -> float:
    """Best ``lam`` with ``A u >= lam u`` on the support of ``u``, over truncations ``u`` of ``v``.

    ``u`` keeps the ``m`` largest entries of ``v`` (``m = 1..n``). Any
    ``u >= 0, u != 0`` with ``Au >= lam u`` gives ``rho(A) >= lam``; truncation
    matters for reducible ``A`` whose Perron vector has (near-)zero entries.
    """
    n = v.size
    order = np.argsort(-v)
    U = np.zeros((n, n))
    for m in range(n):
        U[order[: m + 1], m] = v[order[: m + 1]]
    AU = a @ U
    best = 0.0
    for m in range(n):
        S = order[: m + 1]
        best = max(best, float(np.min(AU[S, m] / v[S])))
    return best


def spectral_radius(A, tol: float = 1e-10) -> SpectralEstimate:
    """Perron root of ``A`` via ``A + eps`` with ``eps = 1e-2 * 4^-k``, ``k = 0..20``.

    For any ``v > 0`` and nonnegative ``A``, ``min (Av)_i/v_i <= rho(A) <=
    max (Av)_i/v_i``, and ``rho(A) <= rho(A + eps) <= max ((A+eps)v)_i/v_i``.
    All these bounds are rigorous, so the running bracket is the intersection
    over every iterate seen. Stops when the bracket is narrower than ``tol``.

    The iteration is the power method applied to ``(s I - (A + eps))^-1``
    with ``s`` just above the current upper bound: that inverse is entrywise
    positive, shares the Perron vector, and separates it far better than
    ``A + eps`` does when ``A`` is sparse or nearly periodic.
    """
    if not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    a = as_matrix(A).entries
    n = a.shape[0]
    eye = np.eye(n)
    v = np.full(n, 1.0 / n)
    lower, upper = 0.0, math.inf
    best_v = v
    eps = 1e-2
    floor = 64 * np.finfo(float).eps
    for k in range(EPS_LEVELS + 1):
        eps = 1e-2 * 4.0 ** -k
        b = a + eps
        for _ in range(_ITER_PER_LEVEL):
            w = b @ v
            rb = w / v
            ra = (a @ v) / v
            lo_b, hi_b = rb.min(), rb.max()
            lower = max(lower, _subinvariance_lower(a, v))
            cand = min(ra.max(), hi_b)
            if cand < upper:
                upper = float(cand)
                best_v = v
            gap = hi_b - lo_b
            if upper - lower <= tol or gap <= max(0.25 * tol, floor * hi_b):
                break
            x = None
            with np.errstate(all="ignore"):
                try:
                    x = np.linalg.solve((hi_b + gap) * eye - b, v)
                except np.linalg.LinAlgError:
                    pass
            if x is None or not np.all(np.isfinite(x)) or not np.all(x > 0):
                x = w + lo_b * v
            v = x / x.sum()
        if upper - lower <= tol:
            break
    upper = max(upper, lower)
    return SpectralEstimate(
        rho=0.5 * (lower + upper),
        lower=lower,
        upper=upper,
        epsilon_used=eps,
        vector=tuple(float(x) for x in best_v),
        converged=upper - lower <= tol,
    )


def asymptotic_test(A, tol: float = POSITIVITY_TOL, max_p: int = 10_000) -> tuple[bool, int]:
    """Return ``(verdict, p)`` where ``p`` is the power that decided it.

    True once ``||A^p||_1 < 1 - tol``. False once ``rho(A) >= 1`` is certified
    by ``A^p`` itself: a diagonal entry of ``A^p`` is a lower bound for
    ``rho(A^p) = rho(A)^p``, and so is its smallest row sum.
    """
    if not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    if max_p < 1:
        raise InvalidInput("max_p must be at least 1")
    a = as_matrix(A).entries
    P = a.copy()
    for p in range(1, max_p + 1):
        nrm = induced_norm_1(P)
        if not math.isfinite(nrm):
            break
        if nrm < 1.0 - tol:
            return True, p
        if np.diag(P).max() >= 1.0 or P.sum(axis=1).min() >= 1.0:
            return False, p
        P = P @ a
    raise Undecided(f"neither ||A^p|| < 1 nor rho >= 1 certified for p <= {max_p}")


def is_asymptotic(A, tol: float = POSITIVITY_TOL, max_p: int = 10_000) -> bool:
    return asymptotic_test(A, tol, max_p)[0]


def neumann_inverse(A, tol: float = 1e-12, max_terms: int = 1_000_000) -> NonnegativeMatrix:
    """``(I - A)^-1`` as the truncated series ``I + A + A^2 + ...``.

    With ``alpha`` the certificate contraction factor, the series stops after
    the first term whose successor ``A^(p+1)`` has both its induced 1-norm and
    its certificate-weighted norm below ``tol * (1 - alpha)``. This bounds the
    residual ``||(I - A) S - I||_1 = ||A^(p+1)||_1`` and the weighted tail by
    ``tol``.
    """
    if not tol > 0:
        raise InvalidTolerance(f"tol must be positive, got {tol}")
    M = as_matrix(A)
    z = np.asarray(normality_certificate(M).certificate)
    a = M.entries
    alpha = float(np.max((a @ z) / z))
    limit = tol * (1.0 - alpha)
    S = np.eye(M.n)
    P = np.eye(M.n)
    for _ in range(max_terms):
        P = P @ a
        if induced_norm_1(P) <= limit and np.max((P @ z) / z) <= limit:
            return NonnegativeMatrix(S)
        S += P
    raise Undecided(f"Neumann series did not reach tol={tol} within {max_terms} terms")


def refute_normality(A, tol: float = 1e-10) -> Refutation:
    est = spectral_radius(A, tol)
    a = as_matrix(A).entries
    v = np.asarray(est.vector)
    v = v / v.sum()
    res = float(np.abs(a @ v - est.rho * v).sum())
    return Refutation(est.rho, tuple(float(x) for x in v), res)


def decide_normality(A, tol: float = POSITIVITY_TOL, y=None) -> NormalityVerdict:
    """Normality verdict with certificate or refutation.

    A pivot that is exactly zero refutes normality; a nonzero pivot inside
    ``(-tol, tol]`` is too close to call and raises :class:`Undecided`.
    """
    M = as_matrix(A)
    table = matkowski_eliminate(M, y, scale=True)
    worst = min(table.pivots)
    if len(table.pivots) == M.n and worst > tol:
        return normality_certificate(M, y, tol)
    if worst != 0.0 and worst > -tol:
        raise Undecided(f"elimination pivot {worst:.3g} lies within the positivity tolerance")
    ref = refute_normality(M)
    if ref.lam < 1.0 - 1e-6:
        raise InternalDisagreement(
            f"elimination refutes normality but the spectral estimate is {ref.lam:.17g}"
        )
    return NormalityVerdict(False, None, ref, "matkowski")


@dataclass(frozen=True)
class Characterization:
    """The four normality tests side by side."""

    matkowski: bool
    admissible: bool
    spectral: bool
    asymptotic: bool
    pivots: tuple[float, ...]
    minors: tuple[float, ...]
    spectral_estimate: SpectralEstimate
    asymptotic_power: int

    @property
    def agree(self) -> bool:
        return len({self.matkowski, self.admissible, self.spectral, self.asymptotic}) == 1

    def to_dict(self) -> dict:
        return {
            "matkowski": self.matkowski,
            "admissible": self.admissible,
            "spectral": self.spectral,
            "asymptotic": self.asymptotic,
            "agree": self.agree,
            "pivots": list(self.pivots),
            "scaled_pivots": True,
            "minors": list(self.minors),
            "spectral_estimate": self.spectral_estimate.to_dict(),
            "asymptotic_power": self.asymptotic_power,
        }


def characterize(A, tol: float = POSITIVITY_TOL, spectral_tol: float = 1e-10,
                 max_p: int = 10_000) -> Characterization:
    """Run all four tests; raise :class:`Undecided` near ``rho = 1`` and
    :class:`InternalDisagreement` if decisive tests disagree."""
    M = as_matrix(A)
    est = spectral_radius(M, spectral_tol)
    if est.lower < 1.0 <= est.upper and not (est.lower == est.upper == 1.0):
        raise Undecided(f"spectral bracket [{est.lower:.17g}, {est.upper:.17g}] contains 1")
    table = matkowski_eliminate(M, scale=True)
    worst = min(table.pivots)
    if worst != 0.0 and -tol < worst <= tol:
        raise Undecided(f"elimination pivot {worst:.3g} lies within the positivity tolerance")
    ok, p = asymptotic_test(M, tol, max_p)
    ch = Characterization(
        matkowski=len(table.pivots) == M.n and worst > tol,
        admissible=is_admissible(M, tol),
        spectral=est.upper < 1.0,
        asymptotic=ok,
        pivots=table.pivots,
        minors=leading_minors(M),
        spectral_estimate=est,
        asymptotic_power=p,
    )
    if not ch.agree:
        raise InternalDisagreement(f"normality tests disagree: {ch.to_dict()}")
    return ch
