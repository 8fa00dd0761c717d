"""Monotone vector norms, induced matrix norms and certificate-based renormings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidP

# Consumers needing a strictly positive contraction factor clamp to this.
ALPHA_FLOOR = 1e-6
_ULPS = 4 * np.finfo(float).eps


def p_norm(x, p: float = 1.0) -> float:
    """Return ``(sum |x_i|^p)^(1/p)``; ``p = inf`` gives ``max |x_i|``."""
    if not p >= 1:
        raise InvalidP(f"p must satisfy 1 <= p <= inf, got {p}")
    x = np.abs(np.asarray(x, dtype=float).ravel())
    if x.size == 0:
        return 0.0
    if math.isinf(p):
        return float(x.max())
    if p == 1:
        return float(x.sum())
    top = x.max()
    if top == 0.0:
        return 0.0
    # Factor out the largest entry to avoid overflow for large p.
    return float(top * np.sum((x / top) ** p) ** (1.0 / p))


def induced_norm_1(A) -> float:
    """Largest column 1-norm."""
    A = np.asarray(A, dtype=float)
    return float(np.abs(A).sum(axis=0).max())


def induced_norm_inf(A) -> float:
    """Largest row 1-norm."""
    A = np.asarray(A, dtype=float)
    return float(np.abs(A).sum(axis=1).max())


@dataclass(frozen=True)
class Renorming:
    """Weighted max-norm ``||x||_A = max_i |x_i| / weights_i`` built from a certificate.

    ``alpha`` is the contraction factor of the generating matrix in this norm,
    and ``beta * ||x||_A <= ||x||_1 <= gamma * ||x||_A``.
    """

    weights: tuple[float, ...]
    alpha: float
    beta: float
    gamma: float

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def effective_alpha(self) -> float:
        return max(self.alpha, ALPHA_FLOOR)

    def norm(self, x) -> float:
        return weighted_max_norm(x, self)

    def matrix_norm(self, M) -> float:
        """Operator norm of ``M`` induced by this weighted max-norm."""
        z = np.asarray(self.weights)
        M = np.asarray(M, dtype=float)
        if M.shape != (z.size, z.size):
            raise DimensionMismatch(f"matrix shape {M.shape} vs weights of length {z.size}")
        return float(np.max((np.abs(M) @ z) / z))

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Renorming":
        return cls(tuple(float(w) for w in d["weights"]), float(d["alpha"]),
                   float(d["beta"]), float(d["gamma"]))

    @classmethod
    def uniform(cls, n: int) -> "Renorming":
        """All-ones weights; ``alpha`` is meaningless here and set to 1."""
        return cls((1.0,) * n, 1.0, 1.0, float(n))


def weighted_max_norm(x, r: Renorming) -> float:
    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(r.weights, dtype=float)
    if x.shape != z.shape:
        raise DimensionMismatch(f"vector of length {x.size} vs weights of length {z.size}")
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x) / z))


def renorming_from_certificate(A, z) -> Renorming:
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    if A.shape != (z.size, z.size):
        raise DimensionMismatch(f"matrix shape {A.shape} vs certificate of length {z.size}")
    alpha = float(np.max((A @ z) / z))
    # min(z) makes beta ||x||_A <= ||x||_1 an equality in some directions; a few
    # ulps less keeps it true after rounding. gamma gets the mirror treatment.
    beta = float(z.min()) * (1.0 - _ULPS)
    gamma = float(z.sum()) * (1.0 + _ULPS)
    return Renorming(tuple(float(v) for v in z), alpha, beta, gamma)


def build_renorming(A, y=None) -> Renorming:
    """Renorming in which ``A`` contracts the positive cone by ``alpha < 1``.

    The weights are the normality certificate ``z`` solving ``(I - A) z = y``
    (``y`` defaults to all ones). Raises :class:`~fixpoint.errors.NotNormal`.
    """
    from .nonneg_matrix import as_matrix, normality_certificate

    M = as_matrix(A)
    verdict = normality_certificate(M, y)
    return renorming_from_certificate(M.entries, verdict.certificate)
