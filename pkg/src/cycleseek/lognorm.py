"""Logarithmic norms (matrix measures) and grid certification sweeps.

mu(A) is the one-sided directional derivative of the induced norm at the
identity: lim_{h -> 0+} (|I + h A| - 1) / h.  Closed forms are used for the
one-, two- and infinity-norm kinds; the weighted kind |x|_P = sqrt(x' P x)
reduces to a symmetric eigenproblem through the Cholesky factor of P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, InternalInconsistency

Array = np.ndarray

KINDS = ("one", "two", "inf", "weighted")


@dataclass(frozen=True)
class NormKind:
    """Vector norm selector; ``weight`` is the SPD matrix of the weighted kind."""

    kind: str = "inf"
    weight: Optional[Array] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "weighted":
            P = np.asarray(self.weight, dtype=float)
            if P.ndim != 2 or P.shape[0] != P.shape[1]:
                raise DimensionError("weight must be square")
            if not np.allclose(P, P.T, atol=1e-12 * max(1.0, float(np.max(np.abs(P))))):
                raise ValueError("weight must be symmetric")
            try:
                np.linalg.cholesky(P)
            except np.linalg.LinAlgError:
                raise ValueError("weight must be positive definite") from None
            object.__setattr__(self, "weight", P)
        elif self.weight is not None:
            raise ValueError("weight only applies to the weighted kind")

    @classmethod
    def one(cls):
        return cls("one")

    @classmethod
    def two(cls):
        return cls("two")

    @classmethod
    def inf_(cls):
        return cls("inf")

    @classmethod
    def weighted(cls, P):
        return cls("weighted", np.asarray(P, dtype=float))


def _square(A) -> Array:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {M.shape}")
    return M


def _chol_upper(P: Array) -> Array:
    # L with P = L' L (upper triangular); numpy returns C lower with P = C C'
    return np.linalg.cholesky(P).T


def mu(A, norm: NormKind = NormKind("inf")) -> float:
    """Logarithmic norm of A under the selected vector norm."""
    M = _square(A)
    n = M.shape[0]
    if norm.kind == "inf":
        off = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
        return float(np.max(np.diag(M) + off))
    if norm.kind == "one":
        off = np.sum(np.abs(M), axis=0) - np.abs(np.diag(M))
        return float(np.max(np.diag(M) + off))
    if norm.kind == "two":
        return float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])
    P = norm.weight
    if P.shape[0] != n:
        raise DimensionError("weight dimension mismatch")
    L = _chol_upper(P)
    B = L @ M @ np.linalg.inv(L)
    return float(np.linalg.eigvalsh(0.5 * (B + B.T))[-1])


def induced_norm(A, norm: NormKind = NormKind("inf")) -> float:
    """Operator norm induced by the selected vector norm."""
    M = _square(A)
    if norm.kind == "inf":
        return float(np.max(np.sum(np.abs(M), axis=1)))
    if norm.kind == "one":
        return float(np.max(np.sum(np.abs(M), axis=0)))
    if norm.kind == "two":
        return float(np.linalg.norm(M, 2))
    L = _chol_upper(norm.weight)
    return float(np.linalg.norm(L @ M @ np.linalg.inv(L), 2))


def mu_weighted_geneig(A, P) -> float:
    """Weighted-kind mu as the largest lambda of (A'P + PA) y = 2 lambda P y.

    Equivalent to mu(A, NormKind.weighted(P)); kept as the generalized
    eigenproblem route for grid sweeps and cross-checks.
    """
    M = _square(A)
    P = _square(P)
    S = M.T @ P + P @ M
    vals = scipy.linalg.eigh(S, 2.0 * P, eigvals_only=True)
    return float(vals[-1])


@dataclass(frozen=True)
class MatrixFamilySample:
    """A one-parameter matrix family sampled at increasing lambda nodes.

    Interpreted as piecewise linear between nodes, which makes the
    trapezoid integral of the family exact and the node-wise maximum of mu
    an upper bound for the whole family (mu is convex).
    """

    lambdas: Array
    matrices: Array  # shape (m, n, n)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        mats = np.asarray(self.matrices, dtype=float)
        if lam.ndim != 1 or len(lam) < 2 or np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing, length >= 2")
        if mats.ndim != 3 or mats.shape[0] != len(lam) or mats.shape[1] != mats.shape[2]:
            raise DimensionError("matrices must be (m, n, n) aligned with lambdas")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def from_callable(cls, fn: Callable[[float], Array], lambdas) -> "MatrixFamilySample":
        lam = np.asarray(lambdas, dtype=float)
        return cls(lam, np.array([np.asarray(fn(l), dtype=float) for l in lam]))


def mu_of_integral(family: MatrixFamilySample, norm: NormKind = NormKind("inf"),
                   tol: float = 1e-8):
    """(mu of the lambda-averaged matrix, max of mu over the samples).

    The average is the integral over the lambda span divided by its length.
    Asserts mu_int <= mu_max + tol, which holds exactly for the piecewise
    linear reading of the samples.
    """
    lam, mats = family.lambdas, family.matrices
    span = lam[-1] - lam[0]
    avg = np.trapezoid(mats, lam, axis=0) / span
    mu_int = mu(avg, norm)
    mu_max = max(mu(M, norm) for M in mats)
    if mu_int > mu_max + tol:
        raise InternalInconsistency(
            f"averaged mu {mu_int!r} exceeds family max {mu_max!r}")
    return mu_int, mu_max


@dataclass(frozen=True)
class GridSpec:
    """Sampling resolution for (t, z) certification sweeps."""

    t_samples: int = 256
    z_samples: int = 32
    slack: float = 0.0

    def __post_init__(self):
        if self.t_samples < 2 or self.z_samples < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if self.slack < 0:
            raise ValueError("slack must be >= 0")


@dataclass
class ViolationReport:
    """Worst sample of a bound sweep; ok means no violation found."""

    ok: bool
    worst_t: float
    worst_z: Array
    mu_value: float
    bound_value: float
    margin: float  # mu_value - bound_value; positive means violation

    def to_dict(self) -> dict:
        return {
            "worst_t": self.worst_t,
            "worst_z": [float(v) for v in np.atleast_1d(self.worst_z)],
            "mu_value": self.mu_value,
            "bound_value": self.bound_value,
            "margin": self.margin,
        }


def _box_axes(box: Sequence, n_samples: int):
    axes = []
    for lo, hi in box:
        lo, hi = float(lo), float(hi)
        if not (hi >= lo):
            raise ValueError("box bounds must satisfy hi >= lo")
        axes.append(np.linspace(lo, hi, n_samples))
    return axes


def sweep_bound(jac_fn: Callable[[float, Array], Array], period: float,
                box: Sequence, bound_fn: Callable[[float], float],
                norm: NormKind = NormKind("inf"),
                grid: GridSpec = GridSpec()) -> ViolationReport:
    """Check mu(jac(t, z)) <= bound(t) + slack over a (t, box) grid.

    Comparisons carry a machine-epsilon guard since valid certificates can
    attain exact equality on box faces.
    """
    taxes = np.linspace(0.0, period, grid.t_samples, endpoint=False)
    zaxes = _box_axes(box, grid.z_samples)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*zaxes, indexing="ij")], axis=-1)
    worst = None
    for t in taxes:
        b = float(bound_fn(float(t)))
        for z in mesh:
            J = np.atleast_2d(np.asarray(jac_fn(float(t), z), dtype=float))
            m = mu(J, norm)
            margin = m - b
            if worst is None or margin > worst[0]:
                worst = (margin, float(t), z.copy(), m, b)
    margin, wt, wz, m, b = worst
    guard = 64.0 * np.finfo(float).eps * max(1.0, abs(m), abs(b))
    ok = margin <= grid.slack + guard
    return ViolationReport(ok, wt, wz, m, b, margin)


def check_p_matrix_condition(jac_fn: Callable[[float, Array], Array],
                             period: float, box: Sequence, P,
                             bound_fn: Callable[[float], float],
                             grid: GridSpec = GridSpec()):
    """Weighted-norm certificate sweep via the generalized eigenproblem.

    Returns (ok, ViolationReport).
    """
    P = _square(P)
    norm = NormKind.weighted(P)
    rep = sweep_bound(jac_fn, period, box, bound_fn, norm, grid)
    return rep.ok, rep
