"""Floating-point symmetric linear algebra kernel.

Cyclic Jacobi eigendecomposition, eigenvalue-thresholded pseudoinverse, and
closed-form infima of quadratic functions ``q(x) = x^T Q x + a^T x + c``
(no 1/2 factor anywhere in this package, so the homogenized matrix needs no
rescaling).  Tolerances are fixed here and quoted in every report that uses
them:

* PSD slack ``PSD_TOL = 1e-9``: Q counts as positive semidefinite when no
  eigenvalue drops below ``-PSD_TOL`` (negatives above it are clamped to 0).
* nullspace consistency ``NULL_TOL = 1e-8``: a finite infimum additionally
  requires the component of the linear term inside the numerical nullspace
  of Q to have norm at most ``NULL_TOL * (1 + |a|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

PSD_TOL = 1e-9
NULL_TOL = 1e-8
_JACOBI_REL = 1e-14
_RANK_REL = 1e-9

NEG_INF = float("-inf")
POS_INF = float("inf")


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Symmetric float matrix; symmetrized and frozen at construction."""

    a: np.ndarray

    @staticmethod
    def make(entries) -> "SymMatrix":
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("entries must form a square matrix")
        if arr.shape[0] < 1:
            raise ValueError("dimension must be >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        sym = (arr + arr.T) / 2.0
        sym.setflags(write=False)
        return SymMatrix(sym)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __repr__(self) -> str:  # keep reprs short in reports
        return f"SymMatrix(n={self.n})"


@dataclass(frozen=True, eq=False)
class EigResult:
    """Ascending eigenvalues and the matching orthogonal column vectors."""

    values: np.ndarray
    vectors: np.ndarray


def eigh_sym(S: SymMatrix) -> EigResult:
    """Cyclic Jacobi sweeps until the off-diagonal Frobenius mass falls below
    1e-14 times the Frobenius norm of S.  Values come back ascending, with
    each eigenvector's largest-magnitude component made positive so repeated
    runs are byte-identical."""
    A = np.array(S.a, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    n = A.shape[0]
    V = np.eye(n)
    norm = float(np.linalg.norm(A))
    if n > 1 and norm > 0.0:
        tol = _JACOBI_REL * norm
        for _sweep in range(60):
            strict = np.triu(A, 1)
            off = math.sqrt(2.0) * float(np.linalg.norm(strict))
            if off <= tol:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    diff = A[q, q] - A[p, p]
                    # overflow-free tangent of the annihilating rotation
                    sgn = 1.0 if diff >= 0.0 else -1.0
                    t = 2.0 * apq * sgn / (abs(diff) + math.hypot(diff, 2.0 * apq))
                    c = 1.0 / math.hypot(t, 1.0)
                    s = t * c
                    rp, rq = A[:, p].copy(), A[:, q].copy()
                    A[:, p] = c * rp - s * rq
                    A[:, q] = s * rp + c * rq
                    rp, rq = A[p, :].copy(), A[q, :].copy()
                    A[p, :] = c * rp - s * rq
                    A[q, :] = s * rp + c * rq
                    A[p, q] = A[q, p] = 0.0
                    vp, vq = V[:, p].copy(), V[:, q].copy()
                    V[:, p] = c * vp - s * vq
                    V[:, q] = s * vp + c * vq
    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    V = V[:, order]
    for k in range(n):
        col = V[:, k]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            V[:, k] = -col
    values.setflags(write=False)
    V.setflags(write=False)
    return EigResult(values, V)


def quad_inf(Q: SymMatrix, a: Sequence[float], c: float) -> float:
    """Exact-form infimum of x^T Q x + a^T x + c over all of R^n.

    Finite value c - a^T Q^+ a / 4 when Q is PSD up to ``PSD_TOL`` and the
    linear term is consistent with the numerical nullspace of Q; -inf
    otherwise.  The pseudoinverse thresholds eigenvalues at
    ``1e-9 * lambda_max``.
    """
    avec = np.asarray(a, dtype=float)
    if avec.shape != (Q.n,):
        raise ValueError("linear term length does not match Q")
    eig = eigh_sym(Q)
    lam = np.asarray(eig.values)
    if float(lam[0]) < -PSD_TOL:
        return NEG_INF
    lam = np.clip(lam, 0.0, None)
    lam_max = float(lam[-1])
    thr = _RANK_REL * lam_max if lam_max > 0.0 else 0.0
    null_mask = lam <= thr
    a_rot = eig.vectors.T @ avec
    a_null = float(np.linalg.norm(a_rot[null_mask])) if np.any(null_mask) else 0.0
    if a_null > NULL_TOL * (1.0 + float(np.linalg.norm(avec))):
        return NEG_INF
    pos = ~null_mask
    if not np.any(pos):
        return float(c)
    return float(c - 0.25 * np.sum(a_rot[pos] ** 2 / lam[pos]))


def quad_argmin(Q: SymMatrix, a: Sequence[float], c: float) -> Optional[np.ndarray]:
    """Minimizer matching ``quad_inf`` when the infimum is finite."""
    if quad_inf(Q, a, c) == NEG_INF:
        return None
    avec = np.asarray(a, dtype=float)
    eig = eigh_sym(Q)
    lam = np.clip(np.asarray(eig.values), 0.0, None)
    lam_max = float(lam[-1])
    thr = _RANK_REL * lam_max if lam_max > 0.0 else 0.0
    inv = np.where(lam > thr, np.divide(1.0, np.where(lam > thr, lam, 1.0)), 0.0)
    a_rot = eig.vectors.T @ avec
    return -0.5 * (eig.vectors @ (inv * a_rot))


def homogenize(Q: SymMatrix, a: Sequence[float], c: float) -> SymMatrix:
    """The (n+1) x (n+1) block matrix [[Q, a/2], [a^T/2, c]].

    Contract: the quadratic is nonnegative on all of R^n exactly when the
    smallest eigenvalue of this matrix is nonnegative.
    """
    avec = np.asarray(a, dtype=float)
    if avec.shape != (Q.n,):
        raise ValueError("linear term length does not match Q")
    n = Q.n
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = Q.a
    M[:n, n] = avec / 2.0
    M[n, :n] = avec / 2.0
    M[n, n] = float(c)
    return SymMatrix.make(M)


def min_eig(S: SymMatrix) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its unit eigenvector."""
    eig = eigh_sym(S)
    return float(eig.values[0]), np.array(eig.vectors[:, 0])
