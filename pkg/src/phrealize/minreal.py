"""Minimal realization of standard state-space systems via staircase forms.

The controllability staircase is computed by repeated orthogonal input-block
compression (the numerically stable approach); the observability version is
its dual applied to (A^T, C^T).  Minimal realization keeps the controllable
part first, then the observable part of that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .systems import DEFAULT_TOL, StateSpaceSystem, Tolerances

__all__ = ["StaircaseResult", "staircase_controllable", "staircase_observable",
           "minimal_realization"]


@dataclass(frozen=True)
class StaircaseResult:
    """Orthogonal similarity bringing a pair to staircase form.

    ``controllable_dim`` holds the dimension of the reached subspace: the
    controllable dimension for the (A, B) staircase and the observable
    dimension for the dual (A^T, C^T) one.
    """

    transformed: StateSpaceSystem
    controllable_dim: int
    orthogonal_basis: np.ndarray


def _stair(A: np.ndarray, B: np.ndarray, tol: Tolerances):
    """Orthogonal Z with Z^T A Z block Hessenberg and Z^T B = [B1; 0].

    Returns (Z, k) where the leading k states span the reachable subspace.
    The rank cutoff is frozen from ||[A B]|| on entry so every compression
    stage uses one consistent threshold.
    """
    n = A.shape[0]
    Z = np.eye(n)
    if n == 0:
        return Z, 0
    cutoff = tol.rank_cutoff(sla.svdvals(np.hstack([A, B])), (n, n + B.shape[1]))
    Aw = A.copy()
    Bcur = B.copy()
    k = 0
    while k < n:
        U, sv, _ = sla.svd(Bcur)
        r = int(np.sum(sv > cutoff))
        if r == 0:
            break
        # rotate the unprocessed trailing block by U on both sides
        Z[:, k:] = Z[:, k:] @ U
        Aw[k:, :] = U.T @ Aw[k:, :]
        Aw[:, k:] = Aw[:, k:] @ U
        k += r
        if k >= n:
            break
        # next input block: coupling of the new states into the remaining ones
        Bcur = Aw[k:, k - r:k]
    return Z, k


def staircase_controllable(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> StaircaseResult:
    """Staircase form of (A, B); leading block is the controllable part."""
    Z, k = _stair(sys.A, sys.B, tol)
    transformed = StateSpaceSystem(Z.T @ sys.A @ Z, Z.T @ sys.B, sys.C @ Z, sys.D)
    return StaircaseResult(transformed, k, Z)


def staircase_observable(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> StaircaseResult:
    """Dual staircase on (A^T, C^T); leading block is the observable part."""
    Z, k = _stair(sys.A.T, sys.C.T, tol)
    transformed = StateSpaceSystem(Z.T @ sys.A @ Z, Z.T @ sys.B, sys.C @ Z, sys.D)
    return StaircaseResult(transformed, k, Z)


def _leading(sys: StateSpaceSystem, k: int) -> StateSpaceSystem:
    return StateSpaceSystem(sys.A[:k, :k], sys.B[:k, :], sys.C[:, :k], sys.D)


def minimal_realization(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> StateSpaceSystem:
    """Controllable and observable realization with the same transfer function.

    Order zero with pure feedthrough D is a valid result.
    """
    sc = staircase_controllable(sys, tol)
    ctrb = _leading(sc.transformed, sc.controllable_dim)
    so = staircase_observable(ctrb, tol)
    return _leading(so.transformed, so.controllable_dim)
