"""Passivity analysis via the KYP inequality and transformation to pH form.

For a stable system with D + D^T nonsingular, the boundary of the KYP linear
matrix inequality

    [[A^T Q + Q A,  Q B - C^T ],
     [B^T Q - C,   -(D + D^T)]]  <= 0

is the algebraic Riccati equation
A^T Q + Q A + (Q B - C^T)(D + D^T)^{-1}(B^T Q - C) = 0, solved here through
the stable invariant subspace of the associated Hamiltonian matrix (the
stabilizing, i.e. minimal, solution; any feasible solution produces a valid
pH form).  When D + D^T is singular, an orthogonal split of the feedthrough
isolates the lossless input directions: the storage matrix is pinned on the
span of their input maps by the constraint Q B2 = C2^T, and the remaining
free block is found by a semidefinite program on the reduced inequality.
The epsilon-perturbation D + D^T + eps*I is available as an opt-in fallback
only; it is not the default because its effect on the overall procedure is
not understood.

A Cholesky factor T^T T = Q of the certificate provides the state
transformation z = T x that takes the system to pH coordinates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConstraintViolationError, NotPassiveError
from .systems import (DEFAULT_TOL, PHSystem, StateSpaceSystem, Tolerances)

__all__ = [
    "KYPSolution",
    "PassivityVerdict",
    "stability_check",
    "solve_riccati_stabilizing",
    "kyp_lmi_matrix",
    "riccati_residual",
    "solve_kyp",
    "passivity_check",
    "ph_from_kyp",
]


@dataclass(frozen=True)
class KYPSolution:
    """Positive definite storage certificate for the KYP inequality."""

    Qhat: np.ndarray
    residual: float
    projected: bool
    U2basis: np.ndarray | None = None


@dataclass(frozen=True)
class PassivityVerdict:
    stable: bool
    passive: bool
    spectral_abscissa: float
    certificate: KYPSolution | None = None

    def __post_init__(self):
        if self.passive and self.certificate is None:
            raise ValueError("a passivity verdict requires a certificate")


def stability_check(sys: StateSpaceSystem) -> tuple[bool, float]:
    """Return (asymptotically stable, spectral abscissa of A)."""
    if sys.order == 0:
        return True, -np.inf
    abscissa = float(np.linalg.eigvals(sys.A).real.max())
    return abscissa < 0.0, abscissa


def solve_riccati_stabilizing(Ahat: np.ndarray, Ghat: np.ndarray, Q0: np.ndarray) -> np.ndarray:
    """Stabilizing solution X of  Ahat^T X + X Ahat + X Ghat X + Q0 = 0.

    Computed from the n-dimensional stable invariant subspace of the
    Hamiltonian matrix [[Ahat, Ghat], [-Q0, -Ahat^T]].

    Raises
    ------
    NotPassiveError
        When the Hamiltonian matrix has eigenvalues on the imaginary axis or
        the subspace does not parameterize a solution.
    """
    n = Ahat.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    H = np.block([[Ahat, Ghat], [-Q0, -Ahat.T]])
    _, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise NotPassiveError("Hamiltonian matrix has eigenvalues on the imaginary axis; "
                              "no stabilizing Riccati solution exists")
    U1 = Z[:n, :n]
    U2 = Z[n:, :n]
    sv = sla.svdvals(U1)
    if sv[-1] <= np.finfo(float).eps * n * sv[0]:
        raise NotPassiveError("stable invariant subspace does not define a Riccati solution")
    X = np.linalg.solve(U1.T, U2.T).T
    return (X + X.T) / 2.0


def kyp_lmi_matrix(sys: StateSpaceSystem, Qhat: np.ndarray) -> np.ndarray:
    """Assemble the KYP block matrix at a candidate certificate."""
    top = sys.A.T @ Qhat + Qhat @ sys.A
    off = Qhat @ sys.B - sys.C.T
    return np.block([[top, off], [off.T, -(sys.D + sys.D.T)]])


def riccati_residual(sys: StateSpaceSystem, Qhat: np.ndarray) -> float:
    """Frobenius norm of the Riccati operator at Qhat (D + D^T nonsingular)."""
    W0 = sys.D + sys.D.T
    off = Qhat @ sys.B - sys.C.T
    res = sys.A.T @ Qhat + Qhat @ sys.A + off @ np.linalg.solve(W0, off.T)
    return float(np.linalg.norm(res, "fro"))


def _lmi_max_eig(sys: StateSpaceSystem, Qhat: np.ndarray) -> float:
    M = kyp_lmi_matrix(sys, Qhat)
    M = (M + M.T) / 2.0
    return float(np.linalg.eigvalsh(M).max()) if M.size else 0.0


def _solve_kyp_direct(sys: StateSpaceSystem, W0: np.ndarray, tol: Tolerances) -> np.ndarray:
    Ahat = sys.A - sys.B @ np.linalg.solve(W0, sys.C)
    Ghat = sys.B @ np.linalg.solve(W0, sys.B.T)
    Q0 = sys.C.T @ np.linalg.solve(W0, sys.C)
    Qhat = solve_riccati_stabilizing(Ahat, Ghat, Q0)
    if Qhat.size and np.linalg.eigvalsh(Qhat).min() <= 0.0:
        raise NotPassiveError("stabilizing Riccati solution is not positive definite; "
                              "the realization is not passive (consider the nearest-pH method)")
    return Qhat


def _sdp_complement(A, B1h, C1h, D1h, Qpin, Uc, tol: Tolerances) -> np.ndarray:
    """Maximize the definiteness margin of Q over the unpinned block.

    Solves  max t  s.t.  reduced KYP block(Q) <= 0,  Q >= t I, with
    Q = Qpin + Uc Q22 Uc^T; the lossless constraint holds exactly by
    construction of Qpin.
    """
    import cvxpy as cp

    n = A.shape[0]
    nc = Uc.shape[1]
    Q22 = cp.Variable((nc, nc), symmetric=True)
    t = cp.Variable()
    Q = Qpin + Uc @ Q22 @ Uc.T
    top = A.T @ Q + Q @ A
    if B1h.shape[1] > 0:
        off = Q @ B1h - C1h.T
        lmi = cp.bmat([[top, off], [off.T, -(D1h + D1h.T)]])
    else:
        lmi = top
    problem = cp.Problem(cp.Maximize(t), [lmi << 0, Q >> t * np.eye(n)])
    for solver in ("CLARABEL", "SCS", "CVXOPT"):
        try:
            problem.solve(solver=solver)
        except Exception:  # solver-specific failure: try the next one
            continue
        if problem.status in ("optimal", "optimal_inaccurate") and Q22.value is not None:
            break
    else:
        raise NotPassiveError("projected KYP inequality could not be solved (infeasible "
                              "or every installed conic solver failed)")
    if t.value is None or t.value <= tol.psd_tol:
        raise NotPassiveError("projected KYP inequality admits no positive definite "
                              "solution; the realization is not passive")
    return Uc @ Q22.value @ Uc.T


def solve_kyp(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL,
              epsilon: float | None = None) -> KYPSolution:
    """Positive definite solution of the KYP inequality for a stable system.

    With D + D^T positive definite the Riccati route applies directly.  With
    D + D^T singular the problem is projected: an orthogonal U2 splits the
    feedthrough into a definite block and lossless directions, the storage
    matrix is pinned on the lossless input span by Q B2 = C2^T (verified to
    ``residual_tol``), and the free block is completed by a semidefinite
    program.  Passing ``epsilon`` instead regularizes D + D^T + eps I and
    takes the direct route (opt-in fallback).

    Raises
    ------
    NotPassiveError
        When no positive definite certificate exists.
    ConstraintViolationError
        When the lossless constraint is inconsistent beyond ``residual_tol``.
    """
    stable, abscissa = stability_check(sys)
    if not stable:
        raise NotPassiveError(f"system is not asymptotically stable (spectral abscissa "
                              f"{abscissa:.3e}); stabilize before the KYP solve")
    n, m = sys.order, sys.num_ports
    W0 = sys.D + sys.D.T
    lam, U2 = np.linalg.eigh((W0 + W0.T) / 2.0)
    lam, U2 = lam[::-1], U2[:, ::-1]
    scaleD = 1.0 + float(np.abs(lam).max())
    if lam.min() < -tol.psd_tol * scaleD:
        raise NotPassiveError("D + D^T has a negative eigenvalue; the system cannot be passive")
    r = int(np.sum(lam > tol.rank_tol * m * max(float(np.abs(lam).max()), 1.0)))

    if epsilon is not None and r < m:
        Qhat = _solve_kyp_direct(sys, W0 + float(epsilon) * np.eye(m), tol)
        return KYPSolution(Qhat, _lmi_max_eig(sys, Qhat), projected=False)

    if r == m:
        Qhat = _solve_kyp_direct(sys, W0, tol)
        return KYPSolution(Qhat, _lmi_max_eig(sys, Qhat), projected=False)

    # projected path: split off lossless directions
    Bh = sys.B @ U2
    Ch = U2.T @ sys.C
    B1h, B2h = Bh[:, :r], Bh[:, r:]
    C1h, C2h = Ch[:r, :], Ch[r:, :]
    D1h = np.diag(lam[:r]) / 2.0  # so that D1h + D1h^T = diag(lam_r)

    scale = 1.0 + float(np.linalg.norm(B2h)) + float(np.linalg.norm(C2h))
    Ub_full, sb, _ = sla.svd(B2h) if n else (np.eye(0), np.zeros(0), None)
    p = int(np.sum(sb > tol.rank_cutoff(sb, B2h.shape))) if n else 0

    if p == 0:
        if np.linalg.norm(C2h) > tol.residual_tol * scale:
            raise NotPassiveError("lossless input directions carry no input map but a "
                                  "nonzero output map; Q B2 = C2^T is unsolvable")
        Qpin = np.zeros((n, n))
        Uc = np.eye(n)
    else:
        Ub = Ub_full[:, :p]
        Uc = sla.null_space(Ub.T)
        Bb = Ub.T @ B2h
        Bb_pinv = np.linalg.pinv(Bb)
        Q11 = (Ub.T @ C2h.T) @ Bb_pinv
        X21 = (Uc.T @ C2h.T) @ Bb_pinv
        Qpin = Ub @ Q11 @ Ub.T + Ub @ X21.T @ Uc.T + Uc @ X21 @ Ub.T
        cons_res = float(np.linalg.norm(Qpin @ B2h - C2h.T, "fro"))
        sym_res = float(np.linalg.norm(Q11 - Q11.T, "fro"))
        if max(cons_res, sym_res) > tol.residual_tol * scale:
            raise ConstraintViolationError(
                f"lossless constraint Q B2 = C2^T is inconsistent "
                f"(residual {cons_res:.3e}, asymmetry {sym_res:.3e})")
        Qpin = (Qpin + Qpin.T) / 2.0

    if Uc.shape[1] == 0:
        Qhat = Qpin
    else:
        Qhat = Qpin + _sdp_complement(sys.A, B1h, C1h, D1h, Qpin, Uc, tol)
        Qhat = (Qhat + Qhat.T) / 2.0

    if n and np.linalg.eigvalsh(Qhat).min() <= 0.0:
        raise NotPassiveError("projected KYP certificate is not positive definite; "
                              "the realization is not passive")
    residual = _lmi_max_eig(sys, Qhat)
    lmi_scale = 1.0 + float(np.linalg.norm(kyp_lmi_matrix(sys, Qhat), 2)) if n + m else 1.0
    if residual > tol.psd_tol * lmi_scale:
        raise NotPassiveError(f"KYP inequality is infeasible at the computed certificate "
                              f"(max eigenvalue {residual:.3e})")
    return KYPSolution(Qhat, residual, projected=True, U2basis=U2)


def passivity_check(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> PassivityVerdict:
    """Stability plus passivity verdict; attaches the certificate on success."""
    stable, abscissa = stability_check(sys)
    if not stable:
        return PassivityVerdict(False, False, abscissa)
    try:
        cert = solve_kyp(sys, tol)
    except (NotPassiveError, ConstraintViolationError):
        return PassivityVerdict(True, False, abscissa)
    return PassivityVerdict(True, True, abscissa, cert)


def ph_from_kyp(sys: StateSpaceSystem, sol: KYPSolution,
                tol: Tolerances = DEFAULT_TOL, factorization: str = "cholesky") -> PHSystem:
    """Transform a system with KYP certificate Qhat into explicit pH form.

    A factor T with T^T T = Qhat defines the state transformation z = T x,
    under which

        J = (T A T^{-1} - (T A T^{-1})^T) / 2
        R = -(T A T^{-1} + (T A T^{-1})^T) / 2
        F = (T B + (C T^{-1})^T) / 2
        P = (-T B + (C T^{-1})^T) / 2
        S = (D + D^T) / 2,   N = (D - D^T) / 2,   Q = E = I.

    The transfer function is preserved exactly up to roundoff.  The default
    factor is triangular (Cholesky); ``factorization="sqrtm"`` selects the
    symmetric matrix square root, which satisfies the same identity.
    """
    n, m = sys.order, sys.num_ports
    Qhat = np.asarray(sol.Qhat, dtype=float)
    if n:
        if np.linalg.eigvalsh((Qhat + Qhat.T) / 2.0).min() <= 0.0:
            raise NotPassiveError("certificate must be positive definite to factor")
        if factorization == "cholesky":
            T = sla.cholesky(Qhat, lower=False)  # upper factor: T^T T = Qhat
        elif factorization == "sqrtm":
            w, V = np.linalg.eigh((Qhat + Qhat.T) / 2.0)
            T = (V * np.sqrt(w)) @ V.T
        else:
            raise ValueError(f"unknown factorization {factorization!r}")
        condT = float(np.linalg.cond(T))
        if condT > tol.cond_limit():
            warnings.warn(f"Cholesky-type factor of the certificate is ill conditioned "
                          f"(cond {condT:.2e}); transformed matrices may be inaccurate",
                          stacklevel=2)
        Tinv = np.linalg.inv(T)
        At = T @ sys.A @ Tinv
        Bt = T @ sys.B
        Ct = sys.C @ Tinv
    else:
        At = np.zeros((0, 0))
        Bt = np.zeros((0, m))
        Ct = np.zeros((m, 0))
    J = (At - At.T) / 2.0
    R = -(At + At.T) / 2.0
    F = (Bt + Ct.T) / 2.0
    P = (-Bt + Ct.T) / 2.0
    S = (sys.D + sys.D.T) / 2.0
    N = (sys.D - sys.D.T) / 2.0
    eye = np.eye(n)
    return PHSystem(E=eye, J=J, R=R, Q=eye, F=F, P=P, S=S, N=N)
