"""Positive-real balanced truncation and pH construction for reduced models.

The positive-real controllability and observability Gramians are the minimal
(stabilizing) solutions of the Lur'e equations

    A X + X A^T = -Kc Kc^T,   X C^T - B = -Kc Jc^T,   Jc Jc^T = D + D^T
    A^T Y + Y A = -Ko^T Ko,   Y B - C^T = -Ko^T Jo,   Jo^T Jo = D + D^T,

solved through the equivalent positive-real Riccati equations when D + D^T
is nonsingular (the solver is shared with the KYP module).  A singular
D + D^T is shifted to D + D^T + eps I with eps = 1e-6 (1 + ||D||), the common
regularization; the shift is recorded in the result so downstream consumers
can see it.  Balancing uses the square-root method: semidefinite factors of
both Gramians and one SVD of their cross product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotPassiveError
from .kyp import ph_from_kyp, passivity_check, solve_kyp, solve_riccati_stabilizing, stability_check
from .systems import DEFAULT_TOL, PHSystem, StateSpaceSystem, Tolerances

__all__ = [
    "PRGramians",
    "PRSpectrum",
    "pr_gramians",
    "lure_residuals",
    "pr_characteristic_values",
    "prbt_reduce",
    "prbt_to_ph",
]

DEFAULT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class PRGramians:
    """Minimal positive-real Gramians with their Lur'e factor data.

    ``epsilon`` is zero when D + D^T was safely invertible and the shift was
    not needed; otherwise the factors satisfy Jc Jc^T = Jo^T Jo = D + D^T +
    epsilon I.
    """

    Xmin: np.ndarray
    Ymin: np.ndarray
    Kc: np.ndarray
    Jc: np.ndarray
    Ko: np.ndarray
    Jo: np.ndarray
    epsilon: float = 0.0


@dataclass(frozen=True)
class PRSpectrum:
    """Positive-real characteristic values, sorted in decreasing order."""

    pi_values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.pi_values, dtype=float)
        if np.any(np.diff(v) > 0) or np.any(v < 0):
            raise ValueError("pi_values must be nonnegative and sorted descending")
        v.flags.writeable = False
        object.__setattr__(self, "pi_values", v)

    def __len__(self) -> int:
        return self.pi_values.size


def pr_gramians(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> PRGramians:
    """Solve both positive-real Riccati equations for a stable system.

    Raises :class:`NotPassiveError` when the system is unstable or the
    stabilizing solutions do not exist (non-passive realization).
    """
    stable, abscissa = stability_check(sys)
    if not stable:
        raise NotPassiveError(f"system is not asymptotically stable (spectral abscissa "
                              f"{abscissa:.3e}); Gramians are undefined")
    m = sys.num_ports
    W0 = sys.D + sys.D.T
    lam = np.linalg.eigvalsh((W0 + W0.T) / 2.0)
    if lam.min() < -tol.psd_tol * (1.0 + float(np.abs(lam).max())):
        raise NotPassiveError("D + D^T has a negative eigenvalue; the system cannot be passive")
    epsilon = 0.0
    if lam.min() <= tol.rank_tol * m * max(float(np.abs(lam).max()), 1.0):
        epsilon = 1e-6 * (1.0 + float(np.linalg.norm(sys.D, 2)))
        W0 = W0 + epsilon * np.eye(m)

    A, B, C = sys.A, sys.B, sys.C
    CW = np.linalg.solve(W0, C)         # W0^{-1} C
    Acl = A - B @ CW
    # observability-type equation in standard form
    Ymin = solve_riccati_stabilizing(Acl, B @ np.linalg.solve(W0, B.T), C.T @ CW)
    # controllability-type equation is the transposed dual
    Xmin = solve_riccati_stabilizing(Acl.T, C.T @ CW, B @ np.linalg.solve(W0, B.T))

    Jc = sla.cholesky(W0, lower=True)
    Jo = sla.cholesky(W0, lower=False)
    Kc = sla.solve_triangular(Jc, (B - Xmin @ C.T).T, lower=True).T
    Ko = sla.solve_triangular(Jo.T, C - B.T @ Ymin, lower=True)
    return PRGramians(Xmin=Xmin, Ymin=Ymin, Kc=Kc, Jc=Jc, Ko=Ko, Jo=Jo, epsilon=epsilon)


def lure_residuals(sys: StateSpaceSystem, g: PRGramians) -> dict[str, float]:
    """Frobenius norms of all four Lur'e identities at the computed factors."""
    A, B, C = sys.A, sys.B, sys.C
    return {
        "controllability_lyap": float(np.linalg.norm(
            A @ g.Xmin + g.Xmin @ A.T + g.Kc @ g.Kc.T, "fro")),
        "controllability_port": float(np.linalg.norm(
            g.Xmin @ C.T - B + g.Kc @ g.Jc.T, "fro")),
        "observability_lyap": float(np.linalg.norm(
            A.T @ g.Ymin + g.Ymin @ A + g.Ko.T @ g.Ko, "fro")),
        "observability_port": float(np.linalg.norm(
            g.Ymin @ B - C.T + g.Ko.T @ g.Jo, "fro")),
    }


def _psd_factor(M: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Rank-revealing factor L with L L^T ~= M for a symmetric PSD matrix."""
    if M.shape[0] == 0:
        return np.zeros((0, 0))
    w, V = np.linalg.eigh((M + M.T) / 2.0)
    cutoff = tol.rank_tol * M.shape[0] * max(float(w[-1]), 0.0)
    keep = w > cutoff
    return V[:, keep] * np.sqrt(w[keep])


def pr_characteristic_values(g: PRGramians, E: np.ndarray | None = None,
                             tol: Tolerances = DEFAULT_TOL) -> PRSpectrum:
    """Square roots of the nonzero eigenvalues of Xmin E^T Ymin E.

    Computed as singular values of Ly^T E Lx for semidefinite factors of the
    Gramians, which clamps roundoff negatives at zero by construction.
    """
    n = g.Xmin.shape[0]
    if E is None:
        E = np.eye(n)
    Lx = _psd_factor(g.Xmin, tol)
    Ly = _psd_factor(g.Ymin, tol)
    if Lx.shape[1] == 0 or Ly.shape[1] == 0:
        return PRSpectrum(np.zeros(0))
    return PRSpectrum(sla.svdvals(Ly.T @ E @ Lx))


def prbt_reduce(sys: StateSpaceSystem, order: int | None = None,
                threshold: float | None = None, tol: Tolerances = DEFAULT_TOL
                ) -> tuple[StateSpaceSystem, PRSpectrum]:
    """Positive-real balanced truncation of a stable passive system.

    Exactly one reduction rule applies: an explicit ``order`` (clamped to the
    numerically balanceable dimension), or a relative ``threshold`` dropping
    characteristic values below ``threshold * pi_1`` (default 1e-8).  The
    feedthrough D is kept unchanged.  The reduced model is verified to be
    stable and passive before it is returned.
    """
    g = pr_gramians(sys, tol)
    Lx = _psd_factor(g.Xmin, tol)
    Ly = _psd_factor(g.Ymin, tol)
    if Lx.shape[1] == 0 or Ly.shape[1] == 0:
        spectrum = PRSpectrum(np.zeros(0))
        reduced = StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, sys.num_ports)),
                                   np.zeros((sys.num_ports, 0)), sys.D)
        return reduced, spectrum
    U, sv, Vt = sla.svd(Ly.T @ Lx)
    spectrum = PRSpectrum(sv)
    balanceable = int(np.sum(sv > tol.rank_cutoff(sv, (len(sv), len(sv)))))
    if order is not None:
        r = min(int(order), balanceable)
    else:
        thr = DEFAULT_THRESHOLD if threshold is None else float(threshold)
        r = int(np.sum(sv >= thr * sv[0])) if sv.size else 0
        r = min(r, balanceable)
    if r == 0:
        reduced = StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, sys.num_ports)),
                                   np.zeros((sys.num_ports, 0)), sys.D)
        return reduced, spectrum
    scale = 1.0 / np.sqrt(sv[:r])
    Wb = (U[:, :r] * scale).T @ Ly.T
    Tb = Lx @ (Vt[:r].T * scale)
    reduced = StateSpaceSystem(Wb @ sys.A @ Tb, Wb @ sys.B, sys.C @ Tb, sys.D)

    verdict = passivity_check(reduced, tol)
    if not verdict.stable:
        raise NotPassiveError(f"balanced truncation produced an unstable model "
                              f"(abscissa {verdict.spectral_abscissa:.3e})")
    if not verdict.passive:
        raise NotPassiveError("balanced truncation produced a model without a "
                              "passivity certificate")
    return reduced, spectrum


def prbt_to_ph(sys: StateSpaceSystem, order: int | None = None,
               threshold: float | None = None, tol: Tolerances = DEFAULT_TOL) -> PHSystem:
    """Reduce by positive-real balanced truncation, then transform to pH form."""
    reduced, _ = prbt_reduce(sys, order=order, threshold=threshold, tol=tol)
    sol = solve_kyp(reduced, tol)
    return ph_from_kyp(reduced, sol, tol)
