"""Nearest port-Hamiltonian system by a fast projected gradient method.

For a realization (E, A, B, C, D) the decomposition variables
(M, J, R, F, P, S) are driven to minimize the weighted objective

    w1 ||E - M||_F^2 + w2 ||A - (J - R)||_F^2 + w3 ||B - (F - P)||_F^2
    + w4 ||C - (F + P)^T||_F^2 + w5 ||(D + D^T)/2 - S||_F^2

subject to J skew-symmetric, M >= 0 and [[R, P], [P^T, S]] >= 0.  The block
constraint is projected jointly (projecting R, P, S separately would not keep
the passivity block semidefinite).  Accelerated gradient steps use the fixed
step 1/L from the blockwise Lipschitz constant, with a function-value restart
of the momentum whenever the objective increases.

This objective is measured in the coordinates the realization happens to use.
:func:`nearest_ph_realization` therefore first moves a stable passive system
into storage-normalized coordinates (through the KYP certificate), where the
natural split of the system matrices is already feasible; for non-passive
inputs it optimizes in the given coordinates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .kyp import passivity_check, ph_from_kyp
from .systems import (DEFAULT_TOL, DescriptorSystem, PHSystem,
                      StateSpaceSystem, Tolerances)

__all__ = [
    "PHDecomposition",
    "FGMOptions",
    "OptTrace",
    "project_skew",
    "project_psd",
    "objective",
    "objective_gradient",
    "natural_split",
    "random_decomposition",
    "lmi_init",
    "fgm_nearest_ph",
    "nearest_ph_realization",
]


def project_skew(X: np.ndarray) -> np.ndarray:
    """Frobenius-nearest skew-symmetric matrix, (X - X^T) / 2."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError("project_skew requires a square matrix")
    return (X - X.T) / 2.0


def project_psd(X: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix.

    Symmetrizes first, then clips negative eigenvalues at zero.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError("project_psd requires a square matrix")
    if X.shape[0] == 0:
        return X.copy()
    w, V = np.linalg.eigh((X + X.T) / 2.0)
    return (V * np.clip(w, 0.0, None)) @ V.T


@dataclass(frozen=True)
class PHDecomposition:
    """Candidate decomposition (M, J, R, F, P, S) of a realization."""

    M: np.ndarray
    J: np.ndarray
    R: np.ndarray
    F: np.ndarray
    P: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        n, m = np.shape(self.F)
        for name in ("M", "J", "R"):
            if np.shape(getattr(self, name)) != (n, n):
                raise DimensionError(f"{name} must be {n} x {n}")
        if np.shape(self.P) != (n, m) or np.shape(self.S) != (m, m):
            raise DimensionError("P must match F and S must be square of port size")
        for name in ("M", "J", "R", "F", "P", "S"):
            a = np.array(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def order(self) -> int:
        return self.F.shape[0]

    @property
    def num_ports(self) -> int:
        return self.F.shape[1]

    @property
    def passivity_block(self) -> np.ndarray:
        return np.block([[self.R, self.P], [self.P.T, self.S]])

    def feasibility_violations(self) -> dict[str, float]:
        """Measured violations of skewness of J and semidefiniteness of M, W."""
        def min_eig(M):
            if M.shape[0] == 0:
                return 0.0
            return float(np.linalg.eigvalsh((M + M.T) / 2.0).min())
        return {
            "J_skew": float(np.linalg.norm(self.J + self.J.T, "fro")),
            "M_psd": max(0.0, -min_eig(self.M)),
            "W_psd": max(0.0, -min_eig(self.passivity_block)),
        }

    def is_feasible(self, psd_tol: float = DEFAULT_TOL.psd_tol) -> bool:
        return all(v <= psd_tol for v in self.feasibility_violations().values())


@dataclass(frozen=True)
class FGMOptions:
    """Tuning knobs for the projected fast gradient method.

    ``weights`` are the five nonnegative term weights (E, A, B, C, S terms).
    ``step_policy`` chooses the step 1/L: "fixed" uses the conservative bound
    L = 4 max(weights), "lipschitz" the exact blockwise constant.  ``seed``
    selects the starting point when no explicit initialization is given:
    0 starts from the projected natural split, any other value from a seeded
    random feasible decomposition (useful for multistarts).
    """

    max_iters: int = 10_000
    step_policy: str = "lipschitz"
    restart: bool = True
    weights: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)
    seed: int = 0
    stop_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step_policy not in ("fixed", "lipschitz"):
            raise ValueError("step_policy must be 'fixed' or 'lipschitz'")
        if len(self.weights) != 5 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be five nonnegative reals")

    def lipschitz_bound(self) -> float:
        w1, w2, w3, w4, w5 = self.weights
        if self.step_policy == "fixed":
            return 4.0 * max(self.weights)
        return max(2.0 * w1, 4.0 * w2, 4.0 * w3, 4.0 * w4, 2.0 * w5, 1e-300)


@dataclass(frozen=True)
class OptTrace:
    objective_per_iter: np.ndarray
    restarts: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        v = np.asarray(self.objective_per_iter, dtype=float)
        if v.size == 0 or np.any(v < 0):
            raise ValueError("objective trace must be nonempty and nonnegative")
        v.flags.writeable = False
        object.__setattr__(self, "objective_per_iter", v)

    @property
    def final_objective(self) -> float:
        return float(self.objective_per_iter[-1])


def _target(sys: DescriptorSystem | StateSpaceSystem):
    if isinstance(sys, StateSpaceSystem):
        return np.eye(sys.order), sys.A, sys.B, sys.C, sys.D
    return sys.E, sys.A, sys.B, sys.C, sys.D


def objective(dec: PHDecomposition, sys: DescriptorSystem | StateSpaceSystem,
              weights=(1.0, 1.0, 1.0, 1.0, 1.0)) -> float:
    """Weighted squared Frobenius distance of the decomposition to the data."""
    E, A, B, C, D = _target(sys)
    w1, w2, w3, w4, w5 = weights
    Ds = (D + D.T) / 2.0
    return float(
        w1 * np.linalg.norm(E - dec.M, "fro") ** 2
        + w2 * np.linalg.norm(A - (dec.J - dec.R), "fro") ** 2
        + w3 * np.linalg.norm(B - (dec.F - dec.P), "fro") ** 2
        + w4 * np.linalg.norm(C - (dec.F + dec.P).T, "fro") ** 2
        + w5 * np.linalg.norm(Ds - dec.S, "fro") ** 2)


def objective_gradient(dec: PHDecomposition, sys: DescriptorSystem | StateSpaceSystem,
                       weights=(1.0, 1.0, 1.0, 1.0, 1.0)) -> dict[str, np.ndarray]:
    """Analytic gradient of :func:`objective` with respect to each block."""
    E, A, B, C, D = _target(sys)
    w1, w2, w3, w4, w5 = weights
    Ds = (D + D.T) / 2.0
    dA = (dec.J - dec.R) - A
    dB = (dec.F - dec.P) - B
    dC = (dec.F + dec.P) - C.T
    return {
        "M": 2.0 * w1 * (dec.M - E),
        "J": 2.0 * w2 * dA,
        "R": -2.0 * w2 * dA,
        "F": 2.0 * w3 * dB + 2.0 * w4 * dC,
        "P": -2.0 * w3 * dB + 2.0 * w4 * dC,
        "S": 2.0 * w5 * (dec.S - Ds),
    }


def project_feasible(dec: PHDecomposition) -> PHDecomposition:
    """Project onto the constraint set: J skew, M PSD, joint (R, P, S) block PSD."""
    n = dec.order
    W = project_psd(dec.passivity_block)
    return PHDecomposition(M=project_psd(dec.M), J=project_skew(dec.J),
                           R=W[:n, :n], F=dec.F, P=W[:n, n:], S=W[n:, n:])


def natural_split(sys: DescriptorSystem | StateSpaceSystem) -> PHDecomposition:
    """Feasible projection of the obvious split of the system matrices."""
    E, A, B, C, D = _target(sys)
    dec = PHDecomposition(M=E, J=(A - A.T) / 2.0, R=-(A + A.T) / 2.0,
                          F=(B + C.T) / 2.0, P=(C.T - B) / 2.0, S=(D + D.T) / 2.0)
    return project_feasible(dec)


def random_decomposition(n: int, m: int, seed: int, scale: float = 1.0) -> PHDecomposition:
    """Random feasible decomposition used for multistart initializations."""
    rng = np.random.default_rng(seed)
    dec = PHDecomposition(M=scale * rng.standard_normal((n, n)),
                          J=scale * rng.standard_normal((n, n)),
                          R=scale * rng.standard_normal((n, n)),
                          F=scale * rng.standard_normal((n, m)),
                          P=scale * rng.standard_normal((n, m)),
                          S=scale * rng.standard_normal((m, m)))
    return project_feasible(dec)


def lmi_init(sys: StateSpaceSystem, tol: Tolerances = DEFAULT_TOL) -> PHDecomposition:
    """Initialization from the KYP certificate (works when nearly passive).

    Runs the KYP pipeline and reads the decomposition off the resulting pH
    form with M = I.  When the system has no certificate this falls back to a
    seeded random feasible decomposition with a warning.
    """
    verdict = passivity_check(sys, tol)
    if verdict.passive:
        ph = ph_from_kyp(sys, verdict.certificate, tol)
        return PHDecomposition(M=np.eye(sys.order), J=ph.J, R=ph.R,
                               F=ph.F, P=ph.P, S=ph.S)
    warnings.warn("system is not certified passive; falling back to a random "
                  "feasible initialization", stacklevel=2)
    scale = 1.0 + float(np.linalg.norm(sys.A, "fro")) / max(sys.order, 1)
    return random_decomposition(sys.order, sys.num_ports, seed=0, scale=scale)


def _assemble_ph(dec: PHDecomposition, sys, tol: Tolerances) -> PHSystem:
    """Turn a feasible decomposition into a PHSystem.

    When M is invertible the standard form with E = I and Q = M^{-1} is
    reported (the realized transfer equals the descriptor form M x' = ...
    under the state change z = M x); a singular M keeps E = M with Q = I.
    """
    _, _, _, _, D = _target(sys)
    n = dec.order
    N = (D - D.T) / 2.0
    Msym = (dec.M + dec.M.T) / 2.0
    w = np.linalg.eigvalsh(Msym) if n else np.zeros(0)
    invertible = n == 0 or w.min() > tol.rank_tol * n * max(float(w.max()), 0.0)
    if invertible:
        Q = np.linalg.inv(Msym) if n else np.zeros((0, 0))
        Q = (Q + Q.T) / 2.0
        return PHSystem(E=np.eye(n), J=dec.J, R=dec.R, Q=Q,
                        F=dec.F, P=dec.P, S=dec.S, N=N)
    warnings.warn("M is numerically singular; returning the descriptor form with "
                  "E = M and Q = I", stacklevel=3)
    return PHSystem(E=Msym, J=dec.J, R=dec.R, Q=np.eye(n),
                    F=dec.F, P=dec.P, S=dec.S, N=N)


def fgm_nearest_ph(sys: DescriptorSystem | StateSpaceSystem,
                   init: PHDecomposition | None = None,
                   opts: FGMOptions = FGMOptions(),
                   tol: Tolerances = DEFAULT_TOL
                   ) -> tuple[PHSystem, PHDecomposition, OptTrace]:
    """Minimize the decomposition objective by projected accelerated descent.

    The iterate trace records the objective of every (feasible) iterate; the
    best iterate found is returned, so the best-so-far sequence is monotone
    even though the accelerated sequence itself may oscillate.  Stops when
    the relative decrease of the best objective over ten iterations falls
    below ``stop_tol``, or at ``max_iters`` (with a warning).
    """
    if init is not None:
        x = project_feasible(init)
    elif opts.seed == 0:
        x = natural_split(sys)
    else:
        E, A, _, _, _ = _target(sys)
        scale = 1.0 + float(np.linalg.norm(A, "fro")) / max(sys.order, 1)
        x = random_decomposition(sys.order, sys.num_ports, opts.seed, scale)
    if x.order != sys.order or x.num_ports != sys.num_ports:
        raise DimensionError("initialization does not match the system dimensions")

    w = opts.weights
    step = 1.0 / opts.lipschitz_bound()

    def take_step(point: PHDecomposition) -> PHDecomposition:
        g = objective_gradient(point, sys, w)
        return project_feasible(PHDecomposition(
            M=point.M - step * g["M"], J=point.J - step * g["J"],
            R=point.R - step * g["R"], F=point.F - step * g["F"],
            P=point.P - step * g["P"], S=point.S - step * g["S"]))

    f_x = objective(x, sys, w)
    y = x
    t_k = 1.0
    best_f, best_x = f_x, x
    trace = [f_x]
    restarts: list[int] = []
    best_history = [best_f]

    for it in range(opts.max_iters):
        xn = take_step(y)
        fn = objective(xn, sys, w)
        if opts.restart and fn > f_x:
            # momentum made things worse: restart from the last iterate
            restarts.append(it)
            t_k = 1.0
            xn = take_step(x)
            fn = objective(xn, sys, w)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
        beta = (t_k - 1.0) / t_next
        y = PHDecomposition(M=xn.M + beta * (xn.M - x.M), J=xn.J + beta * (xn.J - x.J),
                            R=xn.R + beta * (xn.R - x.R), F=xn.F + beta * (xn.F - x.F),
                            P=xn.P + beta * (xn.P - x.P), S=xn.S + beta * (xn.S - x.S))
        x, f_x, t_k = xn, fn, t_next
        trace.append(fn)
        if fn < best_f:
            best_f, best_x = fn, xn
        best_history.append(best_f)
        if len(best_history) > 10:
            ref = best_history[-11]
            if ref - best_f <= opts.stop_tol * max(ref, opts.stop_tol):
                break
    else:
        warnings.warn(f"maximum iterations ({opts.max_iters}) reached; returning the "
                      "best iterate", stacklevel=2)

    dec = best_x
    ph = _assemble_ph(dec, sys, tol)
    return ph, dec, OptTrace(np.asarray(trace), tuple(restarts))


def nearest_ph_realization(sys: StateSpaceSystem, opts: FGMOptions = FGMOptions(),
                           tol: Tolerances = DEFAULT_TOL
                           ) -> tuple[PHSystem, PHDecomposition, OptTrace, bool]:
    """Full nearest-pH workflow for a standard state-space system.

    A stable passive system is first moved to storage-normalized coordinates
    (state change z = T x from the Cholesky factor of the KYP certificate);
    there the natural split is feasible, which is the useful sense of the
    LMI-based initialization.  Systems whose given coordinates already fit a
    pH split to roundoff skip the normalization (nothing to gain), and
    non-passive systems are optimized in their given coordinates starting
    from the projected natural split.  Returns the pH model, the
    decomposition, the trace, and whether normalization ran.
    """
    E, A, B, C, D = _target(sys)
    scale = max(1.0, sum(float(np.linalg.norm(M, "fro") ** 2) for M in (E, A, B, C, D)))
    already_fits = objective(natural_split(sys), sys, opts.weights) <= 1e-20 * scale
    normalized = False
    work = sys
    if not already_fits:
        verdict = passivity_check(sys, tol)
        if verdict.passive:
            ph0 = ph_from_kyp(sys, verdict.certificate, tol)
            work = StateSpaceSystem((ph0.J - ph0.R), ph0.F - ph0.P, (ph0.F + ph0.P).T,
                                    sys.D)
            normalized = True
    ph, dec, trace = fgm_nearest_ph(work, None, opts, tol)
    return ph, dec, trace, normalized
