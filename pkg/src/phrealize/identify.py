"""Unstructured realization from time-domain input/output samples.

Markov parameters are recovered by least-squares deconvolution of the sample
sequence, and a state-space model is realized from them by the eigensystem
realization algorithm (block-Hankel factorization).  The realized model is
discrete time; an exact bilinear (Tustin) map converts it to continuous time
using the sample period, so that G_c(s) = G_d(z) under
z = (1 + s dt/2) / (1 - s dt/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (DimensionError, InsufficientDataError,
                     RankDeficientExcitationError)
from .systems import DEFAULT_TOL, StateSpaceSystem, Tolerances

__all__ = [
    "IOSequence",
    "MarkovEstimate",
    "markov_from_io",
    "era_realize",
    "simulate_discrete",
    "bilinear_to_continuous",
    "bilinear_to_discrete",
]


@dataclass(frozen=True)
class IOSequence:
    """k pairs of input/output samples on a uniform time grid of step dt."""

    dt: float
    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if self.dt <= 0:
            raise DimensionError("dt must be positive")
        if u.shape != y.shape:
            raise DimensionError("inputs and outputs must have equal length and "
                                 "equal (square) channel count")
        u.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "inputs", u)
        object.__setattr__(self, "outputs", y)

    @property
    def num_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def num_channels(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class MarkovEstimate:
    """Markov parameters H_0..H_horizon and the deconvolution residual."""

    parameters: tuple[np.ndarray, ...]
    residual: float

    def __len__(self) -> int:
        return len(self.parameters)


def markov_from_io(seq: IOSequence, horizon: int, tol: Tolerances = DEFAULT_TOL
                   ) -> MarkovEstimate:
    """Least-squares deconvolution y = H * u for H_0..H_horizon.

    Stacks the regressors [u_i; u_{i-1}; ...; u_{i-horizon}] and solves for
    the block row [H_0 ... H_horizon]; requires the input to be persistently
    exciting (full column rank of the regressor matrix).

    Raises
    ------
    RankDeficientExcitationError
        When the regressor matrix is rank deficient for this horizon.
    """
    k, m = seq.num_samples, seq.num_channels
    if horizon < 0 or k <= horizon:
        raise InsufficientDataError(f"need more than {horizon} samples, got {k}")
    ncols = (horizon + 1) * m
    Phi = np.zeros((k, ncols))
    for lag in range(horizon + 1):
        Phi[lag:, lag * m:(lag + 1) * m] = seq.inputs[:k - lag]
    sv = sla.svdvals(Phi)
    if sv[-1] <= tol.rank_cutoff(sv, Phi.shape):
        raise RankDeficientExcitationError(
            f"input sequence does not excite all {ncols} regressor directions")
    Theta, res, _, _ = np.linalg.lstsq(Phi, seq.outputs, rcond=None)
    fit = Phi @ Theta
    residual = float(np.linalg.norm(seq.outputs - fit, "fro"))
    markov = tuple(Theta[lag * m:(lag + 1) * m, :].T.copy()
                   for lag in range(horizon + 1))
    tail = float(np.linalg.norm(markov[-1], "fro"))
    scale = max(float(np.linalg.norm(H, "fro")) for H in markov)
    if scale > 0 and tail > tol.freq_tol * scale:
        warnings.warn("trailing Markov parameters have not decayed; the record may "
                      "be too short for the system to reach steady state", stacklevel=2)
    return MarkovEstimate(markov, residual)


def _block_hankel(markov: Sequence[np.ndarray], rows: int, cols: int, shift: int) -> np.ndarray:
    m = markov[0].shape[0]
    H = np.zeros((rows * m, cols * m))
    for i in range(rows):
        for j in range(cols):
            H[i * m:(i + 1) * m, j * m:(j + 1) * m] = markov[i + j + shift]
    return H


def era_realize(markov: Sequence[np.ndarray], order: int | str = "auto",
                tol: Tolerances = DEFAULT_TOL) -> StateSpaceSystem:
    """Discrete-time realization from Markov parameters H_0, H_1, ...

    Factorizes the block-Hankel matrix of H_1.. into observability and
    controllability factors; ``order="auto"`` keeps the numerical rank of the
    Hankel matrix.  H_0 becomes the feedthrough.  The realized model satisfies
    H_k = C A^{k-1} B for k >= 1 up to the truncation level.

    Raises
    ------
    InsufficientDataError
        When fewer Markov parameters are given than the Hankel matrix of the
        requested order needs.
    """
    markov = [np.atleast_2d(np.asarray(H, dtype=float)) for H in markov]
    if not markov:
        raise InsufficientDataError("no Markov parameters given")
    m = markov[0].shape[0]
    if any(H.shape != (m, m) for H in markov):
        raise DimensionError("all Markov parameters must be square of equal size")
    D = markov[0]
    N = len(markov) - 1  # impulse terms available: H_1..H_N
    if N < 2:
        if N >= 0 and all(np.linalg.norm(H) == 0.0 for H in markov[1:]):
            return StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, m)),
                                    np.zeros((m, 0)), D)
        raise InsufficientDataError("need at least H_0..H_2 to realize dynamics")
    rows = N // 2
    cols = N - rows
    H0 = _block_hankel(markov, rows, cols, 1)
    H1 = _block_hankel(markov, rows, cols, 2)
    U, sv, Vt = sla.svd(H0)
    rank = int(np.sum(sv > tol.rank_cutoff(sv, H0.shape)))
    if order == "auto" or order is None:
        r = rank
    else:
        r = int(order)
        if r > min(H0.shape):
            raise InsufficientDataError(
                f"order {r} exceeds the {min(H0.shape)} x {min(H0.shape)} Hankel matrix; "
                "supply more Markov parameters")
        r = min(r, rank)
    if r == 0:
        return StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), D)
    sqrt_s = np.sqrt(sv[:r])
    Obs = U[:, :r] * sqrt_s
    Con = (Vt[:r, :].T * sqrt_s).T
    A = (U[:, :r] / sqrt_s).T @ H1 @ (Vt[:r, :].T / sqrt_s)
    B = Con[:, :m]
    C = Obs[:m, :]
    return StateSpaceSystem(A, B, C, D)


def simulate_discrete(sys: StateSpaceSystem, inputs: np.ndarray,
                      x0: np.ndarray | None = None) -> np.ndarray:
    """Run x_{k+1} = A x_k + B u_k, y_k = C x_k + D u_k over an input record."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    k, m = inputs.shape
    if m != sys.num_ports:
        raise DimensionError("input record channel count does not match the system")
    x = np.zeros(sys.order) if x0 is None else np.asarray(x0, dtype=float)
    out = np.zeros((k, m))
    for i in range(k):
        out[i] = sys.C @ x + sys.D @ inputs[i]
        x = sys.A @ x + sys.B @ inputs[i]
    return out


def bilinear_to_continuous(sys: StateSpaceSystem, dt: float) -> StateSpaceSystem:
    """Inverse Tustin map; exact inverse of :func:`bilinear_to_discrete`.

    Requires that the discrete model has no eigenvalue at -1 (which would map
    to infinite frequency).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = sys.order
    if n == 0:
        return sys
    beta = dt / 2.0
    ApI = sys.A + np.eye(n)
    sv = sla.svdvals(ApI)
    if sv[-1] <= np.finfo(float).eps * n * sv[0]:
        raise ValueError("discrete system has an eigenvalue at -1; the bilinear map "
                         "is undefined")
    ApI_inv = np.linalg.inv(ApI)
    Ac = (sys.A - np.eye(n)) @ ApI_inv / beta
    M = ApI / 2.0                       # M = (I - beta Ac)^{-1}
    Minv = 2.0 * ApI_inv
    Bc = Minv @ Minv @ sys.B / (2.0 * beta)
    Cc = sys.C
    Dc = sys.D - beta * Cc @ M @ Bc
    return StateSpaceSystem(Ac, Bc, Cc, Dc)


def bilinear_to_discrete(sys: StateSpaceSystem, dt: float) -> StateSpaceSystem:
    """Tustin map with G_d(z) = G_c(s) at z = (1 + s dt/2)/(1 - s dt/2)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = sys.order
    if n == 0:
        return sys
    beta = dt / 2.0
    ImA = np.eye(n) - beta * sys.A
    M = np.linalg.inv(ImA)
    Ad = M @ (np.eye(n) + beta * sys.A)
    Bd = 2.0 * beta * M @ M @ sys.B
    Cd = sys.C
    Dd = sys.D + beta * sys.C @ M @ sys.B
    return StateSpaceSystem(Ad, Bd, Cd, Dd)
