"""Shared system representations, transfer evaluation, and pH validation.

All system types are immutable value objects over dense real matrices.
Complex arithmetic only appears inside :func:`eval_transfer`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Union

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, GridMismatchError, SingularPencilError

__all__ = [
    "Tolerances",
    "DescriptorSystem",
    "SemiExplicitSystem",
    "StateSpaceSystem",
    "PHSystem",
    "FrequencyResponse",
    "ValidationCheck",
    "ValidationReport",
    "eval_transfer",
    "frequency_response",
    "default_grid",
    "validate_ph",
    "response_error",
    "ph_to_statespace",
]

_EPS = float(np.finfo(float).eps)


def _mat(x, name: str) -> np.ndarray:
    a = np.array(x, dtype=float, order="C")
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a 2-d real matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError(f"{name} contains non-finite entries")
    a.flags.writeable = False
    return a


def _freeze(obj) -> None:
    # bypass the frozen-dataclass guard while normalizing fields in __post_init__
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, np.ndarray) or (f.type and "ndarray" in str(f.type)):
            object.__setattr__(obj, f.name, _mat(v, f.name))


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerance policy used across the pipeline.

    rank_tol is a relative factor: singular values below
    ``rank_tol * max(shape) * sigma_max`` count as zero, so the default
    reproduces the usual ``n * eps * sigma_max`` rank cutoff.  psd_tol and
    residual_tol are absolute slacks that callers scale by a problem norm.
    """

    rank_tol: float = _EPS
    psd_tol: float = 1e-8
    residual_tol: float = 1e-8
    freq_tol: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0.0:
                raise ValueError(f"{f.name} must be positive")

    def rank_cutoff(self, singular_values: np.ndarray, shape) -> float:
        """Threshold below which singular values are treated as zero."""
        smax = float(singular_values[0]) if len(singular_values) else 0.0
        return self.rank_tol * max(shape) * smax

    def cond_limit(self) -> float:
        """Condition number above which a factor counts as numerically singular."""
        return 1.0 / self.rank_tol


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class DescriptorSystem:
    """E x' = A x + B u,  y = C x + D u with possibly singular E."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        _freeze(self)
        n, m = self.B.shape
        if self.E.shape != (n, n) or self.A.shape != (n, n):
            raise DimensionError("E and A must be square and match the state dimension")
        if self.C.shape != (m, n) or self.D.shape != (m, m):
            raise DimensionError("C must be m x n and D m x m (equal input/output count)")
        if m < 1:
            raise DimensionError("at least one input/output channel is required")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def num_ports(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class StateSpaceSystem:
    """x' = A x + B u,  y = C x + D u (E = I)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        _freeze(self)
        n, m = self.B.shape
        if self.A.shape != (n, n):
            raise DimensionError("A must be square and match B's row count")
        if self.C.shape != (m, n) or self.D.shape != (m, m):
            raise DimensionError("C must be m x n and D m x m (equal input/output count)")
        if m < 1:
            raise DimensionError("at least one input/output channel is required")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def num_ports(self) -> int:
        return self.B.shape[1]

    def to_descriptor(self) -> DescriptorSystem:
        return DescriptorSystem(np.eye(self.order), self.A, self.B, self.C, self.D)


@dataclass(frozen=True)
class SemiExplicitSystem:
    """Strangeness-free split: E1 x' = A1 x + B1 u,  0 = A2 x + B2 u, y = C x + D u.

    The differential part has d rows, the algebraic part a rows, n = a + d,
    and the stacked matrix [E1; A2] must be invertible.
    """

    E1: np.ndarray
    A1: np.ndarray
    B1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        _freeze(self)
        d, n = self.E1.shape
        a = self.A2.shape[0]
        m = self.D.shape[0]
        if n != a + d:
            raise DimensionError(f"state dimension must split as n = a + d, got n={n}, a={a}, d={d}")
        if self.A1.shape != (d, n) or self.B1.shape != (d, m):
            raise DimensionError("A1 must be d x n and B1 d x m")
        if self.A2.shape != (a, n) or self.B2.shape != (a, m):
            raise DimensionError("A2 must be a x n and B2 a x m")
        if self.C.shape != (m, n) or self.D.shape != (m, m):
            raise DimensionError("C must be m x n and D m x m")

    @property
    def order(self) -> int:
        return self.E1.shape[1]

    @property
    def num_diff(self) -> int:
        return self.E1.shape[0]

    @property
    def num_alg(self) -> int:
        return self.A2.shape[0]

    @property
    def num_ports(self) -> int:
        return self.D.shape[0]

    @property
    def cond_stacked(self) -> float:
        """Condition number of [E1; A2]; finite iff the split is index <= 1."""
        s = sla.svdvals(np.vstack([self.E1, self.A2]))
        if s[-1] == 0.0:
            return np.inf
        return float(s[0] / s[-1])

    def to_descriptor(self) -> DescriptorSystem:
        d = self.num_diff
        n = self.order
        E = np.vstack([self.E1, np.zeros((n - d, n))])
        A = np.vstack([self.A1, self.A2])
        B = np.vstack([self.B1, self.B2])
        return DescriptorSystem(E, A, B, self.C, self.D)


@dataclass(frozen=True)
class PHSystem:
    """Port-Hamiltonian model E x' = (J - R) Q x + (F - P) u, y = (F + P)^T Q x + (S + N) u.

    J is skew-symmetric, R positive semidefinite, Q the energy matrix of the
    Hamiltonian H(x) = x^T E^T Q x / 2, and W = [[R, P], [P^T, S]] the passivity
    block.  E = I is permitted (and common), so both the ODE and descriptor
    variants share this type.
    """

    E: np.ndarray
    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    F: np.ndarray
    P: np.ndarray
    S: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        _freeze(self)
        n, m = self.F.shape
        for name in ("E", "J", "R", "Q"):
            if getattr(self, name).shape != (n, n):
                raise DimensionError(f"{name} must be {n} x {n}")
        if self.P.shape != (n, m):
            raise DimensionError("P must match F's shape")
        for name in ("S", "N"):
            if getattr(self, name).shape != (m, m):
                raise DimensionError(f"{name} must be {m} x {m}")
        if m < 1:
            raise DimensionError("at least one port is required")

    @property
    def order(self) -> int:
        return self.F.shape[0]

    @property
    def num_ports(self) -> int:
        return self.F.shape[1]

    @property
    def passivity_block(self) -> np.ndarray:
        """The block matrix W = [[R, P], [P^T, S]] certifying passivity."""
        return np.block([[self.R, self.P], [self.P.T, self.S]])

    def hamiltonian(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (self.E.T @ self.Q @ x))


AnySystem = Union[DescriptorSystem, StateSpaceSystem, PHSystem, SemiExplicitSystem]


@dataclass(frozen=True)
class FrequencyResponse:
    """Transfer-function samples G(i w) on a strictly increasing grid of w."""

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if w.ndim != 1 or np.any(np.diff(w) <= 0):
            raise DimensionError("frequencies must be a strictly increasing 1-d array")
        if v.ndim != 3 or v.shape[0] != w.size or v.shape[1] != v.shape[2]:
            raise DimensionError("values must have shape (len(frequencies), m, m)")
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "values", v)

    @property
    def num_ports(self) -> int:
        return self.values.shape[1]


def ph_to_statespace(ph: PHSystem) -> StateSpaceSystem | DescriptorSystem:
    """Expand a pH model into its realized (E, A, B, C, D) matrices.

    Returns a :class:`StateSpaceSystem` when E is the identity, otherwise a
    :class:`DescriptorSystem` with the same E.
    """
    A = (ph.J - ph.R) @ ph.Q
    B = ph.F - ph.P
    C = (ph.F + ph.P).T @ ph.Q
    D = ph.S + ph.N
    n = ph.order
    if n == 0 or np.allclose(ph.E, np.eye(n), rtol=0.0, atol=1e-14):
        return StateSpaceSystem(A, B, C, D)
    return DescriptorSystem(ph.E, A, B, C, D)


def _pencil(sys: AnySystem):
    """Return (E, A, B, C, D) for the realized pencil of any system type."""
    if isinstance(sys, PHSystem):
        sys = ph_to_statespace(sys)
    if isinstance(sys, SemiExplicitSystem):
        sys = sys.to_descriptor()
    if isinstance(sys, StateSpaceSystem):
        return np.eye(sys.order), sys.A, sys.B, sys.C, sys.D
    return sys.E, sys.A, sys.B, sys.C, sys.D


def eval_transfer(sys: AnySystem, s: complex, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Evaluate the transfer function G(s) = D + C (s E - A)^{-1} B.

    For a :class:`PHSystem` this realizes
    (F + P)^T Q (s E - (J - R) Q)^{-1} (F - P) + (S + N).

    Raises
    ------
    SingularPencilError
        If s E - A is numerically singular at the given point (condition
        number above ``1 / rank_tol``).
    """
    E, A, B, C, D = _pencil(sys)
    n = A.shape[0]
    if n == 0:
        return D.astype(complex)
    M = s * E - A
    sv = sla.svdvals(M)
    if sv[-1] <= 0.0 or sv[0] / sv[-1] > tol.cond_limit():
        raise SingularPencilError(f"s E - A is numerically singular at s = {s}")
    return D + C @ np.linalg.solve(M, B.astype(complex))


def default_grid(wmin: float = 1e-2, wmax: float = 1e4, npts: int = 400) -> np.ndarray:
    """Logarithmic frequency grid used for Bode comparisons."""
    return np.logspace(np.log10(wmin), np.log10(wmax), npts)


def frequency_response(sys: AnySystem, omegas: np.ndarray | None = None,
                       tol: Tolerances = DEFAULT_TOL) -> FrequencyResponse:
    """Sample G(i w) over a frequency grid (default :func:`default_grid`)."""
    if omegas is None:
        omegas = default_grid()
    omegas = np.asarray(omegas, dtype=float)
    vals = np.stack([eval_transfer(sys, 1j * w, tol) for w in omegas])
    return FrequencyResponse(omegas, vals)


def response_error(G1: FrequencyResponse, G2: FrequencyResponse) -> float:
    """Worst-case relative deviation between two sampled responses.

    Returns max over the grid of ||G1(w) - G2(w)||_2 / max(1, ||G1(w)||_2).
    The two responses must share the identical frequency grid.
    """
    if G1.frequencies.shape != G2.frequencies.shape or not np.array_equal(
            G1.frequencies, G2.frequencies):
        raise GridMismatchError("frequency grids differ")
    if G1.values.shape != G2.values.shape:
        raise GridMismatchError("response dimensions differ")
    err = 0.0
    for V1, V2 in zip(G1.values, G2.values):
        scale = max(1.0, float(np.linalg.norm(V1, 2)))
        err = max(err, float(np.linalg.norm(V1 - V2, 2)) / scale)
    return err


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    violation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.violation <= self.threshold


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ValidationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok " if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name:<18} violation {c.violation:.3e} (tol {c.threshold:.3e})")
        overall = "pass" if self.passed else "FAIL"
        return f"pH structure: {overall}\n" + "\n".join(lines)


def _min_eig_sym(M: np.ndarray) -> float:
    if M.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh((M + M.T) / 2.0).min())


def validate_ph(ph: PHSystem, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    """Measure every structural invariant of a pH model.

    Reports, never raises.  Each check records the measured violation and the
    threshold it was held against; thresholds scale psd_tol by the relevant
    matrix norm so the report is invariant under overall system scaling.
    """
    p = tol.psd_tol
    W = ph.passivity_block
    QtE = ph.Q.T @ ph.E

    def norm2(M):
        return float(np.linalg.norm(M, 2)) if M.size else 0.0

    checks = (
        ValidationCheck("J_skew", float(np.linalg.norm(ph.J + ph.J.T, "fro")),
                        p * (1.0 + float(np.linalg.norm(ph.J, "fro")))),
        ValidationCheck("R_psd", max(0.0, -_min_eig_sym(ph.R)), p * (1.0 + norm2(ph.R))),
        ValidationCheck("W_psd", max(0.0, -_min_eig_sym(W)), p * (1.0 + norm2(W))),
        ValidationCheck("S_symmetric", float(np.linalg.norm(ph.S - ph.S.T, "fro")),
                        p * (1.0 + float(np.linalg.norm(ph.S, "fro")))),
        ValidationCheck("N_skew", float(np.linalg.norm(ph.N + ph.N.T, "fro")),
                        p * (1.0 + float(np.linalg.norm(ph.N, "fro")))),
        ValidationCheck("QtE_symmetric", float(np.linalg.norm(QtE - QtE.T, "fro")),
                        p * (1.0 + float(np.linalg.norm(QtE, "fro")))),
        ValidationCheck("QtE_psd", max(0.0, -_min_eig_sym(QtE)), p * (1.0 + norm2(QtE))),
    )
    return ValidationReport(checks)
