"""Deterministic generators for worked examples and test-instance families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .systems import DescriptorSystem, PHSystem, StateSpaceSystem, ph_to_statespace

__all__ = [
    "LadderSpec",
    "paper_example5",
    "ladder_network",
    "random_ph",
    "random_passive",
    "random_descriptor_index1",
    "random_stable_discrete",
]


def paper_example5() -> DescriptorSystem:
    """The order-5 single-port descriptor system used as the worked example.

    E is singular (first column zero, rank 4), the pencil is regular of
    index one, and the system is stable and passive after reduction.
    """
    E = [[0, 0, 19, 15, 5],
         [0, 4, 14, 13, 14],
         [0, 9, 10, 1, 11],
         [0, 7, 9, 6, 12],
         [0, 8, 1, 17, 20]]
    A = [[17, 10, 10, 15, 7],
         [9, 2, 4, 6, 9],
         [18, 8, 20, 12, 15],
         [5, 1, 4, 2, 19],
         [14, 15, 3, 3, 12]]
    B = [[2], [20], [1], [2], [18]]
    C = [[16, 19, 3, 14, 14]]
    D = [[9.3]]
    return DescriptorSystem(np.array(E, float), np.array(A, float),
                            np.array(B, float), np.array(C, float), np.array(D, float))


@dataclass(frozen=True)
class LadderSpec:
    """RLC ladder: series R-L branches between shunt C nodes, one port.

    Driven by a voltage source at the first branch; the output is the current
    into that same port, so the transfer function is the input admittance.
    State dimension is 2 * sections (one flux and one charge per section).
    """

    sections: int
    resistance: float = 1.0
    inductance: float = 1.0
    capacitance: float = 1.0

    def __post_init__(self):
        if self.sections < 1:
            raise ValueError("need at least one ladder section")
        if min(self.resistance, self.inductance, self.capacitance) <= 0:
            raise ValueError("component values must be positive")

    @property
    def order(self) -> int:
        return 2 * self.sections


def ladder_network(spec: LadderSpec) -> PHSystem:
    """Port-Hamiltonian model of the RLC ladder, passive by construction.

    States alternate inductor fluxes and capacitor charges; the energy matrix
    is diag(1/L, 1/C, ...), dissipation sits on the flux coordinates, and the
    skew coupling encodes Kirchhoff's laws section by section.
    """
    K = spec.sections
    n = spec.order
    J = np.zeros((n, n))
    R = np.zeros((n, n))
    Q = np.zeros((n, n))
    F = np.zeros((n, 1))
    for k in range(K):
        iphi, iq = 2 * k, 2 * k + 1
        Q[iphi, iphi] = 1.0 / spec.inductance
        Q[iq, iq] = 1.0 / spec.capacitance
        R[iphi, iphi] = spec.resistance
        # branch current feeds its own node charge and drains the previous node
        J[iphi, iq] = -1.0
        J[iq, iphi] = 1.0
        if k + 1 < K:
            J[2 * (k + 1), iq] = 1.0
            J[iq, 2 * (k + 1)] = -1.0
    F[0, 0] = 1.0
    eye = np.eye(n)
    zero = np.zeros((1, 1))
    return PHSystem(E=eye, J=J, R=R, Q=Q, F=F, P=np.zeros((n, 1)), S=zero, N=zero)


def random_ph(n: int, m: int, seed: int) -> PHSystem:
    """Random pH system with Q = E = I and a safely definite passivity block.

    The block W is a Gram matrix shifted by 0.1 I, so both R and S stay away
    from the semidefinite boundary and the realized system is asymptotically
    stable and strictly passive.
    """
    if n < 0 or m < 1:
        raise ValueError("need n >= 0 and m >= 1")
    rng = np.random.default_rng(seed)
    Jr = rng.standard_normal((n, n))
    J = (Jr - Jr.T) / 2.0
    G = rng.standard_normal((n + m, n + m)) / np.sqrt(n + m)
    W = G @ G.T + 0.1 * np.eye(n + m)
    F = rng.standard_normal((n, m))
    Nr = rng.standard_normal((m, m))
    eye = np.eye(n)
    return PHSystem(E=eye, J=J, R=W[:n, :n], Q=eye, F=F, P=W[:n, n:],
                    S=W[n:, n:], N=(Nr - Nr.T) / 2.0)


def random_passive(n: int, m: int, seed: int) -> StateSpaceSystem:
    """Realized matrices of :func:`random_ph`; guaranteed stable and passive."""
    sys = ph_to_statespace(random_ph(n, m, seed))
    assert isinstance(sys, StateSpaceSystem)
    return sys


def random_descriptor_index1(n: int, m: int, seed: int, num_alg: int | None = None
                             ) -> DescriptorSystem:
    """Random regular index <= 1 descriptor system with a known split.

    Built as W diag(I_d, 0) T for the E part and W [[A11, A12], [A21, A22]] T
    with invertible A22 for the A part, which makes the pencil regular of
    index one by construction.  The differential part is drawn stable.
    """
    rng = np.random.default_rng(seed)
    a = num_alg if num_alg is not None else (n // 3 if n >= 3 else 0)
    if not 0 <= a < n:
        raise ValueError("algebraic part must satisfy 0 <= a < n")
    d = n - a

    def well_conditioned(size):
        M = rng.standard_normal((size, size))
        U, _, Vt = np.linalg.svd(M)
        return U @ np.diag(rng.uniform(0.5, 2.0, size)) @ Vt

    W = well_conditioned(n)
    T = well_conditioned(n)
    A11 = rng.standard_normal((d, d))
    A11 = A11 - (np.abs(np.linalg.eigvals(A11).real).max() + 0.5) * np.eye(d)
    Ablk = np.block([[A11, rng.standard_normal((d, a))],
                     [rng.standard_normal((a, d)), well_conditioned(a)]])
    E = W @ np.diag(np.concatenate([np.ones(d), np.zeros(a)])) @ T
    A = W @ Ablk @ T
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((m, n))
    D = rng.standard_normal((m, m))
    return DescriptorSystem(E, A, B, C, D)


def random_stable_discrete(n: int, m: int, seed: int, radius: float = 0.8
                           ) -> StateSpaceSystem:
    """Random discrete-time system with spectral radius at most ``radius``."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    rho = float(np.abs(np.linalg.eigvals(A)).max()) if n else 1.0
    if rho > 0:
        A = A * (radius / rho)
    return StateSpaceSystem(A, rng.standard_normal((n, m)),
                            rng.standard_normal((m, n)), rng.standard_normal((m, m)))
