import numpy as np
import pytest

from phrealize import (StateSpaceSystem, passivity_check, ph_from_kyp,
                       random_passive, solve_kyp, stability_check, validate_ph)
from phrealize.errors import NotPassiveError
from phrealize.kyp import kyp_lmi_matrix, riccati_residual

from conftest import sample_points, transfer_gap

# closed-form certificate for (A, B, C, D) = (-1, 1, 1, 1): the Riccati
# equation reduces to 4q = (q - 1)^2, whose stabilizing (minimal) root is
Q_SCALAR = 3.0 - 2.0 * np.sqrt(2.0)


class TestStabilityCheck:
    def test_stable_scalar(self):
        stable, absc = stability_check(StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[0.0]]))
        assert stable and absc == pytest.approx(-1.0)

    def test_oscillator_is_marginal(self):
        sys = StateSpaceSystem([[0.0, 1.0], [-1.0, 0.0]], [[0.0], [1.0]],
                               [[1.0, 0.0]], [[0.0]])
        stable, absc = stability_check(sys)
        assert not stable and absc == pytest.approx(0.0, abs=1e-12)

    def test_unstable_mode(self):
        sys = StateSpaceSystem(np.diag([-1.0, 0.5]), np.ones((2, 1)),
                               np.ones((1, 2)), [[0.0]])
        stable, absc = stability_check(sys)
        assert not stable and absc == pytest.approx(0.5)


class TestSolveKypDirect:
    def test_scalar_closed_form(self, scalar_passive):
        sol = solve_kyp(scalar_passive)
        assert not sol.projected
        assert sol.Qhat[0, 0] == pytest.approx(Q_SCALAR, abs=1e-12)

    def test_lmi_feasible_at_solution(self, scalar_passive):
        sol = solve_kyp(scalar_passive)
        M = kyp_lmi_matrix(scalar_passive, sol.Qhat)
        assert np.linalg.eigvalsh((M + M.T) / 2).max() <= 1e-10

    def test_riccati_residual_small(self, example5_minimal):
        sol = solve_kyp(example5_minimal)
        normA = np.linalg.norm(example5_minimal.A, 2)
        assert riccati_residual(example5_minimal, sol.Qhat) <= 1e-8 * (1 + normA ** 2)

    def test_unstable_input_rejected(self):
        sys = StateSpaceSystem([[1.0]], [[1.0]], [[1.0]], [[1.0]])
        with pytest.raises(NotPassiveError):
            solve_kyp(sys)

    def test_indefinite_feedthrough_rejected(self):
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[-1.0]])
        with pytest.raises(NotPassiveError):
            solve_kyp(sys)

    def test_stable_nonpassive_detected_by_hamiltonian_spectrum(self):
        # G(s) = 0.1 - 5/(s+1) takes negative real values, so no certificate
        # exists even though D + D^T > 0; the Hamiltonian matrix then has
        # imaginary-axis eigenvalues and the subspace extraction must refuse
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[-5.0]], [[0.1]])
        with pytest.raises(NotPassiveError):
            solve_kyp(sys)
        assert not passivity_check(sys).passive


class TestSolveKypProjected:
    def test_scalar_lossless_constraint_pins_certificate(self):
        # D + D^T = 0, so Q B = C^T forces Q = 1; A^T Q + Q A = -2 <= 0 holds
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
        sol = solve_kyp(sys)
        assert sol.projected
        assert sol.Qhat[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_scalar_sign_contradiction(self):
        # constraint would force Q = -1 < 0
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[-1.0]], [[0.0]])
        with pytest.raises(NotPassiveError):
            solve_kyp(sys)

    def test_partially_pinned_with_sdp_completion(self):
        # pH ladder-like system with D = 0: only span(B) is pinned
        from phrealize import LadderSpec, ladder_network, ph_to_statespace
        sys = ph_to_statespace(ladder_network(LadderSpec(3)))
        sol = solve_kyp(sys)
        assert sol.projected
        assert np.linalg.norm(sol.Qhat @ sys.B - sys.C.T) < 1e-10
        lam = np.linalg.eigvalsh(sol.Qhat)
        assert lam.min() > 0
        M = kyp_lmi_matrix(sys, sol.Qhat)
        scale = 1 + np.linalg.norm(M, 2)
        assert np.linalg.eigvalsh((M + M.T) / 2).max() <= 1e-8 * scale

    def test_epsilon_fallback_is_opt_in(self):
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[0.0]])
        sol = solve_kyp(sys, epsilon=1e-6)
        assert not sol.projected
        assert sol.Qhat[0, 0] == pytest.approx(1.0, abs=1e-2)

    def test_mixed_definite_and_lossless_directions(self):
        # two ports, S = diag(1, 0): one definite feedthrough direction and
        # one lossless one; the pH construction guarantees a certificate
        rng = np.random.default_rng(15)
        n = 5
        J = rng.standard_normal((n, n))
        J = (J - J.T) / 2
        G = rng.standard_normal((n, n))
        R = G @ G.T + 0.5 * np.eye(n)
        F = rng.standard_normal((n, 2))
        p1 = 0.1 * rng.standard_normal((n, 1))
        P = np.hstack([p1, np.zeros((n, 1))])  # second column zero keeps W PSD
        S = np.diag([1.0, 0.0])
        sys = StateSpaceSystem(J - R, F - P, (F + P).T, S)
        sol = solve_kyp(sys)
        assert sol.projected
        lam = np.linalg.eigvalsh(sol.Qhat)
        assert lam.min() > 0
        M = kyp_lmi_matrix(sys, sol.Qhat)
        scale = 1 + np.linalg.norm(M, 2)
        assert np.linalg.eigvalsh((M + M.T) / 2).max() <= 1e-8 * scale

    def test_order_zero_feedthrough_only(self):
        sys = StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, 1)),
                               np.zeros((1, 0)), [[2.0]])
        sol = solve_kyp(sys)
        assert sol.Qhat.shape == (0, 0)
        ph = ph_from_kyp(sys, sol)
        assert ph.order == 0
        assert validate_ph(ph).passed

    def test_order_zero_lossless_feedthrough(self):
        sys = StateSpaceSystem(np.zeros((0, 0)), np.zeros((0, 1)),
                               np.zeros((1, 0)), [[0.0]])
        sol = solve_kyp(sys)
        assert sol.projected
        assert validate_ph(ph_from_kyp(sys, sol)).passed


class TestPassivityCheck:
    def test_passive_with_certificate(self, scalar_passive):
        verdict = passivity_check(scalar_passive)
        assert verdict.stable and verdict.passive
        assert verdict.certificate.Qhat[0, 0] == pytest.approx(Q_SCALAR, abs=1e-12)

    def test_stable_not_passive(self):
        verdict = passivity_check(StateSpaceSystem([[-1.0]], [[1.0]], [[-1.0]], [[0.0]]))
        assert verdict.stable and not verdict.passive
        assert verdict.certificate is None

    def test_unstable_never_passive(self):
        verdict = passivity_check(StateSpaceSystem([[1.0]], [[1.0]], [[1.0]], [[1.0]]))
        assert not verdict.stable and not verdict.passive


class TestPhFromKyp:
    def test_scalar_closed_form_parts(self, scalar_passive):
        sol = solve_kyp(scalar_passive)
        ph = ph_from_kyp(scalar_passive, sol)
        q = Q_SCALAR
        assert ph.J[0, 0] == pytest.approx(0.0)
        assert ph.R[0, 0] == pytest.approx(1.0)
        assert ph.S[0, 0] == pytest.approx(1.0)
        assert ph.N[0, 0] == pytest.approx(0.0)
        assert ph.F[0, 0] == pytest.approx(0.5 * (np.sqrt(q) + 1 / np.sqrt(q)), abs=1e-12)
        assert ph.P[0, 0] == pytest.approx(0.5 * (1 / np.sqrt(q) - np.sqrt(q)), abs=1e-12)
        # the Riccati equality puts W exactly on the semidefinite boundary
        W = ph.passivity_block
        assert np.linalg.det(W) == pytest.approx(0.0, abs=1e-12)

    def test_already_ph_coordinates_need_no_rotation(self):
        # A = J0 - R0 with B = C^T and definite feedthrough admits Qhat = I,
        # but any certificate must reproduce the symmetric/skew split of A
        J0 = np.array([[0.0, 2.0], [-2.0, 0.0]])
        R0 = np.array([[1.0, 0.0], [0.0, 2.0]])
        B = np.array([[1.0], [1.0]])
        sys = StateSpaceSystem(J0 - R0, B, B.T, [[1.0]])
        sol = solve_kyp(sys)
        ph = ph_from_kyp(sys, sol)
        assert validate_ph(ph).passed
        assert transfer_gap(sys, ph, sample_points(8, 20)) < 1e-10

    def test_transfer_invariance(self, example5_minimal):
        sol = solve_kyp(example5_minimal)
        ph = ph_from_kyp(example5_minimal, sol)
        assert transfer_gap(example5_minimal, ph, sample_points(9, 20)) < 1e-10

    def test_sqrtm_variant(self, example5_minimal):
        sol = solve_kyp(example5_minimal)
        ph = ph_from_kyp(example5_minimal, sol, factorization="sqrtm")
        assert validate_ph(ph).passed
        assert transfer_gap(example5_minimal, ph, sample_points(10, 20)) < 1e-10


class TestRiccatiSolverCrossOracle:
    def test_against_scipy_are_on_passive_instances(self):
        # the certificate equation in standard form, Ahat^T X + X Ahat
        # + X G X + Q0 = 0 with G = b b^T, maps onto scipy's
        # solve_continuous_are(Ahat, b, Q0, r) at r = -I: the sign flip turns
        # scipy's -X b r^-1 b^T X into +X G X.  Passive data guarantees a
        # stabilizing solution exists, and both routes must agree on it.
        import scipy.linalg as sla
        for seed in range(10):
            sys = random_passive(int(3 + seed % 5), 2, seed=40 + seed)
            W0 = sys.D + sys.D.T
            Ahat = sys.A - sys.B @ np.linalg.solve(W0, sys.C)
            Jc = sla.cholesky(W0, lower=True)
            b = sla.solve_triangular(Jc, sys.B.T, lower=True).T  # b b^T = B W0^-1 B^T
            Q0 = sys.C.T @ np.linalg.solve(W0, sys.C)
            X_scipy = sla.solve_continuous_are(Ahat, b, Q0, -np.eye(2))
            sol = solve_kyp(sys)
            assert sol.Qhat == pytest.approx(X_scipy, rel=1e-8, abs=1e-10)


class TestRandomPassiveFamily:
    def test_certificates_on_random_instances(self):
        rng = np.random.default_rng(42)
        for seed in range(20):
            n = int(rng.integers(1, 21))
            m = int(rng.integers(1, 4))
            sys = random_passive(n, m, seed=seed)
            sol = solve_kyp(sys)
            assert np.linalg.eigvalsh(sol.Qhat).min() > 0
            normA = np.linalg.norm(sys.A, 2)
            assert riccati_residual(sys, sol.Qhat) <= 1e-8 * (1 + normA ** 2)
            ph = ph_from_kyp(sys, sol)
            assert validate_ph(ph).passed
