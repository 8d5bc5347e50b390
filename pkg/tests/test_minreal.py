import numpy as np
import pytest
import scipy.linalg as sla

from phrealize import (StateSpaceSystem, minimal_realization, random_passive,
                       staircase_controllable, staircase_observable)

from conftest import sample_points, transfer_gap


def gramian_rank_oracle(sys, tol=1e-12):
    """Order of the minimal realization of a stable system, brute force.

    Numerical rank of the product of the controllability and observability
    Gramians; valid for small stable systems whose hidden modes are exactly
    decoupled (their product singular values vanish to roundoff).
    """
    Wc = sla.solve_continuous_lyapunov(sys.A, -sys.B @ sys.B.T)
    Wo = sla.solve_continuous_lyapunov(sys.A.T, -sys.C.T @ sys.C)
    sv = sla.svdvals(Wc @ Wo)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


class TestStaircaseControllable:
    def test_fully_controllable(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [1.0]],
                               [[1.0, 1.0]], [[0.0]])
        res = staircase_controllable(sys)
        assert res.controllable_dim == 2

    def test_partially_controllable(self):
        # controllability matrix [B AB] = [[1, -1], [0, 0]] has rank 1
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [0.0]],
                               [[1.0, 1.0]], [[0.0]])
        res = staircase_controllable(sys)
        assert res.controllable_dim == 1

    def test_zero_input_map(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), np.zeros((2, 1)),
                               [[1.0, 1.0]], [[0.0]])
        assert staircase_controllable(sys).controllable_dim == 0

    def test_basis_orthogonal_and_similar(self):
        sys = random_passive(8, 2, seed=4)
        res = staircase_controllable(sys)
        Z = res.orthogonal_basis
        assert np.linalg.norm(Z.T @ Z - np.eye(8)) < 1e-12
        assert res.transformed.A == pytest.approx(Z.T @ sys.A @ Z)
        # transfer is invariant under the orthogonal similarity
        assert transfer_gap(sys, res.transformed, sample_points(3, 10)) < 1e-12


class TestStaircaseObservable:
    def test_fully_observable(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [1.0]],
                               [[1.0, 1.0]], [[0.0]])
        assert staircase_observable(sys).controllable_dim == 2

    def test_partially_observable(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [1.0]],
                               [[1.0, 0.0]], [[0.0]])
        assert staircase_observable(sys).controllable_dim == 1

    def test_zero_output_map(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [1.0]],
                               np.zeros((1, 2)), [[0.0]])
        assert staircase_observable(sys).controllable_dim == 0


class TestMinimalRealization:
    def test_hidden_mode_removed(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0]), [[1.0], [0.0]],
                               [[1.0, 0.0]], [[0.0]])
        mini = minimal_realization(sys)
        assert mini.order == 1
        # transfer is 1/(s+1)
        from phrealize import eval_transfer
        for s in (0.0, 1j, 2.0):
            assert eval_transfer(mini, s)[0, 0] == pytest.approx(1.0 / (s + 1.0))

    def test_already_minimal_is_fixed_point(self):
        sys = random_passive(6, 2, seed=9)
        mini = minimal_realization(sys)
        assert mini.order == 6
        assert transfer_gap(sys, mini, sample_points(4, 20)) < 1e-8

    def test_zero_order_result(self):
        sys = StateSpaceSystem(np.diag([-1.0]), np.zeros((1, 1)), np.zeros((1, 1)),
                               [[2.5]])
        mini = minimal_realization(sys)
        assert mini.order == 0
        assert mini.D == pytest.approx(np.array([[2.5]]))

    def test_example5_keeps_order_four(self, example5_minimal):
        assert example5_minimal.order == 4

    def test_minimality_certificate(self):
        sys = StateSpaceSystem(np.diag([-1.0, -2.0, -3.0]), [[1.0], [0.0], [1.0]],
                               [[1.0, 1.0, 0.0]], [[0.0]])
        mini = minimal_realization(sys)
        assert staircase_controllable(mini).controllable_dim == mini.order
        assert staircase_observable(mini).controllable_dim == mini.order

    def test_gramian_rank_cross_check(self):
        rng = np.random.default_rng(0)
        for seed in range(15):
            n = int(rng.integers(2, 9))
            # build a stable system with a random number of hidden modes
            full = random_passive(n, 1, seed=1000 + seed)
            pad = int(rng.integers(0, 3))
            A = sla.block_diag(full.A, -np.eye(pad) * 2.0)
            B = np.vstack([full.B, np.zeros((pad, 1))])
            C = np.hstack([full.C, np.zeros((1, pad))])
            sys = StateSpaceSystem(A, B, C, full.D)
            mini = minimal_realization(sys)
            assert mini.order == gramian_rank_oracle(sys)
            assert transfer_gap(sys, mini, sample_points(seed, 20)) < 1e-8
