import numpy as np
import pytest

from phrealize import (LadderSpec, classify_pencil, ladder_network,
                       paper_example5, passivity_check, random_descriptor_index1,
                       random_passive, random_ph, validate_ph)


class TestPaperExample5:
    def test_fixed_entries(self, example5):
        assert example5.E[0][2] == 19.0
        assert example5.D[0][0] == 9.3
        assert example5.B[:, 0].tolist() == [2.0, 20.0, 1.0, 2.0, 18.0]
        assert example5.C[0].tolist() == [16.0, 19.0, 3.0, 14.0, 14.0]

    def test_rank_of_e(self, example5):
        assert np.linalg.matrix_rank(example5.E) == 4

    def test_pencil_regular(self, example5):
        assert classify_pencil(example5.E, example5.A).regular

    def test_byte_stable(self):
        a, b = paper_example5(), paper_example5()
        assert np.array_equal(a.E, b.E) and np.array_equal(a.A, b.A)


class TestLadderNetwork:
    def test_smallest_ladder(self):
        ph = ladder_network(LadderSpec(1))
        assert ph.order == 2
        assert passivity_check(__import__("phrealize").ph_to_statespace(ph)).passive

    def test_order_and_exact_structure(self):
        ph = ladder_network(LadderSpec(100))
        assert ph.order == 200
        report = validate_ph(ph)
        assert report.passed
        # structure is exact by construction, not merely within tolerance
        assert all(c.violation == 0.0 for c in report.checks)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            LadderSpec(0)
        with pytest.raises(ValueError):
            LadderSpec(3, resistance=-1.0)

    def test_component_values_enter_energy_matrix(self):
        ph = ladder_network(LadderSpec(2, inductance=2.0, capacitance=4.0))
        assert ph.Q[0, 0] == pytest.approx(0.5)
        assert ph.Q[1, 1] == pytest.approx(0.25)


class TestRandomFamilies:
    def test_random_passive_deterministic(self):
        a = random_passive(6, 2, seed=123)
        b = random_passive(6, 2, seed=123)
        assert np.array_equal(a.A, b.A) and np.array_equal(a.D, b.D)

    def test_random_passive_is_certified(self):
        for seed in range(5):
            assert passivity_check(random_passive(7, 2, seed=seed)).passive

    def test_zero_order_feedthrough(self):
        sys = random_passive(0, 2, seed=1)
        assert sys.order == 0
        lam = np.linalg.eigvalsh(sys.D + sys.D.T)
        assert lam.min() > 0

    def test_random_ph_validates(self):
        assert validate_ph(random_ph(5, 2, seed=9)).passed

    def test_random_descriptor_classification(self):
        for seed in range(5):
            sys = random_descriptor_index1(7, 2, seed=seed, num_alg=3)
            cls = classify_pencil(sys.E, sys.A)
            assert cls.regular and cls.index_le_one
            assert cls.finite_eig_count == 4
