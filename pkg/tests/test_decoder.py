import math

import numpy as np
import pytest

from distid import (
    NoFeasibleAssignmentError,
    ObservationBatch,
    exhaustive_decode,
    log_likelihood_matrix,
    make_family,
    ml_decode,
)
from distid.distributions import philox_stream

INF = math.inf


class TestLogLikelihoodMatrix:
    def test_degenerate_vs_uniform(self):
        fam = make_family([(1.0, 0.0), (0.5, 0.5)])
        batch = ObservationBatch([[0, 0], [0, 0]], alphabet_size=2)
        scores = log_likelihood_matrix(batch, fam)
        expected = 2.0 * math.log(0.5)
        for i in range(2):
            assert scores[i, 0] == 0.0
            assert scores[i, 1] == expected

    def test_zero_probability_symbol(self):
        fam = make_family([(1.0, 0.0), (0.5, 0.5)])
        batch = ObservationBatch([[1], [0]], alphabet_size=2)
        scores = log_likelihood_matrix(batch, fam)
        assert scores[0, 0] == -INF
        assert scores[0, 1] == math.log(0.5)

    def test_direct_evaluation(self):
        fam = make_family([(0.9, 0.1), (0.2, 0.8)])
        batch = ObservationBatch([[0], [1]], alphabet_size=2)
        scores = log_likelihood_matrix(batch, fam)
        expected = [[math.log(0.9), math.log(0.2)],
                    [math.log(0.1), math.log(0.8)]]
        np.testing.assert_allclose(scores, expected, rtol=1e-15)

    def test_row_count_mismatch(self):
        fam = make_family([(0.9, 0.1), (0.2, 0.8)])
        batch = ObservationBatch([[0], [1], [0]], alphabet_size=2)
        with pytest.raises(ValueError, match="rows"):
            log_likelihood_matrix(batch, fam)

    def test_alphabet_mismatch(self):
        fam = make_family([(0.9, 0.1), (0.2, 0.8)])
        batch = ObservationBatch([[0], [2]], alphabet_size=3)
        with pytest.raises(ValueError, match="alphabet"):
            log_likelihood_matrix(batch, fam)


class TestMlDecode:
    def test_diagonal_dominant(self):
        assert ml_decode([[0, -10], [-10, 0]]).tolist() == [0, 1]

    def test_antidiagonal_dominant(self):
        assert ml_decode([[-10, 0], [0, -10]]).tolist() == [1, 0]

    def test_all_equal_breaks_to_identity(self):
        assert ml_decode([[0.0, 0.0], [0.0, 0.0]]).tolist() == [0, 1]
        assert ml_decode(np.zeros((4, 4))).tolist() == [0, 1, 2, 3]

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            ml_decode([[0.0, float("nan")], [0.0, 0.0]])

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            ml_decode([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]])

    def test_all_infeasible(self):
        with pytest.raises(NoFeasibleAssignmentError):
            ml_decode([[-INF, -INF], [-INF, -INF]])

    def test_forced_by_infeasibility(self):
        # the only permutation avoiding -inf is [1, 0] despite worse scores
        scores = [[-INF, -5.0], [100.0, -INF]]
        assert ml_decode(scores).tolist() == [1, 0]

    def test_never_uses_minus_inf_when_finite_exists(self):
        rng = philox_stream(31)
        for _ in range(200):
            size = int(rng.integers(2, 6))
            scores = rng.normal(size=(size, size)) * 10.0
            # plant -inf on a random half of the entries, keep identity finite
            mask = rng.random((size, size)) < 0.5
            np.fill_diagonal(mask, False)
            scores[mask] = -INF
            decoded = ml_decode(scores)
            assert all(scores[i, decoded[i]] > -INF for i in range(size))

    def test_row_and_column_shift_invariance(self):
        rng = philox_stream(32)
        for _ in range(50):
            size = int(rng.integers(2, 6))
            scores = rng.normal(size=(size, size))
            base = ml_decode(scores)
            shifted = (scores + rng.normal(size=(size, 1))
                       + rng.normal(size=(1, size)))
            assert np.array_equal(ml_decode(shifted), base)

    def test_output_is_permutation(self):
        rng = philox_stream(33)
        for _ in range(100):
            size = int(rng.integers(2, 9))
            decoded = ml_decode(rng.normal(size=(size, size)))
            assert sorted(decoded.tolist()) == list(range(size))


class TestExhaustiveDecode:
    def test_examples(self):
        assert exhaustive_decode([[0, -10], [-10, 0]]).tolist() == [0, 1]
        assert exhaustive_decode([[0.0, 0.0], [0.0, 0.0]]).tolist() == [0, 1]

    def test_size_guard(self):
        with pytest.raises(ValueError, match="<= 10"):
            exhaustive_decode(np.zeros((11, 11)))

    def test_all_infeasible(self):
        with pytest.raises(NoFeasibleAssignmentError):
            exhaustive_decode([[-INF, -INF], [-INF, -INF]])


class TestOracleEquivalence:
    @pytest.mark.parametrize("size", [2, 3, 4, 5])
    def test_random_matrices(self, size):
        rng = philox_stream(40, size)
        for _ in range(150):
            scores = rng.normal(size=(size, size)) * 5.0
            assert np.array_equal(ml_decode(scores), exhaustive_decode(scores))

    def test_random_5x5_matches_oracle(self):
        rng = philox_stream(41)
        for _ in range(100):
            scores = rng.normal(size=(5, 5))
            assert np.array_equal(ml_decode(scores), exhaustive_decode(scores))

    @pytest.mark.parametrize("size", [2, 3, 4, 5])
    def test_integer_matrices_with_ties(self, size):
        # small integer ranges force frequent exact score ties
        rng = philox_stream(42, size)
        for _ in range(300):
            scores = rng.integers(0, 3, size=(size, size)).astype(float)
            assert np.array_equal(ml_decode(scores), exhaustive_decode(scores))

    @pytest.mark.parametrize("size", [3, 4, 5])
    def test_matrices_with_infeasible_entries(self, size):
        rng = philox_stream(43, size)
        for _ in range(200):
            scores = rng.normal(size=(size, size))
            mask = rng.random((size, size)) < 0.3
            scores[mask] = -INF
            try:
                expected = exhaustive_decode(scores)
            except NoFeasibleAssignmentError:
                with pytest.raises(NoFeasibleAssignmentError):
                    ml_decode(scores)
                continue
            assert np.array_equal(ml_decode(scores), expected)

    def test_tied_integer_matrices_with_infeasible_entries(self):
        rng = philox_stream(44)
        for _ in range(300):
            size = int(rng.integers(2, 6))
            scores = rng.integers(0, 2, size=(size, size)).astype(float)
            mask = rng.random((size, size)) < 0.25
            scores[mask] = -INF
            try:
                expected = exhaustive_decode(scores)
            except NoFeasibleAssignmentError:
                with pytest.raises(NoFeasibleAssignmentError):
                    ml_decode(scores)
                continue
            assert np.array_equal(ml_decode(scores), expected)
