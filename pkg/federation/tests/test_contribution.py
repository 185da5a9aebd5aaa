import math

import numpy as np
from django.test import SimpleTestCase

from federation.contribution import (
    ContributionVector, IncentiveMethod, UtilityOracle, assess_round, equal_shares,
    linear_shares, mask_of, members, normalize_to_shares, performance_shares,
    permutation_shapley, shapley_values, subset_model,
)
from federation.exceptions import (
    ArgumentError, CapacityError, DegenerateInputError,
)
from federation.flcore import (
    TrainConfig, evaluate, generate_synthetic_federation, init_model, run_round,
)


def _table_oracle(table, n):
    return UtilityOracle(lambda subset: table[mask_of(subset)], n)


class ShapleyAxiomTests(SimpleTestCase):
    def test_random_oracles(self):
        rng = np.random.default_rng(2024)
        for trial in range(200):
            n = int(rng.integers(2, 7))
            table = rng.normal(size=1 << n)
            phi = shapley_values(_table_oracle(table, n))
            # efficiency
            self.assertAlmostEqual(math.fsum(phi), table[-1] - table[0], delta=1e-9)
            if n <= 5:
                brute = permutation_shapley(_table_oracle(table, n))
                for a, b in zip(phi, brute):
                    self.assertAlmostEqual(a, b, delta=1e-9)

    def test_symmetric_clients_get_equal_values(self):
        rng = np.random.default_rng(7)
        for n in range(3, 7):
            by_key = {}

            def value(subset):
                # clients 0 and 1 are interchangeable
                key = (len(subset & {0, 1}), frozenset(subset - {0, 1}))
                if key not in by_key:
                    by_key[key] = float(rng.normal())
                return by_key[key]

            phi = shapley_values(UtilityOracle(value, n))
            self.assertAlmostEqual(phi[0], phi[1], delta=1e-9)

    def test_dummy_client_gets_zero(self):
        rng = np.random.default_rng(11)
        for n in range(2, 7):
            dummy = n - 1
            table = rng.normal(size=1 << dummy)
            oracle = UtilityOracle(lambda subset: table[mask_of(subset - {dummy})], n)
            self.assertAlmostEqual(shapley_values(oracle)[dummy], 0.0, delta=1e-9)

    def test_additive_game(self):
        weights = [0.5, 1.5, 3.0]
        oracle = UtilityOracle(lambda subset: sum(weights[i] for i in subset), 3)
        for a, b in zip(shapley_values(oracle), weights):
            self.assertAlmostEqual(a, b, delta=1e-12)

    def test_single_client(self):
        oracle = UtilityOracle(lambda subset: 0.9 if subset else 0.4, 1)
        self.assertAlmostEqual(shapley_values(oracle)[0], 0.5, delta=1e-12)

    def test_capacity(self):
        with self.assertRaises(CapacityError):
            shapley_values(UtilityOracle(lambda subset: 0.0, 13))
        with self.assertRaises(CapacityError):
            shapley_values(UtilityOracle(lambda subset: 0.0, 4), max_clients=3)
        with self.assertRaises(CapacityError):
            permutation_shapley(UtilityOracle(lambda subset: 0.0, 9))


class UtilityOracleTests(SimpleTestCase):
    def test_each_subset_evaluated_once(self):
        calls = []

        def evaluator(subset):
            calls.append(subset)
            return float(len(subset))

        oracle = UtilityOracle(evaluator, 4)
        shapley_values(oracle)
        shapley_values(oracle)
        self.assertEqual(len(calls), 16)
        self.assertEqual(oracle.evaluations, 16)
        self.assertEqual(len(set(calls)), 16)

    def test_masks(self):
        self.assertEqual(mask_of([0, 2]), 0b101)
        self.assertEqual(members(0b101), frozenset({0, 2}))
        self.assertEqual(members(0), frozenset())
        with self.assertRaises(ArgumentError):
            UtilityOracle(lambda subset: 0.0, 2).value(0b100)


class ShareTests(SimpleTestCase):
    def test_contribution_vector_validation(self):
        self.assertEqual(len(ContributionVector((0.25, 0.75))), 2)
        with self.assertRaises(ArgumentError):
            ContributionVector(())
        with self.assertRaises(ArgumentError):
            ContributionVector((0.5, 0.6))
        with self.assertRaises(ArgumentError):
            ContributionVector((1.5, -0.5))

    def test_equal_shares(self):
        self.assertEqual(equal_shares(5).shares, (0.2,) * 5)

    def test_linear_shares(self):
        self.assertEqual(linear_shares([100, 300]).shares, (0.25, 0.75))
        with self.assertRaises(DegenerateInputError):
            linear_shares([0, 0])
        with self.assertRaises(ArgumentError):
            linear_shares([-1, 2])

    def test_performance_shares(self):
        shares = performance_shares([0.5, 0.7, 0.9])
        self.assertEqual(shares[0], 0.0)
        self.assertAlmostEqual(shares[2], 2 * shares[1])
        self.assertEqual(performance_shares([0.8, 0.8]).shares, (0.5, 0.5))

    def test_normalize_clips_negatives(self):
        shares = normalize_to_shares([0.3, -0.1, 0.1])
        self.assertEqual(shares[1], 0.0)
        self.assertAlmostEqual(shares[0], 0.75)
        self.assertAlmostEqual(shares[2], 0.25)

    def test_normalize_all_non_positive_falls_back_to_equal(self):
        self.assertEqual(normalize_to_shares([-0.2, 0.0, -1.0]).shares, (1 / 3,) * 3)


class AssessRoundTests(SimpleTestCase):
    def setUp(self):
        self.clients, self.test = generate_synthetic_federation(
            4, 80, 3, 3, 0.3, seed=5, test_samples=120,
        )
        self.sizes = [c.size for c in self.clients]
        self.previous = init_model(3, 3, seed=1)
        cfg = TrainConfig(local_epochs=1, batch_size=16, learning_rate=0.1, seed=3)
        self.new_global, self.updates = run_round(self.previous, self.clients, cfg, round_index=1)

    def test_subset_model_of_everyone_is_the_round_model(self):
        merged = subset_model(self.updates, self.sizes, range(4))
        np.testing.assert_allclose(merged.weights, self.new_global.weights)
        with self.assertRaises(ArgumentError):
            subset_model(self.updates, self.sizes, [])

    def test_equal(self):
        result = assess_round(IncentiveMethod.EQUAL, self.updates, self.sizes, self.previous, self.test)
        self.assertEqual(result.shares.shares, (0.25,) * 4)
        self.assertEqual(result.method, 'equal')

    def test_linear(self):
        result = assess_round('linear', self.updates, self.sizes, self.previous, self.test)
        self.assertEqual(result.shares.shares, (0.25,) * 4)
        self.assertEqual(result.scores, (80.0,) * 4)

    def test_performance(self):
        result = assess_round('performance', self.updates, self.sizes, self.previous, self.test)
        self.assertEqual(result.evaluations, 4)
        self.assertAlmostEqual(math.fsum(result.shares), 1.0, delta=1e-9)

    def test_shapley_is_efficient_against_previous_global(self):
        result = assess_round('shapley', self.updates, self.sizes, self.previous, self.test)
        gain = evaluate(self.new_global, self.test) - evaluate(self.previous, self.test)
        self.assertAlmostEqual(math.fsum(result.scores), gain, delta=1e-9)
        self.assertAlmostEqual(math.fsum(result.shares), 1.0, delta=1e-9)
        self.assertEqual(result.evaluations, 16)

    def test_unknown_method(self):
        with self.assertRaises(ValueError):
            assess_round('auction', self.updates, self.sizes, self.previous, self.test)
