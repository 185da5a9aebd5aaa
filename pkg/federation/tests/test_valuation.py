from django.test import SimpleTestCase

from federation.exceptions import ArgumentError
from federation.ledger import PerRound, PreEstablished
from federation.valuation import (
    ValuationInputs, expected_open_ended_total, expected_per_round_reward,
    expected_total_per_client, fair_token_value, open_ended_value, token_value,
)


class ExpectationTests(SimpleTestCase):
    def test_pre_established(self):
        self.assertEqual(expected_per_round_reward(1_000_000, 10, 5), 20_000)
        self.assertEqual(expected_total_per_client(1_000_000, 5), 200_000)

    def test_open_ended(self):
        self.assertEqual(expected_open_ended_total([100, 200, 300], 3), 200)

    def test_invalid(self):
        with self.assertRaises(ArgumentError):
            expected_per_round_reward(100, 0, 5)
        with self.assertRaises(ArgumentError):
            expected_total_per_client(100, 0)


class FairTokenValueTests(SimpleTestCase):
    def test_decays_linearly_to_zero(self):
        values = [fair_token_value(1_000_000, 10, t, 5, 1000) for t in range(11)]
        self.assertEqual(values[0], 200.0)
        self.assertEqual(values[5], 100.0)
        self.assertEqual(values[10], 0.0)
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_round_outside_schedule(self):
        with self.assertRaises(ArgumentError):
            fair_token_value(100, 10, 11, 5, 1000)
        with self.assertRaises(ArgumentError):
            fair_token_value(100, 10, -1, 5, 1000)


class TokenValueTests(SimpleTestCase):
    def test_pre_established_dispatch(self):
        inputs = ValuationInputs(PreEstablished(1_000_000, 10), n=5, t=3, supply=1000)
        self.assertEqual(token_value(inputs), fair_token_value(1_000_000, 10, 3, 5, 1000))

    def test_per_round_uses_trailing_payouts(self):
        inputs = ValuationInputs(PerRound((500, 500, 500, 500)), n=5, t=2, supply=10,
                                 trailing_payouts=(1.0, 3.0))
        self.assertEqual(token_value(inputs, multiple=4.0, window=5), 8.0)

    def test_per_round_before_first_payout(self):
        inputs = ValuationInputs(PerRound((500, 500)), n=5, t=0, supply=10)
        self.assertEqual(token_value(inputs, multiple=2.0), 20.0)

    def test_per_round_skips_unpaid_leading_rounds(self):
        inputs = ValuationInputs(PerRound((0, 0, 500)), n=5, t=0, supply=10)
        self.assertEqual(token_value(inputs, multiple=2.0), 20.0)
        inputs = ValuationInputs(PerRound((0, 0)), n=5, t=0, supply=10)
        self.assertEqual(token_value(inputs), 0.0)

    def test_per_round_after_schedule_end(self):
        inputs = ValuationInputs(PerRound((500, 500)), n=5, t=2, supply=10, trailing_payouts=(10.0,))
        self.assertEqual(token_value(inputs), 0.0)

    def test_window(self):
        self.assertEqual(open_ended_value([100.0, 1.0, 3.0], multiple=1.0, window=2), 2.0)
        with self.assertRaises(ArgumentError):
            open_ended_value([])
        with self.assertRaises(ArgumentError):
            open_ended_value([1.0], multiple=0)
