import numpy as np
from django.test import SimpleTestCase

from federation.agents import (
    ClientPolicy, ClientState, InvestorKind, InvestorPolicy, InvestorState, client_act,
    investor_act,
)
from federation.amm import TradeOrder
from federation.exceptions import ArgumentError
from federation.ledger import NUMERAIRE, TokenId

A = TokenId('wsf', 'client-00')
B = TokenId('wsf', 'client-01')


def _state(spot=2.0, fair=2.0, holdings=None, round_number=1, bought=frozenset()):
    return InvestorState(
        round=round_number,
        spot_prices={A: spot, B: spot},
        fair_values={A: fair, B: fair},
        holdings=holdings or {},
        numeraire=1000,
        bought=bought,
    )


class ClientPolicyTests(SimpleTestCase):
    def test_sell_at_join(self):
        policy = ClientPolicy(sell_fraction_at_join=0.25)
        orders = client_act(policy, ClientState(0, A, 1000, 900, joining=True))
        self.assertEqual(orders, [TradeOrder(A, NUMERAIRE, 250)])

    def test_per_round_sale_uses_holdings(self):
        policy = ClientPolicy(per_round_sell_fraction=0.1)
        self.assertEqual(client_act(policy, ClientState(3, A, 1000, 405)), [TradeOrder(A, NUMERAIRE, 40)])
        self.assertEqual(client_act(policy, ClientState(3, A, 1000, 9)), [])

    def test_hold(self):
        self.assertEqual(client_act(ClientPolicy(), ClientState(0, A, 1000, 1000, joining=True)), [])

    def test_fractions_are_bounded(self):
        with self.assertRaises(ArgumentError):
            ClientPolicy(sell_fraction_at_join=1.5)


class InvestorPolicyTests(SimpleTestCase):
    def test_buy_and_hold_buys_once(self):
        policy = InvestorPolicy(InvestorKind.BUY_AND_HOLD, trade_size=3, target_tokens=(B, A))
        orders = investor_act(policy, _state(spot=2.5))
        self.assertEqual(orders, [TradeOrder(NUMERAIRE, A, 8), TradeOrder(NUMERAIRE, B, 8)])
        self.assertEqual(investor_act(policy, _state(bought=frozenset({A, B}))), [])

    def test_value_dead_band(self):
        policy = InvestorPolicy(InvestorKind.VALUE, trade_size=5, target_tokens=(A,), margin=0.1)
        self.assertEqual(investor_act(policy, _state(spot=2.0, fair=2.0)), [])

    def test_value_buys_cheap_and_sells_dear(self):
        policy = InvestorPolicy(InvestorKind.VALUE, trade_size=5, target_tokens=(A,), margin=0.1)
        self.assertEqual(investor_act(policy, _state(spot=1.0, fair=2.0)), [TradeOrder(NUMERAIRE, A, 5)])
        self.assertEqual(investor_act(policy, _state(spot=3.0, fair=2.0, holdings={A: 2})),
                         [TradeOrder(A, NUMERAIRE, 2)])
        self.assertEqual(investor_act(policy, _state(spot=3.0, fair=2.0)), [])

    def test_noise_is_deterministic(self):
        policy = InvestorPolicy(InvestorKind.NOISE, trade_size=1, target_tokens=(A, B), seed=17)
        for round_number in range(1, 20):
            state = _state(holdings={A: 5, B: 5}, round_number=round_number)
            self.assertEqual(investor_act(policy, state), investor_act(policy, state))

    def test_noise_varies_across_rounds(self):
        policy = InvestorPolicy(InvestorKind.NOISE, trade_size=1, target_tokens=(A,), seed=3)
        sides = {
            investor_act(policy, _state(holdings={A: 5}, round_number=r))[0].asset_in
            for r in range(1, 40)
        }
        self.assertEqual(sides, {NUMERAIRE, A})

    def test_unlisted_tokens_are_skipped(self):
        policy = InvestorPolicy(InvestorKind.BUY_AND_HOLD, trade_size=1,
                                target_tokens=(TokenId('wsf', 'client-09'),))
        self.assertEqual(investor_act(policy, _state()), [])

    def test_validation(self):
        with self.assertRaises(ArgumentError):
            InvestorPolicy(InvestorKind.VALUE, trade_size=0, target_tokens=(A,))
        with self.assertRaises(ArgumentError):
            InvestorPolicy(InvestorKind.VALUE, trade_size=1, target_tokens=(A,), margin=0)
        with self.assertRaises(ValueError):
            InvestorPolicy('momentum', trade_size=1, target_tokens=(A,))

    def test_value_never_buys_above_fair_value(self):
        rng = np.random.default_rng(17)
        policy = InvestorPolicy(InvestorKind.VALUE, trade_size=4, target_tokens=(A, B), margin=0.05)
        for _ in range(500):
            spot, fair = rng.uniform(0.01, 10.0, size=2)
            state = _state(spot=float(spot), fair=float(fair), holdings={A: 3, B: 3})
            for order in investor_act(policy, state):
                if order.asset_in == NUMERAIRE:
                    self.assertLessEqual(spot, fair * (1 + policy.margin))
                else:
                    self.assertGreater(spot, fair * (1 - policy.margin))
