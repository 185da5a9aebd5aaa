from django.test import SimpleTestCase

from federation.apportion import apportion
from federation.exceptions import (
    ArgumentError, ConflictError, DegenerateInputError, InsufficientFundsError,
    InvariantViolation, NotFoundError,
)
from federation.ledger import (
    NUMERAIRE, HoldingsLedger, Orchestrator, PayoutRecord, PerRound, PreEstablished,
    ScenarioSpec, TokenId, schedule_from_dict,
)


def _spec(scenario_id='wsf', total=1_000_000, rounds=10, supply=1000):
    return ScenarioSpec(
        scenario_id=scenario_id,
        use_case='synthetic-classification',
        reward_schedule=PreEstablished(total, rounds),
        n_clients_expected=3,
        token_supply_per_client=supply,
    )


class ApportionTests(SimpleTestCase):
    def test_exact_split(self):
        self.assertEqual(apportion(100, [1, 1, 2]), [25, 25, 50])

    def test_largest_remainder_with_ties_by_position(self):
        self.assertEqual(apportion(10, [1, 1, 1]), [4, 3, 3])
        self.assertEqual(apportion(7, [0.5, 0.25, 0.25]), [3, 2, 2])

    def test_sum_is_exact_for_float_weights(self):
        weights = [0.1, 0.2, 0.3, 0.15, 0.25]
        self.assertEqual(sum(apportion(999_999, weights)), 999_999)

    def test_zero_weights_get_nothing(self):
        self.assertEqual(apportion(5, [0, 3, 0]), [0, 5, 0])

    def test_errors(self):
        with self.assertRaises(DegenerateInputError):
            apportion(10, [0, 0])
        with self.assertRaises(ArgumentError):
            apportion(-1, [1])
        with self.assertRaises(ArgumentError):
            apportion(10, [])
        with self.assertRaises(ArgumentError):
            apportion(10, [1, -1])


class ScheduleTests(SimpleTestCase):
    def test_pre_established_emits_the_whole_reward(self):
        schedule = PreEstablished(1_000_003, 10)
        emissions = schedule.emissions()
        self.assertEqual(sum(emissions), 1_000_003)
        self.assertEqual(emissions[:3], [100_001] * 3)
        self.assertEqual(schedule.reward_for_round(10), 100_000)
        with self.assertRaises(ArgumentError):
            schedule.reward_for_round(0)

    def test_per_round(self):
        schedule = PerRound((5, 0, 7))
        self.assertEqual(schedule.rounds, 3)
        self.assertEqual(schedule.total, 12)
        self.assertEqual(schedule.reward_for_round(2), 0)

    def test_round_trip_through_dict(self):
        for schedule in (PreEstablished(100, 4), PerRound((1, 2))):
            self.assertEqual(schedule_from_dict(schedule.to_dict()), schedule)
        with self.assertRaises(ArgumentError):
            schedule_from_dict({'type': 'auction'})

    def test_invalid_schedules(self):
        with self.assertRaises(ArgumentError):
            PreEstablished(0, 10)
        with self.assertRaises(ArgumentError):
            PreEstablished(10, 0)
        with self.assertRaises(ArgumentError):
            PerRound(())


class TokenIdTests(SimpleTestCase):
    def test_parse(self):
        token = TokenId('wsf', 'client-01')
        self.assertEqual(str(token), 'wsf/client-01')
        self.assertEqual(TokenId.parse('wsf/client-01'), token)
        with self.assertRaises(ArgumentError):
            TokenId.parse('client-01')


class HoldingsLedgerTests(SimpleTestCase):
    def setUp(self):
        self.ledger = HoldingsLedger()
        self.token = TokenId('wsf', 'a')
        self.ledger.mint(self.token, 'a', 100)

    def test_transfer(self):
        self.ledger.transfer(self.token, 'a', 'x', 30)
        self.assertEqual(self.ledger.balance(self.token, 'a'), 70)
        self.assertEqual(self.ledger.holders(self.token), [('a', 70), ('x', 30)])
        self.assertEqual(self.ledger.total_supply(self.token), 100)

    def test_failed_transfer_leaves_state_unchanged(self):
        before = self.ledger.snapshot()
        with self.assertRaises(InsufficientFundsError):
            self.ledger.transfer(self.token, 'a', 'x', 101)
        with self.assertRaises(ArgumentError):
            self.ledger.transfer(self.token, 'a', 'x', 1.5)
        with self.assertRaises(NotFoundError):
            self.ledger.transfer(TokenId('wsf', 'b'), 'a', 'x', 1)
        self.assertEqual(self.ledger.snapshot(), before)

    def test_double_mint(self):
        with self.assertRaises(ConflictError):
            self.ledger.mint(self.token, 'a', 5)

    def test_numeraire(self):
        self.ledger.issue_numeraire('inv', 500, 'budget')
        self.ledger.transfer_numeraire('inv', 'pool:amm', 200)
        self.assertEqual(self.ledger.numeraire_balance('inv'), 300)
        self.assertEqual(self.ledger.asset_balance(NUMERAIRE, 'pool:amm'), 200)
        with self.assertRaises(InsufficientFundsError):
            self.ledger.transfer_numeraire('inv', 'x', 301)
        self.ledger.check_invariants()

    def test_issued_and_emitted_are_counted_separately(self):
        self.ledger.issue_numeraire('inv', 50)
        self.ledger.credit_payouts([PayoutRecord(1, self.token, 'a', 20)])
        self.assertEqual(self.ledger.numeraire_issued, 50)
        self.assertEqual(self.ledger.numeraire_emitted, 20)
        self.ledger.check_invariants()

    def test_invariant_check_detects_tampering(self):
        self.ledger._balances[(self.token, 'a')] = 99
        with self.assertRaises(InvariantViolation) as ctx:
            self.ledger.check_invariants()
        self.assertEqual(ctx.exception.invariant, 'supply-conservation')


class ScenarioTests(SimpleTestCase):
    def setUp(self):
        self.orchestrator = Orchestrator()
        self.scenario_id = self.orchestrator.register_scenario(_spec())
        self.ledger = self.orchestrator.ledger

    def test_registry(self):
        self.assertEqual(self.orchestrator.lookup('wsf').use_case, 'synthetic-classification')
        self.assertEqual([s.scenario_id for s in self.orchestrator.list_scenarios()], ['wsf'])
        with self.assertRaises(ConflictError):
            self.orchestrator.register_scenario(_spec())
        with self.assertRaises(NotFoundError):
            self.orchestrator.lookup('other')

    def test_not_found_is_an_object_does_not_exist(self):
        from django.core.exceptions import ObjectDoesNotExist
        with self.assertRaises(ObjectDoesNotExist):
            self.orchestrator.scenario('other')

    def test_join_mints_supply(self):
        self.assertEqual(self.orchestrator.join_scenario('wsf', 'a'), 1000)
        self.assertEqual(self.ledger.balance(TokenId('wsf', 'a'), 'a'), 1000)
        with self.assertRaises(ConflictError):
            self.orchestrator.join_scenario('wsf', 'a')
        with self.assertRaises(ArgumentError):
            self.orchestrator.join_scenario('wsf', 'bad/id')

    def test_holder_payouts_are_pro_rata(self):
        self.orchestrator.join_scenario('wsf', 'a')
        token = TokenId('wsf', 'a')
        self.ledger.transfer(token, 'a', 'inv', 250)
        records = self.orchestrator.distribute_reward('wsf', 1, {'a': 1000})
        paid = {r.account_id: r.amount for r in records}
        self.assertEqual(paid, {'a': 750, 'inv': 250})
        self.assertEqual(self.ledger.numeraire_emitted, 1000)

    def test_payout_remainders_are_conserved(self):
        self.orchestrator.join_scenario('wsf', 'a')
        token = TokenId('wsf', 'a')
        self.ledger.transfer(token, 'a', 'x', 333)
        self.ledger.transfer(token, 'a', 'y', 333)
        records = self.orchestrator.distribute_reward('wsf', 1, {'a': 10})
        self.assertEqual(sum(r.amount for r in records), 10)
        # 334/333/333 holdings: the leftover unit goes to the largest remainder
        paid = {r.account_id: r.amount for r in records}
        self.assertEqual(paid, {'a': 4, 'x': 3, 'y': 3})

    def test_larger_holdings_never_get_less(self):
        self.orchestrator.join_scenario('wsf', 'a')
        token = TokenId('wsf', 'a')
        self.ledger.transfer(token, 'a', 'b', 400)
        self.ledger.transfer(token, 'a', 'c', 1)
        records = self.orchestrator.distribute_reward('wsf', 1, {'a': 997})
        paid = {r.account_id: r.amount for r in records}
        self.assertGreaterEqual(paid['a'], paid['b'])
        self.assertGreaterEqual(paid['b'], paid.get('c', 0))

    def test_unminted_client_is_paid_directly(self):
        self.orchestrator.join_scenario('wsf', 'a', mint=False)
        self.assertFalse(self.ledger.has_token(TokenId('wsf', 'a')))
        records = self.orchestrator.distribute_reward('wsf', 1, {'a': 42})
        self.assertEqual([(r.account_id, r.amount) for r in records], [('a', 42)])
        self.assertEqual(self.ledger.numeraire_balance('a'), 42)

    def test_zero_reward_produces_no_records(self):
        self.orchestrator.join_scenario('wsf', 'a')
        self.assertEqual(self.orchestrator.distribute_reward('wsf', 1, {'a': 0}), [])

    def test_unknown_client(self):
        with self.assertRaises(NotFoundError):
            self.orchestrator.distribute_reward('wsf', 1, {'ghost': 5})
        self.assertEqual(self.ledger.numeraire_emitted, 0)

    def test_spec_round_trip(self):
        spec = _spec()
        self.assertEqual(ScenarioSpec.from_dict(spec.to_dict()), spec)
