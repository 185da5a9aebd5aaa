"""
Re-derive a run's ledger and pool from its exported event log.

Replay does not retrain anything: contribution shares and reward amounts
are taken from the log, while every state transition they drive (minting,
liquidity, payouts, swaps) is re-executed on fresh objects and compared
with what the log recorded. Any disagreement is an invariant violation.
"""
import json
import logging
from dataclasses import dataclass

from . import amm
from .events import EventKind, EventLog, dumps
from .exceptions import ArgumentError, InvariantViolation, SimulationError
from .harness import REJECTABLE, final_state
from .ledger import HoldingsLedger, Orchestrator, ScenarioSpec, TokenId

logger = logging.getLogger(__name__)


def _canonical(data):
    return json.loads(dumps(data))


@dataclass
class ReplayReport:
    events: int
    rounds: int
    trades: int
    rejected: int
    total_emitted: int
    total_paid: int
    final_state: dict


class _Replayer:
    def __init__(self):
        self.ledger = HoldingsLedger()
        self.orchestrator = Orchestrator(self.ledger)
        self.scenario_id = None
        self.pool = None
        self.fair = {}
        self.emitted = {}
        self.paid_rounds = set()
        self.trades = 0
        self.rejected = 0
        self.total_emitted = 0
        self.total_paid = 0
        self.final_state = None

    def diverged(self, event, detail):
        return InvariantViolation('replay-divergence',
                                  f'{event.kind} at round {event.round} seq {event.seq}: {detail}')

    def apply(self, event):
        handler = getattr(self, f'on_{event.kind}', None)
        if handler is not None:
            handler(event, event.payload)

    # -- onboarding ---------------------------------------------------------
    def on_ScenarioRegistered(self, event, payload):
        self.scenario_id = self.orchestrator.register_scenario(ScenarioSpec.from_dict(payload['spec']))

    def on_ClientJoined(self, event, payload):
        minted = self.orchestrator.join_scenario(self.scenario_id, payload['client'], payload['mint'])
        if minted != payload['minted']:
            raise self.diverged(event, f'minted {minted}, log says {payload["minted"]}')

    def on_NumeraireIssued(self, event, payload):
        self.ledger.issue_numeraire(payload['account'], payload['amount'], payload['purpose'])

    def on_LiquiditySeeded(self, event, payload):
        asset = amm.parse_asset(payload['asset'])
        self.ledger.move(asset, payload['account'], payload['pool'], payload['amount'])

    def on_PoolCreated(self, event, payload):
        recorded = payload['pool']
        assets = [amm.parse_asset(label) for label in recorded['assets']]
        self.pool = amm.create_pool(
            assets,
            [recorded['balances'][label] for label in recorded['assets']],
            [recorded['weights'][label] for label in recorded['assets']],
            curve=recorded['curve'],
            numeraire=amm.parse_asset(recorded['numeraire']),
            pool_id=recorded['pool_id'],
        )
        if _canonical(self.pool.snapshot()) != recorded:
            raise self.diverged(event, 'rebuilt pool differs from the recorded one')
        for asset in assets:
            if self.ledger.asset_balance(asset, self.pool.account) != self.pool.balances[asset]:
                raise InvariantViolation('amm-backing',
                                         f'{amm.asset_label(asset)} reserve is not held by the pool')

    # -- rounds -------------------------------------------------------------
    def on_RewardEmitted(self, event, payload):
        amounts = payload['amounts']
        if sum(amounts.values()) != payload['total']:
            raise InvariantViolation('reward-conservation',
                                     f'round {event.round}: amounts do not add up to the emission')
        self.emitted[event.round] = amounts
        self.total_emitted += payload['total']

    def on_PayoutExecuted(self, event, payload):
        amounts = self.emitted.get(event.round)
        if amounts is None:
            raise InvariantViolation('phase-order', f'round {event.round}: payout before emission')
        records = self.orchestrator.distribute_reward(self.scenario_id, event.round, amounts)
        if [record.to_dict() for record in records] != payload['records']:
            raise self.diverged(event, 'recomputed payouts differ from the recorded ones')
        paid = sum(record.amount for record in records)
        if paid != sum(amounts.values()):
            raise InvariantViolation('reward-conservation',
                                     f'round {event.round}: paid {paid} of {sum(amounts.values())}')
        self.paid_rounds.add(event.round)
        self.total_paid += paid
        self.ledger.check_invariants()

    def _check_phase(self, event):
        if event.round > 0 and event.round not in self.paid_rounds:
            raise InvariantViolation('phase-order',
                                     f'round {event.round}: trade before the round payout')
        if self.pool is None:
            raise self.diverged(event, 'trade without a pool')

    def on_TradeExecuted(self, event, payload):
        self._check_phase(event)
        order = amm.TradeOrder.from_dict(payload['order'])
        record = amm.swap(self.pool, order, self.ledger, payload['trader'])
        if _canonical(record.to_dict()) != payload:
            raise self.diverged(event, 'swap outcome differs from the recorded one')
        self.trades += 1

    def on_OrderRejected(self, event, payload):
        self._check_phase(event)
        order = amm.TradeOrder.from_dict(payload['order'])
        try:
            amm.swap(self.pool, order, self.ledger, payload['trader'])
        except REJECTABLE:
            self.rejected += 1
            return
        raise self.diverged(event, 'a rejected order settles on replay')

    def on_PricesObserved(self, event, payload):
        self.fair = {}
        for label, observed in payload['prices'].items():
            token = TokenId.parse(label)
            self.fair[token] = observed['fair']
            if self.pool is not None and observed['spot'] != amm.spot_price(self.pool, token):
                raise self.diverged(event, f'spot price of {label} differs')

    def on_SimulationCompleted(self, event, payload):
        self.ledger.check_invariants()
        self.final_state = final_state(self.ledger, self.pool, self.fair)
        if _canonical(self.final_state) != payload['final_state']:
            raise self.diverged(event, 'recomputed final state differs from the recorded one')


def replay(source):
    """
    Replay an event log given as a path to ``events.jsonl`` or as an
    :class:`EventLog`, re-checking every invariant along the way.
    """
    if isinstance(source, EventLog):
        events = source
    else:
        try:
            with open(source, encoding='utf-8') as handle:
                events = EventLog.from_jsonl(handle.read())
        except OSError as exc:
            raise ArgumentError(f'cannot read {source}: {exc.strerror or exc}') from exc

    replayer = _Replayer()
    for event in events:
        try:
            replayer.apply(event)
        except InvariantViolation:
            raise
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f'seq {event.seq}: malformed {event.kind} payload ({exc})') from exc
        except SimulationError as exc:
            raise replayer.diverged(event, str(exc)) from exc
    if replayer.final_state is None:
        raise ArgumentError('the event log ends before the simulation completed')
    if replayer.total_paid != replayer.total_emitted:
        raise InvariantViolation('reward-conservation',
                                 f'paid {replayer.total_paid} of {replayer.total_emitted}')

    rounds = max((event.round for event in events), default=0)
    logger.info('replayed %d events over %d rounds', len(events), rounds)
    return ReplayReport(
        events=len(events),
        rounds=rounds,
        trades=replayer.trades,
        rejected=replayer.rejected,
        total_emitted=replayer.total_emitted,
        total_paid=replayer.total_paid,
        final_state=replayer.final_state,
    )
