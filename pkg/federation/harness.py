"""
Round pipeline of a WallStreetFeds simulation.

Round 0 onboards the federation: scenario registration, client joins and
minting, budgets, liquidity and the join-time trading phase. Every
training round then runs FL round -> contribution -> reward emission ->
payout -> trading, in that order, on a single event thread.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import amm
from .agents import ClientPolicy, ClientState, InvestorPolicy, InvestorState, client_act, investor_act
from .apportion import apportion
from .config import client_id, validate_config
from .contribution import assess_round, exact_client_cap
from .events import EventKind, EventLog
from .exceptions import (
    ArgumentError, ConfigError, InsufficientFundsError, InvariantViolation, LiquidityError,
)
from .flcore import generate_synthetic_federation, init_model, run_round, utility
from .ledger import NUMERAIRE, HoldingsLedger, Orchestrator, TokenId
from .valuation import ValuationInputs, token_value

logger = logging.getLogger(__name__)

REJECTABLE = (InsufficientFundsError, LiquidityError, ArgumentError)

# floor in micro-units per token unit, for schedules whose first rewards are zero
MIN_LISTING_PRICE = 1.0


@dataclass
class SimulationResult:
    config: object
    events: EventLog
    ledger: HoldingsLedger
    orchestrator: Orchestrator
    pool: Optional[amm.Pool]
    final_utility: float
    final_state: dict

    @property
    def total_emitted(self):
        return sum(e.payload['total'] for e in self.events.of_kind(EventKind.REWARD_EMITTED))

    @property
    def total_paid(self):
        return sum(
            record['amount']
            for e in self.events.of_kind(EventKind.PAYOUT_EXECUTED)
            for record in e.payload['records']
        )

    def income(self):
        """Cumulative reward payouts per receiving account."""
        totals = defaultdict(int)
        for event in self.events.of_kind(EventKind.PAYOUT_EXECUTED):
            for record in event.payload['records']:
                totals[record['account']] += record['amount']
        return dict(sorted(totals.items()))


def wealth(ledger, pool, fair_values):
    """Mark-to-market value of every account: numeraire plus tokens at spot."""
    prices = {}
    for token in ledger.tokens():
        if pool is not None and token in pool.balances:
            prices[token] = amm.spot_price(pool, token)
        else:
            prices[token] = fair_values.get(token, 0.0)
    snapshot = ledger.snapshot()
    values = defaultdict(float)
    for account, units in snapshot['numeraire'].items():
        values[account] += units
    for token in ledger.tokens():
        for account, units in ledger.holders(token):
            values[account] += units * prices[token]
    return dict(sorted(values.items()))


def final_state(ledger, pool, fair_values):
    return {
        'ledger': ledger.snapshot(),
        'pool': pool.snapshot() if pool is not None else None,
        'wealth': wealth(ledger, pool, fair_values),
    }


class Simulation:
    """One configured run; use :func:`run_simulation` rather than this directly."""

    def __init__(self, config):
        self.config = config
        self.fed = config.federation
        self.log = EventLog()
        self.ledger = HoldingsLedger()
        self.orchestrator = Orchestrator(self.ledger)
        self.spec = config.scenario.spec(self.fed)
        self.schedule = self.spec.reward_schedule
        self.supply = self.spec.token_supply_per_client
        self.minting = config.scenario.mint
        self.train_cfg = self.fed.train_config(config.seed)
        self.client_ids = [client_id(i) for i in range(self.fed.n_clients)]
        self.tokens = {cid: TokenId(self.spec.scenario_id, cid) for cid in self.client_ids}
        self.pool = None
        self.payout_history = {cid: [] for cid in self.client_ids}
        self.bought = defaultdict(set)
        self.client_policies = []
        self.investors = []

    # -- setup ----------------------------------------------------------------
    def _targets(self, targets, own=None):
        if targets == 'all':
            ids = self.client_ids
        elif targets == 'others':
            ids = [cid for cid in self.client_ids if cid != own]
        else:
            ids = [self.client_ids[i] for i in targets]
        return tuple(self.tokens[cid] for cid in ids)

    def _investor_policy(self, investor, own=None):
        return InvestorPolicy(
            kind=investor.kind,
            trade_size=investor.trade_size,
            target_tokens=self._targets(investor.targets, own),
            budget=investor.budget,
            margin=investor.margin,
            seed=investor.seed,
        )

    def _issue(self, account, amount, purpose):
        if amount > 0:
            self.ledger.issue_numeraire(account, amount, purpose)
            self.log.append(0, EventKind.NUMERAIRE_ISSUED, account=account, amount=amount,
                            purpose=purpose)

    def onboard(self):
        settings = self.config.to_dict()
        settings.pop('output', None)
        self.log.append(0, EventKind.SIMULATION_STARTED, config=settings)
        scenario_id = self.orchestrator.register_scenario(self.spec)
        self.log.append(0, EventKind.SCENARIO_REGISTERED, spec=self.spec.to_dict())

        for index, cid in enumerate(self.client_ids):
            minted = self.orchestrator.join_scenario(scenario_id, cid, mint=self.minting)
            self.log.append(0, EventKind.CLIENT_JOINED, client=cid, token=str(self.tokens[cid]),
                            minted=minted, mint=self.minting)
            policy = self.config.client_policy(index)
            investor = None
            if policy.investor is not None:
                investor = self._investor_policy(policy.investor, own=cid)
                self._issue(cid, investor.budget, 'budget')
            self.client_policies.append(ClientPolicy(
                sell_fraction_at_join=policy.sell_fraction_at_join,
                per_round_sell_fraction=policy.per_round_sell_fraction,
                investor=investor,
            ))

        for entry in self.config.agents.investors:
            account = f'investor-{entry.id}'
            policy = self._investor_policy(entry)
            self._issue(account, policy.budget, 'budget')
            self.investors.append((account, policy))

        if self.config.amm.enabled:
            self._seed_pool()

    def _seed_pool(self):
        settings = self.config.amm
        seed_tokens = math.floor(settings.seed_fraction * self.supply)
        listing_price = max(self.fair_value(0, self.client_ids[0]), MIN_LISTING_PRICE)
        pool_account = f'pool:{settings.pool_id}'

        balances = {}
        prices = {}
        for cid in self.client_ids:
            token = self.tokens[cid]
            self.ledger.transfer(token, cid, pool_account, seed_tokens)
            self.log.append(0, EventKind.LIQUIDITY_SEEDED, account=cid, asset=str(token),
                            amount=seed_tokens, pool=pool_account)
            balances[token] = seed_tokens
            prices[token] = listing_price
        if settings.curve == amm.Curve.CONSTANT_MEAN:
            # numeraire carries half the pool value; the weights set the prices
            seed_numeraire = round(listing_price * seed_tokens * len(self.client_ids))
        else:
            # x_num / x_token is the spot price on an equal-weight curve
            seed_numeraire = round(listing_price * seed_tokens)
        seed_numeraire = max(1, seed_numeraire)
        self._issue(settings.liquidity_provider, seed_numeraire, 'liquidity')
        self.ledger.transfer_numeraire(settings.liquidity_provider, pool_account, seed_numeraire)
        self.log.append(0, EventKind.LIQUIDITY_SEEDED, account=settings.liquidity_provider,
                        asset=NUMERAIRE, amount=seed_numeraire, pool=pool_account)
        balances[NUMERAIRE] = seed_numeraire
        prices[NUMERAIRE] = 1.0

        assets = [NUMERAIRE] + [self.tokens[cid] for cid in self.client_ids]
        weights = None
        if settings.curve == amm.Curve.CONSTANT_MEAN:
            by_value = amm.value_weights(balances, prices)
            weights = [by_value[asset] for asset in assets]
        self.pool = amm.create_pool(
            assets, [balances[asset] for asset in assets], weights,
            curve=settings.curve, numeraire=NUMERAIRE, pool_id=settings.pool_id,
        )
        self.log.append(0, EventKind.POOL_CREATED, pool=self.pool.snapshot())

    # -- valuation ----------------------------------------------------------
    def fair_value(self, round_number, cid):
        inputs = ValuationInputs(
            schedule=self.schedule,
            n=self.fed.n_clients,
            t=round_number,
            supply=self.supply,
            trailing_payouts=tuple(self.payout_history[cid]),
        )
        return token_value(inputs, self.config.valuation.multiple, self.config.valuation.window)

    def fair_values(self, round_number):
        return {self.tokens[cid]: self.fair_value(round_number, cid) for cid in self.client_ids}

    # -- trading ------------------------------------------------------------
    def _execute(self, round_number, trader, orders):
        for order in orders:
            try:
                record = amm.swap(self.pool, order, self.ledger, trader)
            except REJECTABLE as exc:
                logger.info('round %d: rejected %s order from %s: %s',
                            round_number, amm.asset_label(order.asset_out), trader, exc)
                self.log.append(round_number, EventKind.ORDER_REJECTED, trader=trader,
                                order=order.to_dict(), reason=str(exc))
                continue
            if order.asset_in == NUMERAIRE:
                self.bought[trader].add(order.asset_out)
            self.log.append(round_number, EventKind.TRADE_EXECUTED, **record.to_dict())

    def _investor_state(self, round_number, account, policy, fair):
        return InvestorState(
            round=round_number,
            spot_prices=amm.spot_prices(self.pool),
            fair_values=fair,
            holdings={token: self.ledger.balance(token, account) for token in policy.target_tokens},
            numeraire=self.ledger.numeraire_balance(account),
            bought=frozenset(self.bought[account]),
        )

    def trade(self, round_number, joining=False):
        if self.pool is None:
            return
        fair = self.fair_values(round_number)
        for cid, policy in zip(self.client_ids, self.client_policies):
            token = self.tokens[cid]
            state = ClientState(round_number, token, self.supply,
                                self.ledger.balance(token, cid), joining)
            self._execute(round_number, cid, client_act(policy, state))
            if policy.investor is not None:
                state = self._investor_state(round_number, cid, policy.investor, fair)
                self._execute(round_number, cid, investor_act(policy.investor, state))
        for account, policy in self.investors:
            state = self._investor_state(round_number, account, policy, fair)
            self._execute(round_number, account, investor_act(policy, state))

    def observe_prices(self, round_number):
        fair = self.fair_values(round_number)
        prices = {}
        if self.minting:
            for cid in self.client_ids:
                token = self.tokens[cid]
                spot = amm.spot_price(self.pool, token) if self.pool is not None else None
                prices[str(token)] = {'spot': spot, 'fair': fair[token]}
        self.log.append(round_number, EventKind.PRICES_OBSERVED, prices=prices)
        return fair

    # -- rounds ---------------------------------------------------------------
    def run(self):
        seeds = np.random.SeedSequence(self.config.seed).generate_state(2)
        clients, test = generate_synthetic_federation(
            self.fed.n_clients, self.fed.samples_per_client, self.fed.classes, self.fed.dim,
            self.fed.dirichlet_alpha, int(seeds[0]),
            test_samples=self.fed.test_samples, separation=self.fed.separation,
        )
        sizes = [client.size for client in clients]
        metric = self.fed.utility_metric
        global_model = init_model(self.fed.dim, self.fed.classes, int(seeds[1]))
        current_utility = utility(global_model, test, metric)

        self.onboard()
        self.trade(0, joining=True)
        fair = self.observe_prices(0)

        for round_number in range(1, self.schedule.rounds + 1):
            reward = self.schedule.reward_for_round(round_number)
            self.log.append(round_number, EventKind.ROUND_STARTED, reward=reward)

            new_global, updates = run_round(global_model, clients, self.train_cfg, round_number)
            new_utility = utility(new_global, test, metric)
            self.log.append(round_number, EventKind.MODEL_AGGREGATED, utility=new_utility,
                            previous_utility=current_utility)

            assessment = assess_round(self.spec.incentive_method, updates, sizes,
                                      global_model, test, metric, exact_client_cap())
            self.log.append(round_number, EventKind.CONTRIBUTION_COMPUTED,
                            method=assessment.method, clients=list(self.client_ids),
                            shares=list(assessment.shares),
                            scores=list(assessment.scores), evaluations=assessment.evaluations)

            amounts = apportion(reward, list(assessment.shares))
            rewards = dict(zip(self.client_ids, amounts))
            self.log.append(round_number, EventKind.REWARD_EMITTED, amounts=rewards, total=reward)

            records = self.orchestrator.distribute_reward(self.spec.scenario_id, round_number, rewards)
            paid = sum(record.amount for record in records)
            self.log.append(round_number, EventKind.PAYOUT_EXECUTED,
                            records=[record.to_dict() for record in records], total=paid)
            if paid != reward:
                raise InvariantViolation('reward-conservation',
                                         f'round {round_number}: paid {paid} of {reward}')
            self.ledger.check_invariants()

            for cid in self.client_ids:
                self.payout_history[cid].append(rewards[cid] / self.supply)
            global_model, current_utility = new_global, new_utility
            logger.info('round %d: utility %.4f, shares %s', round_number, new_utility,
                        ', '.join(f'{s:.3f}' for s in assessment.shares))

            self.trade(round_number)
            fair = self.observe_prices(round_number)

        self.ledger.check_invariants()
        state = final_state(self.ledger, self.pool, fair)
        self.log.append(self.schedule.rounds, EventKind.SIMULATION_COMPLETED,
                        final_utility=current_utility, final_state=state)
        return SimulationResult(
            config=self.config,
            events=self.log,
            ledger=self.ledger,
            orchestrator=self.orchestrator,
            pool=self.pool,
            final_utility=current_utility,
            final_state=state,
        )


def run_simulation(config):
    """Validate ``config`` and run every round of the pipeline."""
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)
    try:
        return Simulation(config).run()
    except InvariantViolation as exc:
        logger.error('simulation aborted: %s', exc)
        raise


def reward_percentages(result):
    """
    Cumulative reward share of each client relative to an equal payout,
    per round, in percent (100 means exactly the equal share).
    """
    cumulative = defaultdict(int)
    total = 0
    series = {}
    for event in result.events.of_kind(EventKind.REWARD_EMITTED):
        amounts = event.payload['amounts']
        for cid, amount in amounts.items():
            cumulative[cid] += amount
        total += event.payload['total']
        if total == 0:
            continue
        equal = total / len(amounts)
        series[event.round] = {cid: 100.0 * cumulative[cid] / equal for cid in sorted(amounts)}
    return series
