"""
In-process Orchestrator, Scenario and holdings ledger.

The Orchestrator keeps the logbook of registered scenarios, a Scenario
onboards clients and mints their tokens, and the ledger books token and
numeraire balances in integer units. Rewards pass straight through a
Scenario to token holders within the round they are emitted.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Mapping, Tuple, Union

from django.db import models

from .apportion import apportion
from .contribution import IncentiveMethod
from .exceptions import (
    ArgumentError, ConflictError, InsufficientFundsError, InvariantViolation, NotFoundError,
)

logger = logging.getLogger(__name__)

NUMERAIRE = 'NUMERAIRE'


class RewardType(models.TextChoices):
    PRE_ESTABLISHED = 'pre_established', 'Pre-established total'
    PER_ROUND = 'per_round', 'Per-round amounts'


@dataclass(frozen=True, order=True)
class TokenId:
    scenario_id: str
    client_id: str

    def __str__(self):
        return f'{self.scenario_id}/{self.client_id}'

    @classmethod
    def parse(cls, text):
        scenario_id, sep, client_id = str(text).rpartition('/')
        if not sep or not scenario_id or not client_id:
            raise ArgumentError(f'not a token id: {text!r}')
        return cls(scenario_id, client_id)


AssetId = Union[TokenId, str]


def _check_units(amount, what='amount'):
    if isinstance(amount, bool) or int(amount) != amount:
        raise ArgumentError(f'{what} must be a whole number of units')
    if amount < 0:
        raise ArgumentError(f'{what} must be non-negative')
    return int(amount)


@dataclass(frozen=True)
class PreEstablished:
    """A fixed total R paid out over T rounds at a constant rate."""
    total: int
    rounds: int
    kind: ClassVar[str] = RewardType.PRE_ESTABLISHED.value

    def __post_init__(self):
        if _check_units(self.total, 'reward total') <= 0:
            raise ArgumentError('a pre-established reward must be positive')
        if self.rounds < 1:
            raise ArgumentError('a pre-established reward needs at least one round')

    def emissions(self):
        # R/T per round; the indivisible remainder goes to the earliest rounds
        return apportion(self.total, [1] * self.rounds)

    def reward_for_round(self, round_number):
        if not 1 <= round_number <= self.rounds:
            raise ArgumentError(f'round {round_number} outside 1..{self.rounds}')
        return self.emissions()[round_number - 1]

    def to_dict(self):
        return {'type': self.kind, 'total': self.total, 'rounds': self.rounds}


@dataclass(frozen=True)
class PerRound:
    """An explicit reward R_t for every round."""
    amounts: Tuple[int, ...]
    kind: ClassVar[str] = RewardType.PER_ROUND.value

    def __post_init__(self):
        amounts = tuple(_check_units(a, 'round reward') for a in self.amounts)
        if not amounts:
            raise ArgumentError('a per-round schedule needs at least one round')
        object.__setattr__(self, 'amounts', amounts)

    @property
    def rounds(self):
        return len(self.amounts)

    @property
    def total(self):
        return sum(self.amounts)

    def emissions(self):
        return list(self.amounts)

    def reward_for_round(self, round_number):
        if not 1 <= round_number <= self.rounds:
            raise ArgumentError(f'round {round_number} outside 1..{self.rounds}')
        return self.amounts[round_number - 1]

    def to_dict(self):
        return {'type': self.kind, 'amounts': list(self.amounts)}


def schedule_from_dict(data):
    kind = data.get('type')
    if kind == RewardType.PRE_ESTABLISHED:
        return PreEstablished(int(data['total']), int(data['rounds']))
    if kind == RewardType.PER_ROUND:
        return PerRound(tuple(int(a) for a in data['amounts']))
    raise ArgumentError(f'unknown reward schedule type {kind!r}')


@dataclass(frozen=True)
class ScenarioSpec:
    """Registration record the Federator submits to the Orchestrator."""
    scenario_id: str
    use_case: str
    reward_schedule: Union[PreEstablished, PerRound]
    n_clients_expected: int
    aggregation: str = 'fedavg'
    incentive_method: str = IncentiveMethod.SHAPLEY
    token_supply_per_client: int = 1000
    # data scheme, epochs and similar federation details, stored opaquely
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.scenario_id or '/' in self.scenario_id:
            raise ArgumentError('scenario_id must be non-empty and contain no "/"')
        if self.n_clients_expected < 1:
            raise ArgumentError('n_clients_expected must be >= 1')
        if _check_units(self.token_supply_per_client, 'token supply') < 1:
            raise ArgumentError('token_supply_per_client must be positive')
        object.__setattr__(self, 'incentive_method', IncentiveMethod(self.incentive_method).value)

    def to_dict(self):
        return {
            'scenario_id': self.scenario_id,
            'use_case': self.use_case,
            'reward_schedule': self.reward_schedule.to_dict(),
            'n_clients_expected': self.n_clients_expected,
            'aggregation': self.aggregation,
            'incentive_method': self.incentive_method,
            'token_supply_per_client': self.token_supply_per_client,
            'metadata': dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            scenario_id=data['scenario_id'],
            use_case=data['use_case'],
            reward_schedule=schedule_from_dict(data['reward_schedule']),
            n_clients_expected=int(data['n_clients_expected']),
            aggregation=data.get('aggregation', 'fedavg'),
            incentive_method=data.get('incentive_method', IncentiveMethod.SHAPLEY),
            token_supply_per_client=int(data.get('token_supply_per_client', 1000)),
            metadata=dict(data.get('metadata') or {}),
        )


@dataclass(frozen=True)
class PayoutRecord:
    round: int
    token_id: TokenId
    account_id: str
    amount: int

    def to_dict(self):
        return {
            'round': self.round,
            'token': str(self.token_id),
            'account': self.account_id,
            'amount': self.amount,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['round']), TokenId.parse(data['token']), data['account'], int(data['amount']))


class HoldingsLedger:
    """
    Integer balances of client tokens and of the numeraire.

    Token supply is fixed at mint. Numeraire enters the ledger only through
    genesis issuance (budgets, liquidity) or Federator reward emission, and
    the two are counted separately.
    """

    def __init__(self):
        self._balances: Dict[Tuple[TokenId, str], int] = {}
        self._supply: Dict[TokenId, int] = {}
        self._numeraire: Dict[str, int] = {}
        self.numeraire_issued = 0
        self.numeraire_emitted = 0

    # -- tokens -----------------------------------------------------------
    def mint(self, token_id, account, amount):
        amount = _check_units(amount, 'mint amount')
        if token_id in self._supply:
            raise ConflictError(f'token {token_id} has already been minted')
        if amount < 1:
            raise ArgumentError('a token must be minted with a positive supply')
        self._supply[token_id] = amount
        self._balances[(token_id, account)] = amount
        return amount

    def has_token(self, token_id):
        return token_id in self._supply

    def tokens(self):
        return sorted(self._supply)

    def total_supply(self, token_id):
        try:
            return self._supply[token_id]
        except KeyError:
            raise NotFoundError(f'unknown token {token_id}') from None

    def balance(self, token_id, account):
        return self._balances.get((token_id, account), 0)

    def holders(self, token_id):
        """(account, units) pairs with a positive balance, ascending by account."""
        self.total_supply(token_id)
        return sorted(
            (account, units) for (token, account), units in self._balances.items()
            if token == token_id and units > 0
        )

    def transfer(self, token_id, src, dst, amount):
        amount = _check_units(amount)
        self.total_supply(token_id)
        if amount == 0:
            return self
        held = self.balance(token_id, src)
        if held < amount:
            raise InsufficientFundsError(
                f'{src} holds {held} of {token_id}, cannot transfer {amount}'
            )
        self._balances[(token_id, src)] = held - amount
        self._balances[(token_id, dst)] = self.balance(token_id, dst) + amount
        return self

    # -- numeraire --------------------------------------------------------
    def numeraire_balance(self, account):
        return self._numeraire.get(account, 0)

    def issue_numeraire(self, account, amount, purpose='genesis'):
        amount = _check_units(amount)
        self._numeraire[account] = self.numeraire_balance(account) + amount
        self.numeraire_issued += amount
        logger.debug('issued %d numeraire to %s (%s)', amount, account, purpose)

    def transfer_numeraire(self, src, dst, amount):
        amount = _check_units(amount)
        if amount == 0:
            return self
        held = self.numeraire_balance(src)
        if held < amount:
            raise InsufficientFundsError(f'{src} holds {held} numeraire, cannot transfer {amount}')
        self._numeraire[src] = held - amount
        self._numeraire[dst] = self.numeraire_balance(dst) + amount
        return self

    def credit_payouts(self, records):
        """Credit Federator rewards to holders; all records or none."""
        amounts = [_check_units(record.amount, 'payout') for record in records]
        for record, amount in zip(records, amounts):
            self._numeraire[record.account_id] = self.numeraire_balance(record.account_id) + amount
        self.numeraire_emitted += sum(amounts)

    # -- generic asset access used by AMM settlement ------------------------
    def asset_balance(self, asset, account):
        if asset == NUMERAIRE:
            return self.numeraire_balance(account)
        return self.balance(asset, account)

    def move(self, asset, src, dst, amount):
        if asset == NUMERAIRE:
            return self.transfer_numeraire(src, dst, amount)
        return self.transfer(asset, src, dst, amount)

    # -- audit --------------------------------------------------------------
    def check_invariants(self):
        for (token_id, account), units in self._balances.items():
            if units < 0:
                raise InvariantViolation('non-negativity', f'{account} holds {units} of {token_id}')
        for account, units in self._numeraire.items():
            if units < 0:
                raise InvariantViolation('non-negativity', f'{account} holds {units} numeraire')
        for token_id, supply in self._supply.items():
            held = sum(units for (token, _), units in self._balances.items() if token == token_id)
            if held != supply:
                raise InvariantViolation('supply-conservation', f'{token_id}: {held} != {supply}')
        circulating = sum(self._numeraire.values())
        if circulating != self.numeraire_issued + self.numeraire_emitted:
            raise InvariantViolation(
                'numeraire-conservation',
                f'{circulating} held vs {self.numeraire_issued} issued + {self.numeraire_emitted} emitted',
            )

    def snapshot(self):
        tokens = {}
        for token_id in self.tokens():
            tokens[str(token_id)] = {
                'supply': self._supply[token_id],
                'holders': dict(self.holders(token_id)),
            }
        return {
            'tokens': tokens,
            'numeraire': {a: u for a, u in sorted(self._numeraire.items()) if u},
            'numeraire_issued': self.numeraire_issued,
            'numeraire_emitted': self.numeraire_emitted,
        }


class Scenario:
    """Per-federation contract: client onboarding, minting and payouts."""

    def __init__(self, spec, ledger):
        self.spec = spec
        self.ledger = ledger
        self.clients: Dict[str, bool] = {}

    @property
    def scenario_id(self):
        return self.spec.scenario_id

    def token_id(self, client_id):
        return TokenId(self.scenario_id, client_id)

    def join(self, client_id, mint=True):
        if not client_id or '/' in client_id:
            raise ArgumentError('client_id must be non-empty and contain no "/"')
        if client_id in self.clients:
            raise ConflictError(f'{client_id} already joined {self.scenario_id}')
        minted = 0
        if mint:
            minted = self.ledger.mint(self.token_id(client_id), client_id,
                                      self.spec.token_supply_per_client)
        self.clients[client_id] = bool(mint)
        logger.info('%s joined %s (minted %d)', client_id, self.scenario_id, minted)
        return minted

    def distribute_reward(self, round_number, per_client_rewards):
        """
        Split every client's round reward across its token holders.

        Each holder gets the floor of its pro-rata quota, leftover units go
        to the largest remainders (ties by ascending account). A client
        without a token receives its reward directly.
        """
        for client_id, reward in per_client_rewards.items():
            if client_id not in self.clients:
                raise NotFoundError(f'{client_id} has not joined {self.scenario_id}')
            _check_units(reward, 'reward')

        records = []
        for client_id in sorted(per_client_rewards):
            reward = int(per_client_rewards[client_id])
            if reward == 0:
                continue
            token_id = self.token_id(client_id)
            if self.clients[client_id]:
                holders = self.ledger.holders(token_id)
            else:
                holders = [(client_id, 1)]
            amounts = apportion(reward, [units for _, units in holders])
            records.extend(
                PayoutRecord(round_number, token_id, account, amount)
                for (account, _), amount in zip(holders, amounts) if amount > 0
            )
        self.ledger.credit_payouts(records)
        return records


class Orchestrator:
    """Registry of every scenario created, in registration order."""

    def __init__(self, ledger=None):
        self.ledger = ledger if ledger is not None else HoldingsLedger()
        self._scenarios: Dict[str, Scenario] = {}

    def register_scenario(self, spec):
        if spec.scenario_id in self._scenarios:
            raise ConflictError(f'scenario {spec.scenario_id} is already registered')
        self._scenarios[spec.scenario_id] = Scenario(spec, self.ledger)
        logger.info('registered scenario %s (%s)', spec.scenario_id, spec.use_case)
        return spec.scenario_id

    def scenario(self, scenario_id):
        try:
            return self._scenarios[scenario_id]
        except KeyError:
            raise NotFoundError(f'unknown scenario {scenario_id}') from None

    def lookup(self, scenario_id):
        return self.scenario(scenario_id).spec

    def list_scenarios(self):
        return [scenario.spec for scenario in self._scenarios.values()]

    def join_scenario(self, scenario_id, client_id, mint=True):
        return self.scenario(scenario_id).join(client_id, mint)

    def distribute_reward(self, scenario_id, round_number, per_client_rewards):
        return self.scenario(scenario_id).distribute_reward(round_number, per_client_rewards)
