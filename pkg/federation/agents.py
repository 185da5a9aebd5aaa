"""
Client token-sale policies and third-party investor strategies.

Policies are pure: they map an observed state to a list of orders and keep
no memory of their own. Whatever they need to remember (which tokens a
buy-and-hold investor already bought) travels in the state the harness
passes in.
"""
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Mapping, Optional, Tuple

import numpy as np
from django.db import models

from .amm import TradeOrder
from .exceptions import ArgumentError
from .ledger import NUMERAIRE, TokenId


class InvestorKind(models.TextChoices):
    BUY_AND_HOLD = 'buy_and_hold', 'Buy and hold'
    VALUE = 'value', 'Value'
    NOISE = 'noise', 'Noise'


@dataclass(frozen=True)
class InvestorPolicy:
    kind: str
    trade_size: int
    target_tokens: Tuple[TokenId, ...]
    budget: int = 0
    margin: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kind', InvestorKind(self.kind).value)
        object.__setattr__(self, 'target_tokens', tuple(sorted(self.target_tokens)))
        if self.trade_size < 1:
            raise ArgumentError('trade_size must be a positive number of units')
        if self.budget < 0:
            raise ArgumentError('budget must be non-negative')
        if self.kind == InvestorKind.VALUE and not self.margin > 0:
            raise ArgumentError('a value investor needs a positive margin')


@dataclass(frozen=True)
class ClientPolicy:
    sell_fraction_at_join: float = 0.0
    per_round_sell_fraction: float = 0.0
    # optional strategy over other clients' tokens
    investor: Optional[InvestorPolicy] = None

    def __post_init__(self):
        for name in ('sell_fraction_at_join', 'per_round_sell_fraction'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ArgumentError(f'{name} must lie in [0, 1]')


@dataclass(frozen=True)
class ClientState:
    round: int
    token: TokenId
    supply: int
    holdings: int
    joining: bool = False


@dataclass(frozen=True)
class InvestorState:
    round: int
    spot_prices: Mapping[TokenId, float]
    fair_values: Mapping[TokenId, float]
    holdings: Mapping[TokenId, int]
    numeraire: int
    bought: FrozenSet[TokenId] = field(default_factory=frozenset)


def client_act(policy, state):
    """Sale orders of a client's own token for this round."""
    if state.joining:
        amount = math.floor(policy.sell_fraction_at_join * state.supply)
    else:
        amount = math.floor(policy.per_round_sell_fraction * state.holdings)
    amount = min(amount, state.holdings)
    if amount < 1:
        return []
    return [TradeOrder(state.token, NUMERAIRE, amount)]


def _buy(token, spot, trade_size):
    return TradeOrder(NUMERAIRE, token, max(1, math.ceil(trade_size * spot)))


def _sell(token, holdings, trade_size):
    amount = min(trade_size, holdings.get(token, 0))
    return [TradeOrder(token, NUMERAIRE, amount)] if amount > 0 else []


def investor_act(policy, state):
    """
    Orders of an investor for this round.

    Buys spend roughly ``trade_size`` tokens' worth of numeraire at the
    current spot price; sells offer up to ``trade_size`` held tokens.
    Funds are not checked here: the ledger rejects what cannot settle.
    """
    orders = []
    for index, token in enumerate(policy.target_tokens):
        spot = state.spot_prices.get(token)
        if spot is None:
            continue

        if policy.kind == InvestorKind.BUY_AND_HOLD:
            if token not in state.bought:
                orders.append(_buy(token, spot, policy.trade_size))

        elif policy.kind == InvestorKind.VALUE:
            fair = state.fair_values[token]
            if spot < fair * (1 - policy.margin):
                orders.append(_buy(token, spot, policy.trade_size))
            elif spot > fair * (1 + policy.margin):
                orders.extend(_sell(token, state.holdings, policy.trade_size))

        else:
            coin = np.random.default_rng((policy.seed, state.round, index)).random()
            if coin < 0.5:
                orders.append(_buy(token, spot, policy.trade_size))
            else:
                orders.extend(_sell(token, state.holdings, policy.trade_size))
    return orders
