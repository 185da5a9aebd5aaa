"""
Automated market maker with constant-product, constant-sum and
constant-mean (weighted geometric) trading functions.

Pool balances are real-valued; settlement against the integer ledger pays
the trader the floor of the quoted amount and books the fractional
remainder as per-asset dust retained by the pool account.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from django.db import models

from .exceptions import (
    ArgumentError, ConflictError, InsufficientFundsError, InvariantViolation, LiquidityError,
    NotFoundError,
)
from .ledger import NUMERAIRE, AssetId, TokenId

logger = logging.getLogger(__name__)

INVARIANT_TOLERANCE = 1e-9
WEIGHT_TOLERANCE = 1e-12


class Curve(models.TextChoices):
    PRODUCT = 'product', 'Constant product'
    SUM = 'sum', 'Constant sum'
    CONSTANT_MEAN = 'constant_mean', 'Constant mean'


def asset_label(asset):
    return str(asset)


def parse_asset(label):
    return label if label == NUMERAIRE else TokenId.parse(label)


@dataclass(frozen=True)
class TradeOrder:
    asset_in: AssetId
    asset_out: AssetId
    amount_in: float

    def __post_init__(self):
        if self.asset_in == self.asset_out:
            raise ArgumentError('a trade needs two different assets')
        if not math.isfinite(self.amount_in) or self.amount_in <= 0:
            raise ArgumentError('amount_in must be positive')

    def to_dict(self):
        return {
            'asset_in': asset_label(self.asset_in),
            'asset_out': asset_label(self.asset_out),
            'amount_in': self.amount_in,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(parse_asset(data['asset_in']), parse_asset(data['asset_out']), data['amount_in'])


@dataclass
class Pool:
    pool_id: str
    assets: List[AssetId]
    balances: Dict[AssetId, float]
    weights: Dict[AssetId, float]
    curve: str
    numeraire: AssetId
    k: float = 0.0
    dust: Dict[AssetId, float] = field(default_factory=dict)

    @property
    def account(self):
        """Ledger account holding the pool's reserves."""
        return f'pool:{self.pool_id}'

    @property
    def tokens(self):
        return [asset for asset in self.assets if asset != self.numeraire]

    def snapshot(self):
        return {
            'pool_id': self.pool_id,
            'curve': self.curve,
            'numeraire': asset_label(self.numeraire),
            'assets': [asset_label(a) for a in self.assets],
            'balances': {asset_label(a): self.balances[a] for a in self.assets},
            'weights': {asset_label(a): self.weights[a] for a in self.assets},
            'k': self.k,
            'dust': {asset_label(a): self.dust.get(a, 0.0) for a in self.assets},
        }


def _curve_value(curve, balances, weights):
    if curve == Curve.PRODUCT:
        return math.prod(balances)
    if curve == Curve.SUM:
        return math.fsum(balances)
    return math.prod(x ** w for x, w in zip(balances, weights))


def invariant(pool):
    """Recompute the trading function from the current balances."""
    return _curve_value(
        pool.curve,
        [pool.balances[a] for a in pool.assets],
        [pool.weights[a] for a in pool.assets],
    )


def value_weights(balances, prices):
    """
    Weights under which a constant-mean pool quotes ``prices``.

    Each weight is the asset's share of total pool value; the numeraire is
    priced at 1 by the caller.
    """
    values = {asset: balances[asset] * prices[asset] for asset in balances}
    total = math.fsum(values.values())
    if total <= 0:
        raise ArgumentError('pool value must be positive')
    return {asset: value / total for asset, value in values.items()}


def create_pool(assets, initial_balances, weights=None, curve=Curve.CONSTANT_MEAN,
                numeraire=NUMERAIRE, pool_id='amm'):
    """
    Build a pool and fix its invariant constant k from the initial state.

    ``weights`` is required for constant-mean pools and must sum to one;
    the product and sum curves treat all assets symmetrically.
    """
    curve = Curve(curve).value
    assets = list(assets)
    if len(assets) < 2:
        raise ArgumentError('a pool needs at least two assets')
    if len(set(assets)) != len(assets):
        raise ConflictError('pool assets must be distinct')
    if numeraire not in assets:
        raise ArgumentError('the numeraire must be one of the pool assets')
    if len(initial_balances) != len(assets):
        raise ArgumentError('one initial balance per asset is required')
    balances = [float(b) for b in initial_balances]
    if any(not math.isfinite(b) or b <= 0 for b in balances):
        raise ArgumentError('initial balances must be positive')

    if weights is None:
        if curve == Curve.CONSTANT_MEAN:
            raise ArgumentError('a constant-mean pool needs explicit weights')
        weights = [1.0 / len(assets)] * len(assets)
    weights = [float(w) for w in weights]
    if len(weights) != len(assets):
        raise ArgumentError('one weight per asset is required')
    if any(not math.isfinite(w) or w <= 0 for w in weights):
        raise ArgumentError('weights must be positive')
    if curve == Curve.CONSTANT_MEAN and abs(math.fsum(weights) - 1.0) > WEIGHT_TOLERANCE:
        raise ArgumentError(f'constant-mean weights sum to {math.fsum(weights)}, not 1')

    pool = Pool(
        pool_id=pool_id,
        assets=assets,
        balances=dict(zip(assets, balances)),
        weights=dict(zip(assets, weights)),
        curve=curve,
        numeraire=numeraire,
        dust={asset: 0.0 for asset in assets},
    )
    pool.k = invariant(pool)
    return pool


def _require_asset(pool, asset):
    if asset not in pool.balances:
        raise NotFoundError(f'{asset_label(asset)} is not listed in pool {pool.pool_id}')


def quote(pool, order):
    """
    Amount n of ``asset_out`` released for ``amount_in`` m, keeping the
    trading function constant. The pool is not modified.
    """
    _require_asset(pool, order.asset_in)
    _require_asset(pool, order.asset_out)
    x = pool.balances[order.asset_in]
    y = pool.balances[order.asset_out]
    m = float(order.amount_in)

    if pool.curve == Curve.PRODUCT:
        n = y * m / (x + m)
    elif pool.curve == Curve.SUM:
        n = m
    else:
        ratio = pool.weights[order.asset_in] / pool.weights[order.asset_out]
        # y * (1 - (x / (x + m)) ** ratio), written to stay accurate for small m
        n = -y * math.expm1(-ratio * math.log1p(m / x))

    if not n < y:
        raise LiquidityError(
            f'trade would drain {asset_label(order.asset_out)} from pool {pool.pool_id}'
        )
    if not n > 0:
        raise LiquidityError('trade is too small to release any output')
    return n


def apply_trade(pool, order):
    """Execute ``order`` against the pool reserves only; returns the amount out."""
    n = quote(pool, order)
    balances = dict(pool.balances)
    balances[order.asset_in] += float(order.amount_in)
    balances[order.asset_out] -= n
    after = _curve_value(pool.curve, [balances[a] for a in pool.assets],
                         [pool.weights[a] for a in pool.assets])
    if abs(after / pool.k - 1.0) > INVARIANT_TOLERANCE:
        raise InvariantViolation('amm-invariant', f'k drifted from {pool.k!r} to {after!r}')
    if any(b <= 0 for b in balances.values()):
        raise InvariantViolation('amm-positivity', 'a pool balance reached zero')
    pool.balances = balances
    return n


def spot_price(pool, asset):
    """Marginal price of ``asset`` in numeraire units."""
    _require_asset(pool, asset)
    if asset == pool.numeraire:
        return 1.0
    if pool.curve == Curve.SUM:
        return 1.0
    x_num = pool.balances[pool.numeraire]
    x_asset = pool.balances[asset]
    if pool.curve == Curve.PRODUCT:
        return x_num / x_asset
    return (pool.weights[asset] / x_asset) / (pool.weights[pool.numeraire] / x_num)


def spot_prices(pool):
    return {asset: spot_price(pool, asset) for asset in pool.tokens}


def list_token(pool, token_id, seed_balance, seed_numeraire=0.0, weight=None):
    """
    Add ``token_id`` to a constant-mean pool with the given weight.

    Existing weights are scaled by (1 - weight) so they still sum to one,
    ``seed_numeraire`` is added to the numeraire reserve and k is
    recomputed.
    """
    if pool.curve != Curve.CONSTANT_MEAN:
        raise ArgumentError('tokens can only be listed on a constant-mean pool')
    if token_id in pool.balances:
        raise ConflictError(f'{asset_label(token_id)} is already listed in pool {pool.pool_id}')
    if not seed_balance > 0:
        raise ArgumentError('seed_balance must be positive')
    if seed_numeraire < 0:
        raise ArgumentError('seed_numeraire must be non-negative')
    if weight is None or not 0 < weight < 1:
        raise ArgumentError('the listing weight must lie strictly between 0 and 1')

    weights = {asset: w * (1.0 - weight) for asset, w in pool.weights.items()}
    weights[token_id] = float(weight)
    balances = dict(pool.balances)
    balances[token_id] = float(seed_balance)
    balances[pool.numeraire] += float(seed_numeraire)

    pool.assets = pool.assets + [token_id]
    pool.weights = weights
    pool.balances = balances
    pool.dust[token_id] = 0.0
    pool.k = invariant(pool)
    return pool


@dataclass(frozen=True)
class TradeRecord:
    trader: str
    order: TradeOrder
    amount_out: float
    settled_out: int
    spot_after: Dict[str, float]
    fee: float = 0.0

    def to_dict(self):
        return {
            'trader': self.trader,
            'order': self.order.to_dict(),
            'amount_out': self.amount_out,
            'settled_out': self.settled_out,
            'spot_after': dict(self.spot_after),
            'fee': self.fee,
        }


def swap(pool, order, ledger, trader, fee: Optional[float] = None):
    """
    Execute ``order`` for ``trader`` and settle both legs on the ledger.

    The trader pays exactly ``amount_in`` (whole units) and receives the
    floor of the quote. Every check runs before anything is mutated, so a
    rejected swap leaves pool and ledger untouched.
    """
    if fee:
        raise ArgumentError('trading fees are not supported')
    if int(order.amount_in) != order.amount_in:
        raise ArgumentError('ledger trades must use whole units of the input asset')
    amount_in = int(order.amount_in)
    held = ledger.asset_balance(order.asset_in, trader)
    if held < amount_in:
        raise InsufficientFundsError(
            f'{trader} holds {held} of {asset_label(order.asset_in)}, needs {amount_in}'
        )
    n = quote(pool, order)
    settled = math.floor(n)
    if settled < 1:
        raise LiquidityError('trade output is below one settleable unit')
    if ledger.asset_balance(order.asset_out, pool.account) < settled:
        raise InvariantViolation('amm-backing', f'pool account cannot cover {settled} units')

    apply_trade(pool, order)
    ledger.move(order.asset_in, trader, pool.account, amount_in)
    ledger.move(order.asset_out, pool.account, trader, settled)
    dust = n - settled
    if not 0 <= dust < 1:
        raise InvariantViolation('settlement-dust', f'dust {dust!r} outside [0, 1)')
    pool.dust[order.asset_out] = pool.dust.get(order.asset_out, 0.0) + dust

    return TradeRecord(
        trader=trader,
        order=order,
        amount_out=n,
        settled_out=settled,
        spot_after={asset_label(a): p for a, p in spot_prices(pool).items()},
    )
