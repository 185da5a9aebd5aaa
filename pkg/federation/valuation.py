"""
Token pricing from the reward schedule.

A pre-established reward R over T rounds shared by n clients gives each
client an expected R/(T*n) per round; a token's fair value is the
remaining expected payout divided by the client's token supply, reaching
zero after the last round. Open-ended schedules are valued with a
trailing-earnings multiple.
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

from .exceptions import ArgumentError
from .ledger import PerRound, PreEstablished

DEFAULT_MULTIPLE = 8.0
DEFAULT_WINDOW = 5


def expected_per_round_reward(R, T, n):
    if T < 1 or n < 1:
        raise ArgumentError('T and n must both be >= 1')
    return R / (T * n)


def expected_total_per_client(R, n):
    if n < 1:
        raise ArgumentError('n must be >= 1')
    return R / n


def expected_open_ended_total(round_rewards: Sequence[float], n):
    """(1/n) * sum of R_t: a client's expected share of a reward stream."""
    if n < 1:
        raise ArgumentError('n must be >= 1')
    return sum(round_rewards) / n


def fair_token_value(R, T, t, n, supply):
    """Remaining expected reward per token unit after round ``t``."""
    if T < 1 or n < 1 or supply < 1:
        raise ArgumentError('T, n and supply must all be >= 1')
    if not 0 <= t <= T:
        raise ArgumentError(f'round {t} outside 0..{T}')
    return R * (T - t) / (T * n * supply)


def open_ended_value(trailing_payouts: Sequence[float], multiple=DEFAULT_MULTIPLE,
                     window=DEFAULT_WINDOW):
    """Mean of the last ``window`` per-unit payouts times ``multiple``."""
    if not trailing_payouts:
        raise ArgumentError('open-ended valuation needs at least one payout')
    if not multiple > 0:
        raise ArgumentError('multiple must be positive')
    if window < 1:
        raise ArgumentError('window must be >= 1')
    recent = list(trailing_payouts)[-window:]
    return sum(recent) / len(recent) * multiple


@dataclass(frozen=True)
class ValuationInputs:
    schedule: Union[PreEstablished, PerRound]
    n: int
    t: int
    supply: int
    trailing_payouts: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1 or self.supply < 1:
            raise ArgumentError('n and supply must both be >= 1')
        if isinstance(self.schedule, PreEstablished) and not 0 <= self.t <= self.schedule.rounds:
            raise ArgumentError(f'round {self.t} outside 0..{self.schedule.rounds}')


def token_value(inputs, multiple=DEFAULT_MULTIPLE, window=DEFAULT_WINDOW):
    """
    Fair value of one token unit in numeraire units.

    Pre-established schedules use :func:`fair_token_value`. Per-round
    schedules use the trailing per-unit payouts; before the first payout
    the first non-zero scheduled reward stands in for them.
    """
    schedule = inputs.schedule
    if isinstance(schedule, PreEstablished):
        return fair_token_value(schedule.total, schedule.rounds, inputs.t, inputs.n, inputs.supply)
    if inputs.t >= schedule.rounds:
        return 0.0
    first = next((amount for amount in schedule.amounts if amount > 0), 0)
    history = inputs.trailing_payouts or (first / (inputs.n * inputs.supply),)
    return open_ended_value(history, multiple, window)
