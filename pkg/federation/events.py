"""
Append-only event log of a simulation run.

Events are ordered by (round, seq); seq is a run-wide counter, so the
pair doubles as the event's logical timestamp and keeps exported logs
byte-identical across runs.
"""
import json
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder
from django.db import models

from .exceptions import ArgumentError, InvariantViolation
from .ledger import TokenId


class EventKind(models.TextChoices):
    SIMULATION_STARTED = 'SimulationStarted'
    SCENARIO_REGISTERED = 'ScenarioRegistered'
    CLIENT_JOINED = 'ClientJoined'
    NUMERAIRE_ISSUED = 'NumeraireIssued'
    LIQUIDITY_SEEDED = 'LiquiditySeeded'
    POOL_CREATED = 'PoolCreated'
    ROUND_STARTED = 'RoundStarted'
    MODEL_AGGREGATED = 'ModelAggregated'
    CONTRIBUTION_COMPUTED = 'ContributionComputed'
    REWARD_EMITTED = 'RewardEmitted'
    PAYOUT_EXECUTED = 'PayoutExecuted'
    TRADE_EXECUTED = 'TradeExecuted'
    ORDER_REJECTED = 'OrderRejected'
    PRICES_OBSERVED = 'PricesObserved'
    SIMULATION_COMPLETED = 'SimulationCompleted'


class EventEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, TokenId):
            return str(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


def dumps(data):
    return json.dumps(data, cls=EventEncoder, sort_keys=True, separators=(',', ':'),
                      allow_nan=False)


@dataclass(frozen=True)
class Event:
    round: int
    seq: int
    kind: str
    payload: Dict[str, Any]

    @property
    def timestamp(self):
        return (self.round, self.seq)

    def to_dict(self):
        return {'round': self.round, 'seq': self.seq, 'kind': self.kind, 'payload': self.payload}


class EventLog:
    def __init__(self):
        self._events = []

    def __iter__(self):
        return iter(self._events)

    def __len__(self):
        return len(self._events)

    def __getitem__(self, index):
        return self._events[index]

    def append(self, round_number, kind, **payload):
        kind = EventKind(kind).value
        if self._events and round_number < self._events[-1].round:
            raise InvariantViolation(
                'event-order',
                f'{kind} for round {round_number} after round {self._events[-1].round}',
            )
        event = Event(round_number, len(self._events), kind, payload)
        self._events.append(event)
        return event

    def of_kind(self, kind):
        kind = EventKind(kind).value
        return [event for event in self._events if event.kind == kind]

    def in_round(self, round_number):
        return [event for event in self._events if event.round == round_number]

    def to_jsonl(self):
        return ''.join(dumps(event.to_dict()) + '\n' for event in self._events)

    @classmethod
    def from_jsonl(cls, text):
        """Rebuild a log from exported lines, re-checking the ordering contract."""
        log = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                event = log.append(data['round'], data['kind'], **data['payload'])
            except (ValueError, KeyError, TypeError) as exc:
                raise ArgumentError(f'line {number}: malformed event ({exc})') from exc
            if data.get('seq') != event.seq:
                raise InvariantViolation('event-order', f'line {number}: seq {data.get("seq")} '
                                                        f'where {event.seq} was expected')
        return log
