import numpy as np
from django.test import SimpleTestCase

from federation.events import EventKind, EventLog, dumps
from federation.exceptions import ArgumentError, InvariantViolation
from federation.ledger import TokenId


class EventLogTests(SimpleTestCase):
    def test_sequence_numbers_and_filters(self):
        log = EventLog()
        log.append(0, EventKind.SIMULATION_STARTED, config={})
        log.append(1, EventKind.ROUND_STARTED, reward=10)
        log.append(1, 'RewardEmitted', amounts={'a': 10}, total=10)
        self.assertEqual([e.seq for e in log], [0, 1, 2])
        self.assertEqual(log[2].timestamp, (1, 2))
        self.assertEqual(len(log.in_round(1)), 2)
        self.assertEqual(log.of_kind(EventKind.REWARD_EMITTED)[0].payload['total'], 10)

    def test_rounds_never_go_backwards(self):
        log = EventLog()
        log.append(2, EventKind.ROUND_STARTED, reward=1)
        with self.assertRaises(InvariantViolation) as ctx:
            log.append(1, EventKind.ROUND_STARTED, reward=1)
        self.assertEqual(ctx.exception.invariant, 'event-order')

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            EventLog().append(0, 'Airdrop')

    def test_jsonl_round_trip_is_byte_stable(self):
        log = EventLog()
        log.append(0, EventKind.CLIENT_JOINED, client='client-00', token=TokenId('wsf', 'client-00'),
                   minted=np.int64(1000), mint=True)
        log.append(1, EventKind.MODEL_AGGREGATED, utility=np.float64(0.75), previous_utility=0.5)
        text = log.to_jsonl()
        again = EventLog.from_jsonl(text)
        self.assertEqual(again.to_jsonl(), text)
        self.assertEqual(again[0].payload['token'], 'wsf/client-00')
        self.assertEqual(again[0].payload['minted'], 1000)

    def test_encoding_is_canonical(self):
        self.assertEqual(dumps({'b': 1, 'a': [0.1, None]}), '{"a":[0.1,null],"b":1}')
        with self.assertRaises(ValueError):
            dumps({'x': float('nan')})

    def test_malformed_lines(self):
        with self.assertRaises(ArgumentError):
            EventLog.from_jsonl('{not json}\n')
        with self.assertRaises(ArgumentError):
            EventLog.from_jsonl('{"round":0,"seq":0,"kind":"Nope","payload":{}}\n')

    def test_sequence_gaps_are_rejected(self):
        line = '{"kind":"RoundStarted","payload":{"reward":1},"round":1,"seq":5}\n'
        with self.assertRaises(InvariantViolation):
            EventLog.from_jsonl(line)
