"""
Result files of a run: three CSV tables plus the raw event log.

Everything is derived from the event log alone, so an exported run can be
re-exported from its ``events.jsonl`` without re-simulating.
"""
import csv
import logging
import os

import numpy as np

from .events import EventKind

logger = logging.getLogger(__name__)

REWARDS_HEADER = ['round', 'client_id', 'contribution_share', 'reward_micro']
PAYOUTS_HEADER = ['round', 'token', 'account', 'amount']
PRICES_HEADER = ['round', 'token', 'spot_price', 'fair_value']


def _number(value):
    """Shortest round-tripping decimal, never in exponent notation."""
    if value is None:
        return ''
    return np.format_float_positional(float(value), trim='0')


def reward_rows(events):
    contributions = {
        event.round: event.payload
        for event in events.of_kind(EventKind.CONTRIBUTION_COMPUTED)
    }
    for event in events.of_kind(EventKind.REWARD_EMITTED):
        amounts = event.payload['amounts']
        computed = contributions[event.round]
        # client order; the serialised amounts are keyed in string order
        for cid, share in zip(computed['clients'], computed['shares']):
            yield [event.round, cid, _number(share), amounts[cid]]


def payout_rows(events):
    for event in events.of_kind(EventKind.PAYOUT_EXECUTED):
        for record in event.payload['records']:
            yield [record['round'], record['token'], record['account'], record['amount']]


def price_rows(events):
    for event in events.of_kind(EventKind.PRICES_OBSERVED):
        for token, observed in sorted(event.payload['prices'].items()):
            yield [event.round, token, _number(observed['spot']), _number(observed['fair'])]


def _write_table(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def export_csv(events, out_dir):
    """
    Write rewards.csv, payouts.csv, prices.csv and events.jsonl to
    ``out_dir`` (created if missing) and return their paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        'rewards': os.path.join(out_dir, 'rewards.csv'),
        'payouts': os.path.join(out_dir, 'payouts.csv'),
        'prices': os.path.join(out_dir, 'prices.csv'),
        'events': os.path.join(out_dir, 'events.jsonl'),
    }
    _write_table(paths['rewards'], REWARDS_HEADER, reward_rows(events))
    _write_table(paths['payouts'], PAYOUTS_HEADER, payout_rows(events))
    _write_table(paths['prices'], PRICES_HEADER, price_rows(events))
    with open(paths['events'], 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(events.to_jsonl())
    logger.info('exported %d events to %s', len(events), out_dir)
    return paths
