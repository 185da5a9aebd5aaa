"""
Re-derive a run from its event log: python manage.py replay <events.jsonl>
"""
from django.core.management.base import BaseCommand, CommandError

from federation.exceptions import ArgumentError, InvariantViolation, SimulationError
from federation.replay import replay


class Command(BaseCommand):
    help = 'Replay an exported events.jsonl and re-check every ledger and pool invariant.'

    def add_arguments(self, parser):
        parser.add_argument('events', help='Path to events.jsonl')

    def handle(self, *args, **options):
        try:
            report = replay(options['events'])
        except InvariantViolation as exc:
            raise CommandError(str(exc), returncode=2)
        except (ArgumentError, SimulationError) as exc:
            raise CommandError(str(exc), returncode=1)

        self.stdout.write(f'Events: {report.events} over {report.rounds} rounds')
        self.stdout.write(f'Trades: {report.trades} executed, {report.rejected} rejected')
        self.stdout.write(f'Reward emitted: {report.total_emitted} / paid: {report.total_paid}')
        self.stdout.write(self.style.SUCCESS('Replay matches the recorded final state'))
