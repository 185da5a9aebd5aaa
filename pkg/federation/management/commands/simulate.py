"""
Run one experiment: python manage.py simulate <config> [--seed N] [--out DIR]
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from federation.config import load_config, validate_config
from federation.exceptions import ConfigError, InvariantViolation, SimulationError
from federation.export import export_csv
from federation.harness import run_simulation
from federation.records import record_failure, record_run

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Run a WallStreetFeds simulation and export its result files.'

    def add_arguments(self, parser):
        parser.add_argument('config', nargs='?', default=str(settings.WSF_DEFAULT_CONFIG),
                            help='Experiment YAML file (defaults to WSF_DEFAULT_CONFIG)')
        parser.add_argument('--seed', type=int, help='Override the seed in the config file')
        parser.add_argument('--out', help='Directory for the exported CSV and event files')

    def _record(self, action, *args):
        if not settings.WSF_RECORD_RUNS:
            return None
        try:
            return action(*args)
        except DatabaseError as exc:
            logger.warning('run not recorded (is the database migrated?): %s', exc)
            return None

    def handle(self, *args, **options):
        path = options['config']
        try:
            config = load_config(path)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=1)
        if options['seed'] is not None:
            config.seed = options['seed']

        violations = validate_config(config)
        if violations:
            for violation in violations:
                self.stderr.write(self.style.ERROR(f'  {violation}'))
            raise CommandError(f'{path}: {len(violations)} configuration problem(s)', returncode=1)

        out_dir = options['out'] or config.output.dir or str(settings.WSF_OUTPUT_DIR)
        try:
            result = run_simulation(config)
        except InvariantViolation as exc:
            self._record(record_failure, path, config.seed, exc)
            raise CommandError(str(exc), returncode=2)
        except SimulationError as exc:
            self._record(record_failure, path, config.seed, exc)
            raise CommandError(str(exc), returncode=1)

        try:
            paths = export_csv(result.events, out_dir)
        except OSError as exc:
            raise CommandError(f'cannot write results to {out_dir}: {exc.strerror or exc}', returncode=1)
        run = self._record(record_run, result, path, out_dir)

        self.stdout.write(f'Rounds: {result.config.federation.rounds}')
        self.stdout.write(f'Final utility: {result.final_utility:.4f}')
        self.stdout.write(f'Reward emitted: {result.total_emitted} / paid: {result.total_paid}')
        for name, file_path in paths.items():
            self.stdout.write(f'  {name}: {file_path}')
        if run is not None:
            self.stdout.write(f'Recorded as run {run.pk}')
        self.stdout.write(self.style.SUCCESS('Simulation completed'))
