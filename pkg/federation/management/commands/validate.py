"""
Check an experiment file without running it: python manage.py validate <config>
"""
from django.core.management.base import BaseCommand, CommandError

from federation.config import load_config, validate_config
from federation.exceptions import ConfigError


class Command(BaseCommand):
    help = 'Validate a WallStreetFeds experiment file and list every problem found.'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Experiment YAML file')

    def handle(self, *args, **options):
        path = options['config']
        try:
            violations = validate_config(load_config(path))
        except ConfigError as exc:
            violations = exc.violations
        if violations:
            for violation in violations:
                self.stderr.write(self.style.ERROR(f'  {violation}'))
            raise CommandError(f'{path}: {len(violations)} configuration problem(s)', returncode=1)
        self.stdout.write(self.style.SUCCESS(f'{path} is valid'))
