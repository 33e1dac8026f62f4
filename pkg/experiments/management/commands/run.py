import json
from pathlib import Path

from django.core.management.base import CommandError

from experiments.verdicts import EXIT_VALIDATION

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Runs the experiment described by a JSON config file'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Path of the JSON experiment config.')

    def handle(self, *args, **options):
        path = Path(options['config'])
        try:
            config = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            self.stderr.write(self.style.ERROR(f'config: {path}: {exc}'))
            raise CommandError('unreadable experiment configuration', returncode=EXIT_VALIDATION)
        if not isinstance(config, dict):
            self.stderr.write(self.style.ERROR('config: expected a JSON object'))
            raise CommandError('invalid experiment configuration', returncode=EXIT_VALIDATION)
        self.execute_config(config)
