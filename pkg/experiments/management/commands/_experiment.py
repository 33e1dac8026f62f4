from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from experiments.runner import run
from experiments.serializers import validation_messages
from experiments.verdicts import EXIT_FAIL, EXIT_PASS, EXIT_VALIDATION, FAIL, PASS


def _list(text):
    return [part.strip() for part in text.split(',') if part.strip()]


# flag name -> add_argument options; the dest is the config field
OPTIONS = {
    'system': {'help': 'System file (.json) or builtin name; see the "systems" command.'},
    'deltas': {'help': 'δ-ladder, strictly decreasing: "2^-4..2^-8" or "0.25,0.125,1/16".'},
    'net_separation': {'help': 'Separation of the Grassmannian nets (default: δ of each rung).'},
    'ambient_dim': {'type': int, 'help': 'Ambient dimension n.'},
    'plane_dim': {'type': int, 'help': 'Plane dimension k (default 1).'},
    's': {'help': 'Threshold s for the projected dimension.'},
    'epsilon': {'help': 'ε (default 0.05).'},
    'fiber_dim': {'help': 'Fiber threshold Δ.'},
    'delta_grid': {'type': _list, 'help': 'Comma-separated Δ values to scan.'},
    'axes': {'type': lambda text: [int(axis) for axis in _list(text)], 'help': 'Coordinate axes spanning V, 0-based.'},
    'eta_mode': {'choices': ['fixed', 'derived'], 'help': 'η = ETA_FACTOR·δ or η from ε, γ and s.'},
    'eta_factor': {'help': 'Factor of the fixed η mode.'},
    'tolerance': {'help': 'Tolerance of the dimension comparisons (default 0.1).'},
    'samples': {'type': int, 'help': 'Random (x, δ₁) samples (default 100).'},
    'word_depth': {'type': int, 'help': 'Word depth of the transversality scan (default 6).'},
    'directions': {'type': int, 'help': 'Number of sampled directions (default 360).'},
    'pair_budget': {'type': int, 'help': 'Most word pairs to check.'},
    'jitter': {'type': int, 'help': 'Jittered grids per box count.'},
    'max_net_members': {'type': int, 'help': 'Member budget of each net.'},
    'probe_conjecture': {'action': 'store_true', 'default': None, 'help': 'Report the conjectured exponent.'},
    'no_selftest': {'action': 'store_true', 'help': 'Skip the synthetic-violation self-test.'},
    'profile_resolution': {'help': 'Also profile σ(e) from a cloud at this resolution.'},
}

COMMON = ('seed', 'output_dir', 'workers', 'pdf')


class ExperimentCommand(BaseCommand):
    """Flags mirror the config fields; the exit status follows the verdicts."""

    kind = None
    options = ()

    def add_arguments(self, parser):
        for name in self.options:
            parser.add_argument(f'--{name.replace("_", "-")}', dest=name, **OPTIONS[name])
        parser.add_argument('--seed', type=int, required=True, help='Seed of every random draw.')
        parser.add_argument('--output-dir', dest='output_dir', help='Directory for the CSV, SVG and PDF files.')
        parser.add_argument('--workers', type=int, help='Worker threads (default: EXPERIMENT_WORKERS).')
        parser.add_argument('--pdf', action='store_true', default=None, help='Also write a PDF summary.')

    def config_from_options(self, options):
        config = {'kind': self.kind}
        for name in (*self.options, *COMMON):
            if name == 'no_selftest':
                if options.get(name):
                    config['selftest'] = False
                continue
            if options.get(name) is not None:
                config[name] = options[name]
        return config

    def handle(self, *args, **options):
        self.execute_config(self.config_from_options(options))

    def execute_config(self, config):
        try:
            result = run(config)
        except ValidationError as exc:
            for line in validation_messages(exc.detail):
                self.stderr.write(self.style.ERROR(line))
            raise CommandError('invalid experiment configuration', returncode=EXIT_VALIDATION)

        for note in result.notes:
            self.stdout.write(note)
        for verdict in result.verdicts:
            if verdict.outcome == PASS:
                style = self.style.SUCCESS
            elif verdict.outcome == FAIL:
                style = self.style.ERROR
            else:
                style = self.style.WARNING
            self.stdout.write(style(verdict.line))
        self.stdout.write(f'{len(result.artifacts)} files written to {result.output_dir}')

        if result.exit_code == EXIT_FAIL:
            raise CommandError('at least one check failed', returncode=EXIT_FAIL)
        if result.exit_code != EXIT_PASS:
            raise CommandError('budget exceeded, results are partial', returncode=result.exit_code)
        return None
