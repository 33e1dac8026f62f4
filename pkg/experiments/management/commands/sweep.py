from experiments.serializers import SWEEP

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Counts the directions whose projection looks at most s-dimensional'
    kind = SWEEP
    options = (
        'system', 'deltas', 'plane_dim', 'net_separation', 's', 'epsilon', 'jitter', 'max_net_members',
        'probe_conjecture',
    )
