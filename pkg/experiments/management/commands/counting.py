from experiments.serializers import COUNTING

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Measures the constant of the small-projection counting bound on Gr(n, k)'
    kind = COUNTING
    options = ('ambient_dim', 'plane_dim', 'deltas', 'samples', 'max_net_members')
