from experiments.serializers import ALMOST_DC

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Looks for an almost-dimension-conservation witness of a coordinate projection'
    kind = ALMOST_DC
    options = ('system', 'deltas', 'axes', 'fiber_dim', 'delta_grid', 'epsilon', 'tolerance')
