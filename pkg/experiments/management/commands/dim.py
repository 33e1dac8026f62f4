from experiments.serializers import DIM

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Estimates the box dimension of an attractor and compares it with the closed form'
    kind = DIM
    options = ('system', 'deltas', 'tolerance', 'jitter')
