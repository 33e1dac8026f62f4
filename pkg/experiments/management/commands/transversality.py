from experiments.serializers import TRANSVERSALITY

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Scans the projected family of a rotation-free system for transversality violations'
    kind = TRANSVERSALITY
    options = ('system', 'word_depth', 'directions', 'pair_budget', 'no_selftest', 'profile_resolution', 's')
