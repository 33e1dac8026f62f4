from experiments.serializers import ENERGY

from ._experiment import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Fits the growth of the fat-plane energy over a δ-ladder'
    kind = ENERGY
    options = (
        'system', 'deltas', 'plane_dim', 'net_separation', 'eta_mode', 'eta_factor', 's', 'epsilon',
        'max_net_members',
    )
