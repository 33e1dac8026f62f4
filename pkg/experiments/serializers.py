import math
import re

from rest_framework import serializers

from ifs_core.serializers import RealField
from sweep.energy import DERIVED, ETA_MODE_CHOICES, FIXED

from .models import ExperimentRun

DIM = 'dim'
SWEEP = 'sweep'
ENERGY = 'energy'
COUNTING = 'counting'
ALMOST_DC = 'almost-dc'
TRANSVERSALITY = 'transversality'

POWER = re.compile(r'^\s*([0-9.]+)\s*\^\s*(-?[0-9]+)\s*$')


def parse_real(token):
    """``2^-5``, ``1/3`` or a decimal."""
    match = POWER.match(token)
    if match:
        return float(match.group(1)) ** int(match.group(2))
    return RealField().to_internal_value(token.strip())


def parse_ladder(text):
    """Comma-separated reals; ``b^i..b^j`` expands to every power in between."""
    values = []
    for part in text.split(','):
        if '..' not in part:
            values.append(parse_real(part))
            continue
        first, last = (POWER.match(side) for side in part.split('..', 1))
        if not first or not last or float(first.group(1)) != float(last.group(1)):
            raise ValueError(f'"{part.strip()}" is not a range of powers of one base')
        base = float(first.group(1))
        start, stop = int(first.group(2)), int(last.group(2))
        step = 1 if stop >= start else -1
        values.extend(base ** e for e in range(start, stop + step, step))
    return values


class DeltaLadderField(serializers.Field):
    """A δ-ladder as a JSON list of reals or a string such as ``"2^-4..2^-8"``."""

    default_error_messages = {
        'invalid': 'Expected a list of reals or a string such as "2^-4..2^-8".',
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            try:
                return parse_ladder(data)
            except (ValueError, serializers.ValidationError):
                self.fail('invalid')
        if not isinstance(data, (list, tuple)):
            self.fail('invalid')
        child = RealField()
        return [parse_real(item) if isinstance(item, str) else child.to_internal_value(item) for item in data]

    def to_representation(self, value):
        return [float(delta) for delta in value]


class ExperimentConfigSerializer(serializers.Serializer):
    """Validated ExperimentConfig; ``validated_data`` is what the runner consumes."""
    system = serializers.CharField(required=False, allow_blank=True, default='')
    kind = serializers.ChoiceField(choices=ExperimentRun.KIND_CHOICES)
    deltas = DeltaLadderField(required=False, default=list)
    net_separation = RealField(required=False, allow_null=True, default=None)
    ambient_dim = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    plane_dim = serializers.IntegerField(min_value=1, default=1)
    s = RealField(required=False, allow_null=True, default=None)
    epsilon = RealField(default=0.05)
    fiber_dim = RealField(required=False, allow_null=True, default=None)
    delta_grid = serializers.ListField(child=RealField(), required=False, default=list)
    axes = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, default=[0])
    eta_mode = serializers.ChoiceField(choices=ETA_MODE_CHOICES, default=FIXED)
    eta_factor = RealField(required=False, allow_null=True, default=None)
    seed = serializers.IntegerField(min_value=0)
    output_dir = serializers.CharField(required=False, allow_blank=True, default='')
    tolerance = RealField(default=0.1)
    samples = serializers.IntegerField(min_value=1, default=100)
    word_depth = serializers.IntegerField(min_value=1, default=6)
    directions = serializers.IntegerField(min_value=1, default=360)
    pair_budget = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    jitter = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    max_net_members = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    workers = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    probe_conjecture = serializers.BooleanField(default=False)
    selftest = serializers.BooleanField(default=True)
    profile_resolution = RealField(required=False, allow_null=True, default=None)
    pdf = serializers.BooleanField(default=False)

    def to_internal_value(self, data):
        if hasattr(data, 'get') and data.get('kind') == 'almost_dc':
            data = dict(data)
            data['kind'] = ALMOST_DC
        return super().to_internal_value(data)

    def validate_deltas(self, value):
        if any(not 0 < delta <= 1 for delta in value):
            raise serializers.ValidationError('Every δ must lie in (0, 1].')
        if any(a <= b for a, b in zip(value, value[1:])):
            raise serializers.ValidationError('The δ-ladder must be strictly decreasing.')
        return value

    def validate_epsilon(self, value):
        if not value > 0:
            raise serializers.ValidationError('ε must be positive.')
        return value

    def validate_tolerance(self, value):
        if not value > 0:
            raise serializers.ValidationError('Tolerance must be positive.')
        return value

    def validate_net_separation(self, value):
        if value is not None and not 0 < value <= 1:
            raise serializers.ValidationError('Net separation must lie in (0, 1].')
        return value

    def validate_eta_factor(self, value):
        if value is not None and not value > 1:
            raise serializers.ValidationError('η must exceed δ, so the factor must be greater than 1.')
        return value

    def validate_s(self, value):
        if value is not None and value < 0:
            raise serializers.ValidationError('The threshold s must be nonnegative.')
        return value

    def validate_fiber_dim(self, value):
        if value is not None and value < 0:
            raise serializers.ValidationError('Δ must be nonnegative.')
        return value

    def validate_profile_resolution(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError('Resolution must be positive.')
        return value

    def validate(self, attrs):
        kind = attrs['kind']
        errors = {}
        if kind != COUNTING and not attrs['system']:
            errors['system'] = 'This experiment needs a system file or a builtin name.'
        if kind != TRANSVERSALITY and not attrs['deltas']:
            errors['deltas'] = 'This experiment needs a δ-ladder.'
        if kind == COUNTING:
            n = attrs['ambient_dim']
            if n is None:
                errors['ambient_dim'] = 'The counting experiment needs n.'
            elif attrs['plane_dim'] >= n:
                errors['plane_dim'] = f'k must be smaller than n = {n}.'
        if kind == SWEEP and attrs['s'] is None:
            errors['s'] = 'The sweep needs a threshold s.'
        if kind == ENERGY and attrs['eta_mode'] == DERIVED and attrs['s'] is None:
            errors['s'] = 'The derived η needs a threshold s.'
        if kind == ALMOST_DC and attrs['fiber_dim'] is None and not attrs['delta_grid']:
            errors['fiber_dim'] = 'Give Δ, a Δ-grid, or both.'
        if any(not math.isfinite(value) or value < 0 for value in attrs['delta_grid']):
            errors['delta_grid'] = 'Every Δ must be a nonnegative real.'
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


def validation_messages(detail, prefix=''):
    """Flatten DRF error details into ``field: message`` lines."""
    if isinstance(detail, dict):
        lines = []
        for field, value in detail.items():
            name = f'{prefix}.{field}' if prefix else str(field)
            lines.extend(validation_messages(value, name))
        return lines
    if isinstance(detail, (list, tuple)):
        lines = []
        for index, value in enumerate(detail):
            if isinstance(value, (dict, list, tuple)):
                lines.extend(validation_messages(value, f'{prefix}[{index}]' if prefix else str(index)))
            else:
                lines.append(f'{prefix}: {value}' if prefix else str(value))
        return lines
    return [f'{prefix}: {detail}' if prefix else str(detail)]
