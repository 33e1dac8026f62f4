import math
from fractions import Fraction

import numpy as np
from rest_framework import serializers

from .exceptions import FractalLabError
from .maps import (
    GRAPH_DIRECTED, SELF_SIMILAR, SYSTEM_KIND_CHOICES,
    Edge, GraphDirectedIFS, SelfSimilarIFS, Similarity, SystemDefinition, is_orthogonal,
)


class RealField(serializers.Field):
    """A real given as a JSON number or as an exact string such as "2/3"."""

    default_error_messages = {
        'invalid': 'A number or a "p/q" string is required.',
        'not_finite': 'Value must be finite.',
    }

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid')
        try:
            value = float(Fraction(data)) if isinstance(data, str) else float(data)
        except (TypeError, ValueError, ZeroDivisionError):
            self.fail('invalid')
        if not math.isfinite(value):
            self.fail('not_finite')
        return value

    def to_representation(self, value):
        return float(value)


class SimilaritySerializer(serializers.Serializer):
    """One map g(x) = ratio * T(x) + translation, T given row-major."""
    ratio = RealField()
    orthogonal = serializers.ListField(child=RealField(), allow_empty=False)
    translation = serializers.ListField(child=RealField(), allow_empty=False)

    def validate_ratio(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError('Ratio must lie strictly between 0 and 1.')
        return value

    def validate(self, attrs):
        size = len(attrs['translation'])
        if len(attrs['orthogonal']) != size * size:
            raise serializers.ValidationError({
                'orthogonal': f'Expected {size * size} row-major entries for a {size}x{size} matrix.'
            })
        matrix = np.array(attrs['orthogonal']).reshape(size, size)
        if not is_orthogonal(matrix):
            raise serializers.ValidationError({'orthogonal': 'Matrix is not orthogonal.'})
        return attrs

    def build(self, attrs):
        return Similarity(attrs['ratio'], attrs['orthogonal'], attrs['translation'])


class EdgeSerializer(SimilaritySerializer):
    source = serializers.IntegerField(min_value=1)
    target = serializers.IntegerField(min_value=1)


class SystemSpecSerializer(serializers.Serializer):
    """Validates a system file and builds the system on ``save()``."""
    name = serializers.SlugField(max_length=100)
    description = serializers.CharField(required=False, allow_blank=True, default='')
    kind = serializers.ChoiceField(choices=SYSTEM_KIND_CHOICES, default=SELF_SIMILAR)
    ambient_dim = serializers.IntegerField(min_value=1)
    maps = SimilaritySerializer(many=True, required=False)
    vertices = serializers.IntegerField(min_value=1, required=False)
    edges = EdgeSerializer(many=True, required=False)
    similarity_dimension = RealField(required=False, allow_null=True, default=None)
    ssc = serializers.BooleanField(default=False)

    def validate(self, attrs):
        kind = attrs['kind']
        if kind == SELF_SIMILAR:
            if attrs.get('edges'):
                raise serializers.ValidationError({'edges': 'Only graph-directed systems have edges.'})
            if len(attrs.get('maps') or []) < 2:
                raise serializers.ValidationError({'maps': 'At least 2 maps are required.'})
            entries, field = attrs['maps'], 'maps'
        else:
            if attrs.get('maps'):
                raise serializers.ValidationError({'maps': 'Graph-directed systems list edges, not maps.'})
            if not attrs.get('edges'):
                raise serializers.ValidationError({'edges': 'At least one edge is required.'})
            if 'vertices' not in attrs:
                raise serializers.ValidationError({'vertices': 'This field is required.'})
            entries, field = attrs['edges'], 'edges'

        for index, entry in enumerate(entries):
            if len(entry['translation']) != attrs['ambient_dim']:
                raise serializers.ValidationError({
                    field: f'Entry {index} has a translation of length {len(entry["translation"])}, '
                           f'expected {attrs["ambient_dim"]}.'
                })

        try:
            attrs['system'] = self._build_system(attrs)
        except FractalLabError as exc:
            raise serializers.ValidationError({field: str(exc)})
        return attrs

    def _build_system(self, attrs):
        if attrs['kind'] == SELF_SIMILAR:
            maps = [SimilaritySerializer().build(entry) for entry in attrs['maps']]
            return SelfSimilarIFS(maps, name=attrs['name'])
        edges = [
            Edge(entry['source'], entry['target'], SimilaritySerializer().build(entry))
            for entry in attrs['edges']
        ]
        return GraphDirectedIFS(attrs['vertices'], edges, name=attrs['name'])

    def create(self, validated_data):
        return SystemDefinition(
            name=validated_data['name'],
            system=validated_data['system'],
            description=validated_data['description'],
            stated_dimension=validated_data['similarity_dimension'],
            ssc_claimed=validated_data['ssc'],
            path=self.context.get('path'),
        )


def similarity_to_dict(similarity):
    return {
        'ratio': similarity.ratio,
        'orthogonal': similarity.orthogonal_part.ravel().tolist(),
        'translation': similarity.translation.tolist(),
    }


def system_to_dict(definition):
    """Inverse of SystemSpecSerializer: a JSON-ready system document."""
    system = definition.system
    data = {
        'name': definition.name,
        'description': definition.description,
        'kind': system.kind,
        'ambient_dim': system.ambient_dim,
        'similarity_dimension': definition.stated_dimension,
        'ssc': definition.ssc_claimed,
    }
    if system.kind == GRAPH_DIRECTED:
        data['vertices'] = system.vertex_count
        data['edges'] = [
            {'source': edge.source, 'target': edge.target, **similarity_to_dict(edge.similarity)}
            for edge in system.edges
        ]
    else:
        data['maps'] = [similarity_to_dict(g) for g in system.maps]
    return data
