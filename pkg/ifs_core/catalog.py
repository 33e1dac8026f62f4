"""Bundled example systems and system-file loading."""
import json
import logging
from pathlib import Path

from rest_framework import serializers

from .serializers import SystemSpecSerializer

logger = logging.getLogger(__name__)

BUILTIN_DIR = Path(__file__).resolve().parent / 'builtin'


def builtin_names():
    return sorted(path.stem for path in BUILTIN_DIR.glob('*.json'))


def read_system_file(path):
    """Parse and validate a JSON system file into a SystemDefinition.

    Raises rest_framework ValidationError for unreadable or invalid files.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise serializers.ValidationError({'system': f'{path}: {exc}'})
    serializer = SystemSpecSerializer(data=data, context={'path': path})
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def load_system(reference):
    """Load a system by builtin name or by file path."""
    path = Path(reference)
    if path.suffix == '.json' or path.exists():
        return read_system_file(path)
    if reference in builtin_names():
        return read_system_file(BUILTIN_DIR / f'{reference}.json')
    raise serializers.ValidationError({
        'system': f'"{reference}" is neither a system file nor one of: {", ".join(builtin_names())}'
    })


def list_builtin_systems():
    """Every bundled system, in name order."""
    definitions = [read_system_file(BUILTIN_DIR / f'{name}.json') for name in builtin_names()]
    logger.debug(f'loaded {len(definitions)} bundled systems')
    return definitions
