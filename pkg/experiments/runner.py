"""Validate an experiment config, run it and collect its verdicts."""
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings
from django.db import DatabaseError, transaction
from rest_framework import serializers

from ifs_core.catalog import load_system
from ifs_core.exceptions import (
    BudgetExceededError, ConsistencyError, DimensionMismatchError, PreconditionError, UnsupportedSystemError,
)

from . import procedures
from .artifacts import write_verdicts_csv
from .models import ExperimentRun, VerdictRecord
from .reports import write_pdf_report
from .serializers import (
    ALMOST_DC, COUNTING, DIM, ENERGY, SWEEP, TRANSVERSALITY, ExperimentConfigSerializer,
)
from .verdicts import FAIL, SCALE_LIMITED, Verdict, exit_status

logger = logging.getLogger(__name__)

PROCEDURES = {
    DIM: procedures.dimension_estimate,
    COUNTING: procedures.counting_bound,
    ENERGY: procedures.energy_growth,
    SWEEP: procedures.exceptional_sweep,
    ALMOST_DC: procedures.almost_conservation,
    TRANSVERSALITY: procedures.transversality_check,
}

PLANE_KINDS = (ENERGY, SWEEP)


@dataclass
class ExperimentResult:
    kind: str
    config: dict
    output_dir: Path
    system_name: str = ''
    verdicts: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    budget_exceeded: bool = False
    exit_code: int = 0

    def artifact(self, name):
        path = self.output_dir / name
        self.artifacts.append(path)
        return path

    def add_verdict(self, verdict):
        logger.info(verdict.line)
        self.verdicts.append(verdict)

    def note(self, text):
        self.notes.append(text)


def validate_config(data):
    """Validated config and its system definition; raises DRF ValidationError."""
    serializer = ExperimentConfigSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    config = dict(serializer.validated_data)
    definition = load_system(config['system']) if config['system'] else None
    if definition is None:
        return config, None

    n = definition.system.ambient_dim
    if config['kind'] in PLANE_KINDS and config['plane_dim'] >= n:
        raise serializers.ValidationError({'plane_dim': f'k must be smaller than n = {n}.'})
    if config['kind'] == ALMOST_DC:
        axes = config['axes']
        if len(set(axes)) != len(axes) or any(axis >= n for axis in axes):
            raise serializers.ValidationError({'axes': f'Axes must be distinct indices below n = {n}.'})
        if len(axes) >= n:
            raise serializers.ValidationError({'axes': f'V must be a proper subspace of R^{n}.'})
    return config, definition


def output_directory(config):
    if config['output_dir']:
        return Path(config['output_dir'])
    return Path(getattr(settings, 'EXPERIMENT_OUTPUT_DIR', 'artifacts')) / config['kind']


def run(data):
    """Run one experiment and return its ExperimentResult.

    Raises DRF ValidationError for an invalid config, including a system the
    experiment cannot be applied to. A budget overrun ends the run early with
    a SCALE-LIMITED verdict and whatever was written so far.
    """
    config, definition = validate_config(data)
    result = ExperimentResult(
        kind=config['kind'],
        config=config,
        output_dir=output_directory(config),
        system_name=definition.name if definition else '',
    )
    result.output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f'{result.kind} on {result.system_name or "no system"} (seed {config["seed"]}) into {result.output_dir}')

    try:
        PROCEDURES[result.kind](config, definition, result)
    except BudgetExceededError as exc:
        logger.warning(f'{result.kind}: {exc}')
        result.budget_exceeded = True
        result.add_verdict(Verdict('budget', SCALE_LIMITED, exc.feasible, exc.budget, str(exc)))
    except ConsistencyError as exc:
        logger.error(f'{result.kind}: {exc}', exc_info=True)
        result.add_verdict(Verdict('consistency', FAIL, None, None, str(exc)))
    except (PreconditionError, UnsupportedSystemError, DimensionMismatchError) as exc:
        raise serializers.ValidationError({'non_field_errors': [str(exc)]})

    write_verdicts_csv(result.verdicts, result.artifact('verdicts.csv'))
    if config['pdf']:
        write_pdf_report(result, result.artifact('report.pdf'))
    result.exit_code = exit_status(result.verdicts, result.budget_exceeded)
    if getattr(settings, 'RECORD_EXPERIMENT_RUNS', True):
        record_run(result)
    return result


def record_run(result):
    """Store the run and its verdicts; a database failure is only logged."""
    try:
        with transaction.atomic():
            run = ExperimentRun.objects.create(
                kind=result.kind,
                system_name=result.system_name,
                seed=result.config['seed'],
                config=result.config,
                exit_code=result.exit_code,
                output_dir=str(result.output_dir),
            )
            VerdictRecord.objects.bulk_create([
                VerdictRecord(
                    run=run,
                    check_name=v.check,
                    outcome=v.outcome,
                    measured=None if v.measured is None else float(v.measured),
                    bound=None if v.bound is None else float(v.bound),
                    detail=v.detail,
                )
                for v in result.verdicts
            ])
    except DatabaseError as exc:
        logger.warning(f'run not recorded: {exc}')
        return None
    return run
