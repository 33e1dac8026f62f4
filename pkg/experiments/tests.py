import json
import math
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.db import DatabaseError
from django.test import SimpleTestCase, TestCase, override_settings

from .artifacts import (
    CountingRow, read_almost_dc_csv, read_counting_csv, read_energy_csv, read_sweep_csv, read_table,
    read_transversality_csv, read_transversality_summary_csv, read_verdicts_csv, write_counting_csv,
    write_verdicts_csv, VERDICT_HEADER,
)
from .models import ExperimentRun, VerdictRecord
from .runner import PROCEDURES, run
from .serializers import COUNTING, ExperimentConfigSerializer, parse_ladder, parse_real, validation_messages
from .verdicts import (
    EXIT_BUDGET, EXIT_FAIL, EXIT_PASS, EXIT_VALIDATION, FAIL, PASS, SCALE_LIMITED, Verdict, compare, exit_status,
)

LOG2_LOG3 = math.log(2) / math.log(3)


def counting_config(output_dir, **overrides):
    config = {
        'kind': 'counting', 'ambient_dim': 2, 'plane_dim': 1, 'deltas': '2^-3..2^-5',
        'samples': 30, 'seed': 7, 'output_dir': str(output_dir),
    }
    config.update(overrides)
    return config


class VerdictTests(SimpleTestCase):
    def test_compare(self):
        self.assertEqual(compare('x', 0.5, 1.0).outcome, PASS)
        self.assertEqual(compare('x', 1.5, 1.0).outcome, FAIL)
        self.assertEqual(compare('x', 1.5, 1.0, limited=True).outcome, SCALE_LIMITED)
        self.assertEqual(compare('x', None, 1.0).outcome, SCALE_LIMITED)

    def test_line_has_fixed_prefix(self):
        verdict = Verdict('dim-closed-form', PASS, 0.0012, 0.1, 'estimate 0.6321')
        self.assertEqual(verdict.line, 'VERDICT PASS dim-closed-form: 0.0012/0.1 (estimate 0.6321)')
        self.assertEqual(Verdict('budget', SCALE_LIMITED).line, 'VERDICT SCALE-LIMITED budget: n/a/n/a')

    def test_exit_status(self):
        passing = Verdict('a', PASS)
        limited = Verdict('b', SCALE_LIMITED)
        failing = Verdict('c', FAIL)
        self.assertEqual(exit_status([passing, limited]), EXIT_PASS)
        self.assertEqual(exit_status([passing, failing]), EXIT_FAIL)
        self.assertEqual(exit_status([limited], budget_exceeded=True), EXIT_BUDGET)
        self.assertEqual(exit_status([failing], budget_exceeded=True), EXIT_FAIL)


class ConfigTests(SimpleTestCase):
    def test_ladder_syntax(self):
        self.assertEqual(parse_ladder('2^-4..2^-8'), [2.0 ** -j for j in range(4, 9)])
        self.assertEqual(parse_ladder('0.5, 1/4, 2^-3'), [0.5, 0.25, 0.125])
        self.assertAlmostEqual(parse_real('3^-2'), 1 / 9)
        with self.assertRaises(ValueError):
            parse_ladder('2^-1..3^-4')

    def test_valid_config_gets_defaults(self):
        serializer = ExperimentConfigSerializer(data={
            'system': 'four_corner_cantor', 'kind': 'sweep', 'deltas': '2^-5..2^-9', 's': 0.6, 'seed': 0,
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.validated_data
        self.assertEqual(len(config['deltas']), 5)
        self.assertEqual(config['plane_dim'], 1)
        self.assertEqual(config['epsilon'], 0.05)
        self.assertEqual(config['eta_mode'], 'fixed')

    def test_underscore_kind_alias(self):
        serializer = ExperimentConfigSerializer(data={
            'system': 'product_cantor_thirds', 'kind': 'almost_dc', 'deltas': [0.01], 'fiber_dim': '0.63', 'seed': 1,
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['kind'], 'almost-dc')

    def test_rejections(self):
        cases = [
            ({'kind': 'dim', 'system': 'middle_thirds_cantor', 'deltas': [0.1, 0.2], 'seed': 0}, 'deltas'),
            ({'kind': 'dim', 'system': 'middle_thirds_cantor', 'deltas': [0.5, 0.25]}, 'seed'),
            ({'kind': 'dim', 'system': 'middle_thirds_cantor', 'deltas': [1.5], 'seed': 0}, 'deltas'),
            ({'kind': 'dim', 'system': 'middle_thirds_cantor', 'deltas': [0.5], 'epsilon': 0, 'seed': 0}, 'epsilon'),
            ({'kind': 'counting', 'deltas': [0.5, 0.25], 'seed': 0}, 'ambient_dim'),
            ({'kind': 'counting', 'ambient_dim': 3, 'plane_dim': 3, 'deltas': [0.5], 'seed': 0}, 'plane_dim'),
            ({'kind': 'sweep', 'system': 'four_corner_cantor', 'deltas': [0.5], 'seed': 0}, 's'),
            ({'kind': 'energy', 'system': 'four_corner_cantor', 'deltas': [0.5], 'eta_factor': 1, 'seed': 0}, 'eta_factor'),
            ({'kind': 'almost-dc', 'system': 'product_cantor_thirds', 'deltas': [0.5], 'seed': 0}, 'fiber_dim'),
            ({'kind': 'plot', 'seed': 0}, 'kind'),
        ]
        for data, field in cases:
            serializer = ExperimentConfigSerializer(data=data)
            self.assertFalse(serializer.is_valid(), data)
            self.assertIn(field, serializer.errors, data)

    def test_validation_messages(self):
        lines = validation_messages({'deltas': ['must decrease'], 'maps': [{'ratio': ['too big']}]})
        self.assertEqual(lines, ['deltas: must decrease', 'maps[0].ratio: too big'])


class ArtifactTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_verdicts_round_trip(self):
        verdicts = [
            Verdict('dim-closed-form', PASS, 0.001, 0.1, 'estimate 0.6300'),
            Verdict('budget', SCALE_LIMITED, None, 300000, 'too many words, feasible 4'),
        ]
        path = write_verdicts_csv(verdicts, self.path / 'verdicts.csv')
        self.assertEqual(read_verdicts_csv(path), [
            Verdict('dim-closed-form', PASS, 0.001, 0.1, 'estimate 0.6300'),
            Verdict('budget', SCALE_LIMITED, None, 300000.0, 'too many words, feasible 4'),
        ])

    def test_counting_round_trip(self):
        rows = [CountingRow(0.125, 0.25, 0.5, 3, 4.0, 0.75), CountingRow(0.0625, 0.0625, 0.9, 0, 1.1, 0.0)]
        path = write_counting_csv(rows, self.path / 'counting.csv')
        self.assertEqual(read_counting_csv(path), rows)

    def test_header_is_checked(self):
        path = write_counting_csv([], self.path / 'counting.csv')
        with self.assertRaises(ValueError):
            read_table(path, VERDICT_HEADER)


class ExperimentCommandTests(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def command(self, name, **options):
        out, err = StringIO(), StringIO()
        call_command(name, stdout=out, stderr=err, **options)
        return out.getvalue()

    def failing_command(self, name, **options):
        err = StringIO()
        with self.assertRaises(CommandError) as caught:
            call_command(name, stdout=StringIO(), stderr=err, **options)
        return caught.exception.returncode, err.getvalue()

    def test_dimension_of_the_middle_thirds_set(self):
        output = self.command(
            'dim', system='middle_thirds_cantor', deltas='3^-1..3^-7', seed=0, output_dir=str(self.path),
        )
        self.assertIn('VERDICT PASS dim-closed-form', output)
        self.assertIn('VERDICT PASS dim-stderr', output)
        for name in ('dim_series.csv', 'dim_estimate.csv', 'verdicts.csv', 'dim.svg'):
            self.assertTrue((self.path / name).exists(), name)

        run = ExperimentRun.objects.get()
        self.assertEqual(run.kind, 'dim')
        self.assertEqual(run.system_name, 'middle_thirds_cantor')
        self.assertTrue(run.passed)
        self.assertEqual(run.verdicts.count(), 2)

    def test_counting_is_reproducible(self):
        first, second = self.path / 'first', self.path / 'second'
        for directory in (first, second):
            self.command('counting', ambient_dim=2, plane_dim=1, deltas='2^-3..2^-5', samples=30, seed=7,
                         output_dir=str(directory))
        for name in ('counting.csv', 'verdicts.csv'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

        rows = read_counting_csv(first / 'counting.csv')
        self.assertEqual(len(rows), 30)
        for row in rows:
            self.assertGreaterEqual(row.small, row.separation)
            self.assertTrue(0.25 <= row.norm <= 1.0)
        self.assertEqual(read_verdicts_csv(first / 'verdicts.csv')[0].check, 'counting-trend')

    def test_malformed_system_file(self):
        path = self.path / 'skewed.json'
        path.write_text(json.dumps({
            'name': 'skewed',
            'ambient_dim': 2,
            'maps': [
                {'ratio': '1/2', 'orthogonal': [1, 0.5, 0, 1], 'translation': [0, 0]},
                {'ratio': '1/2', 'orthogonal': [1, 0, 0, 1], 'translation': [0.5, 0]},
            ],
        }))
        returncode, _ = self.failing_command('dim', system=str(path), deltas='2^-1..2^-5', seed=0,
                                             output_dir=str(self.path))
        self.assertEqual(returncode, EXIT_VALIDATION)
        self.assertFalse(ExperimentRun.objects.exists())

    def test_missing_ladder_lists_the_field(self):
        returncode, errors = self.failing_command('dim', system='middle_thirds_cantor', seed=0,
                                                  output_dir=str(self.path))
        self.assertEqual(returncode, EXIT_VALIDATION)
        self.assertIn('deltas:', errors)

    def test_transversality_of_the_four_corner_family(self):
        output = self.command(
            'transversality', system='four_corner_cantor', word_depth=4, directions=36, seed=0,
            output_dir=str(self.path),
        )
        self.assertIn('VERDICT PASS transversality:', output)
        self.assertIn('VERDICT PASS transversality-selftest', output)
        self.assertIn('VERDICT PASS jacobian-fd', output)
        summary = read_transversality_summary_csv(self.path / 'transversality_summary.csv')
        self.assertEqual(summary.violations, 0)
        self.assertTrue(summary.exhaustive)
        rows = read_transversality_csv(self.path / 'transversality.csv', 2)
        self.assertFalse(any(row.outcome == 'flag' for row in rows))

    def test_rotations_are_rejected(self):
        returncode, errors = self.failing_command(
            'transversality', system='pinwheel_quarter_turn', seed=0, output_dir=str(self.path),
        )
        self.assertEqual(returncode, EXIT_VALIDATION)
        self.assertIn('non_field_errors:', errors)

    def test_word_budget_gives_partial_results(self):
        returncode, _ = self.failing_command(
            'transversality', system='four_corner_cantor', word_depth=12, directions=4, seed=0,
            output_dir=str(self.path),
        )
        self.assertEqual(returncode, EXIT_BUDGET)
        (verdict,) = read_verdicts_csv(self.path / 'verdicts.csv')
        self.assertEqual((verdict.check, verdict.outcome), ('budget', SCALE_LIMITED))
        self.assertEqual(ExperimentRun.objects.get().exit_code, EXIT_BUDGET)

    def test_almost_dc_from_a_config_file(self):
        config = self.path / 'almost_dc.json'
        config.write_text(json.dumps({
            'system': 'product_cantor_thirds',
            'kind': 'almost_dc',
            'deltas': [math.sqrt(2) * 3.0 ** -6],
            'fiber_dim': LOG2_LOG3,
            'delta_grid': [0.0, 0.63, 1.0],
            'epsilon': 0.05,
            'seed': 0,
            'output_dir': str(self.path),
        }))
        output = self.command('run', config=str(config))
        self.assertIn('VERDICT PASS almost-dc:', output)
        self.assertIn('VERDICT PASS almost-dc-grid', output)
        rows = read_almost_dc_csv(self.path / 'almost_dc.csv')
        self.assertEqual(len(rows), 4)
        self.assertTrue(rows[0].accepted)
        self.assertFalse(rows[-1].accepted)

    def test_unreadable_config_file(self):
        returncode, errors = self.failing_command('run', config=str(self.path / 'missing.json'))
        self.assertEqual(returncode, EXIT_VALIDATION)
        self.assertIn('config:', errors)

    def test_derived_eta_below_every_scale(self):
        output = self.command(
            'energy', system='four_corner_cantor', deltas='2^-3..2^-5', eta_mode='derived', s='0.6', seed=0,
            output_dir=str(self.path),
        )
        self.assertIn('VERDICT SCALE-LIMITED energy-exponent', output)

    def test_energy_matches_the_oracle(self):
        output = self.command(
            'energy', system='four_corner_cantor', deltas='2^-3..2^-5', seed=0, output_dir=str(self.path),
        )
        self.assertIn('VERDICT PASS energy-brute-force', output)
        reports = read_energy_csv(self.path / 'energy.csv')
        self.assertEqual([report.delta for report in reports], [2.0 ** -3, 2.0 ** -4, 2.0 ** -5])
        self.assertTrue(all(report.eta == 4 * report.delta for report in reports))

    def test_sweep_writes_every_rung(self):
        output = self.command(
            'sweep', system='four_corner_cantor', deltas='2^-4..2^-6', s='0.6', seed=0, output_dir=str(self.path),
        )
        self.assertIn('exceptional-exponent', output)
        rungs = read_sweep_csv(self.path / 'sweep.csv')
        self.assertEqual([rung.delta for rung in rungs], [2.0 ** -4, 2.0 ** -5, 2.0 ** -6])
        for rung in rungs:
            self.assertLessEqual(rung.flagged_count, rung.net_size)

    def test_vacuous_threshold_passes(self):
        output = self.command(
            'sweep', system='sierpinski_triangle', deltas='2^-3..2^-4', s='1.5', seed=0, output_dir=str(self.path),
        )
        self.assertIn('VERDICT PASS exceptional-exponent', output)
        self.assertIn('vacuous', output)

    def test_threshold_above_cloud_dimension_is_rejected(self):
        returncode, errors = self.failing_command(
            'sweep', system='four_corner_cantor', deltas='2^-3..2^-4', s='1.5', seed=0, output_dir=str(self.path),
        )
        self.assertEqual(returncode, EXIT_VALIDATION)
        self.assertIn('cloud dimension', errors)

    def test_failed_check_exits_with_one(self):
        def failing(config, definition, result):
            result.add_verdict(Verdict('counting-trend', FAIL, 0.4, 0.1))

        with mock.patch.dict(PROCEDURES, {COUNTING: failing}):
            returncode, _ = self.failing_command(
                'counting', ambient_dim=2, deltas='2^-3..2^-4', seed=0, output_dir=str(self.path),
            )
        self.assertEqual(returncode, EXIT_FAIL)
        self.assertEqual(VerdictRecord.objects.get().outcome, FAIL)

    def test_pdf_summary(self):
        self.command('dim', system='middle_thirds_cantor', deltas='3^-1..3^-6', seed=0, pdf=True,
                     output_dir=str(self.path))
        self.assertTrue((self.path / 'report.pdf').read_bytes().startswith(b'%PDF'))

    def test_systems_catalog(self):
        output = self.command('systems')
        self.assertIn('middle_thirds_cantor', output)
        self.assertIn('pinwheel_quarter_turn', output)
        self.assertGreaterEqual(sum(' R^' in line for line in output.splitlines()), 8)


class RunRecordingTests(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_database_failure_does_not_change_the_outcome(self):
        with mock.patch.object(ExperimentRun.objects, 'create', side_effect=DatabaseError('read-only')):
            result = run(counting_config(self.path))
        self.assertTrue((self.path / 'counting.csv').exists())
        self.assertFalse(ExperimentRun.objects.exists())
        self.assertIn(result.exit_code, (EXIT_PASS, EXIT_FAIL))

    @override_settings(RECORD_EXPERIMENT_RUNS=False)
    def test_recording_can_be_disabled(self):
        run(counting_config(self.path))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_default_output_directory(self):
        with override_settings(EXPERIMENT_OUTPUT_DIR=self.path):
            result = run(counting_config('', samples=5))
        self.assertEqual(result.output_dir, self.path / 'counting')
        self.assertTrue((self.path / 'counting' / 'verdicts.csv').exists())
