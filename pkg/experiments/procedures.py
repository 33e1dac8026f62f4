"""One procedure per experiment kind.

Each procedure receives the validated config, the loaded system definition
(None for the counting experiment) and the running ExperimentResult, and
appends verdicts and artifacts to the result as it goes, so a budget
failure half way through still leaves the finished part on disk.
"""
import logging

import numpy as np
from django.conf import settings
from scipy.stats import linregress

from dimension.boxcount import (
    box_count_series, fit_scaling_exponent, upper_box_dimension, write_estimate_csv, write_series_csv,
)
from grassmannian.nets import build_delta_net, counting_lemma_ratio
from grassmannian.subspaces import Subspace
from ifs_core.attractor import attractor_cloud, covering_cloud, separation_constant
from ifs_core.exceptions import PreconditionError
from ifs_core.invariants import system_dimension
from sweep.conservation import evaluate_survey, survey_fibers
from sweep.energy import DERIVED, derived_eta, energy_brute_force, energy_ladder
from sweep.exceptional import exceptional_directions
from transversality.family import ProjectedFamily
from transversality.jacobian import jacobian_analytic, jacobian_fd
from transversality.profile import projected_dimension_profile
from transversality.scan import sample_directions, synthetic_violation_selftest, transversality_scan

from . import artifacts
from .charts import ChartSeries, fitted_series, loglog_chart
from .verdicts import FAIL, PASS, SCALE_LIMITED, Verdict, compare

logger = logging.getLogger(__name__)

# slack on fitted exponents against their bounds
EXPONENT_SLACK = 0.3
DIM_STDERR_LIMIT = 0.05
COUNTING_TREND_LIMIT = 0.1
MIN_FINEST_NET = 100
JACOBIAN_DRAWS = 100
JACOBIAN_STEP = 1e-4
JACOBIAN_LIMIT = 1e-6


def workers(config):
    return config.get('workers') or getattr(settings, 'EXPERIMENT_WORKERS', 1)


def _net(config, n, k, delta, index):
    separation = config['net_separation'] or delta
    return build_delta_net(
        n, k, separation, seed=config['seed'] + index, max_members=config['max_net_members'],
    )


def _fit_chart(result, name, title, label, scales, values, fit, y_label):
    series = [ChartSeries(label, tuple(scales), tuple(values))]
    if fit is not None:
        series.append(fitted_series(f'fit {fit.exponent:.3f}', scales, fit.exponent, fit.intercept))
    path = loglog_chart(result.output_dir / name, title, series, y_label)
    if path is not None:
        result.artifacts.append(path)


def _ssc_certified(system):
    try:
        return separation_constant(system) is not None
    except PreconditionError:
        return False


def dimension_estimate(config, definition, result):
    """Box-count regression against the closed-form dimension."""
    system = definition.system
    deltas = config['deltas']
    cloud = attractor_cloud(system, deltas[-1])
    series = box_count_series(cloud, deltas, jitter_count=config['jitter'], seed=config['seed'], n_jobs=workers(config))
    write_series_csv(series, result.artifact('dim_series.csv'))
    estimate = upper_box_dimension(series, ambient_dim=system.ambient_dim)
    write_estimate_csv([estimate], result.artifact('dim_estimate.csv'))

    target = system_dimension(system)
    certified = _ssc_certified(system)
    result.note(f'estimate {estimate} against closed form {target:.6f}')
    result.add_verdict(compare(
        'dim-closed-form',
        abs(estimate.value - target),
        max(2.0 * estimate.stderr, config['tolerance']),
        detail=f'estimate {estimate.value:.4f}, closed form {target:.4f}'
               + ('' if certified else ', separation not certified'),
        limited=not certified,
    ))
    result.add_verdict(compare('dim-stderr', estimate.stderr, DIM_STDERR_LIMIT))

    fit = fit_scaling_exponent(series.scales, series.counts)
    _fit_chart(result, 'dim.svg', f'Box counts of {system.name}', 'N(A, δ)', series.scales, series.counts, fit, 'log10 N')


def _counting_sample(rng, n):
    x = rng.standard_normal(n)
    return x * rng.uniform(0.25, 1.0) / np.linalg.norm(x)


def counting_bound(config, definition, result):
    """Empirical constant of the small-projection counting bound over a δ₂-ladder."""
    n, k = config['ambient_dim'], config['plane_dim']
    ladder = config['deltas']
    rng = np.random.default_rng(config['seed'])
    shares = [len(part) for part in np.array_split(np.arange(config['samples']), len(ladder))]

    rows, maxima, complete = [], [], True
    for index, (separation, share) in enumerate(zip(ladder, shares)):
        net = build_delta_net(n, k, separation, seed=config['seed'] + index, max_members=config['max_net_members'])
        complete = complete and net.complete
        smalls = [delta for delta in ladder if delta >= separation]
        best = 0.0
        for _ in range(share):
            x = _counting_sample(rng, n)
            small = float(smalls[rng.integers(len(smalls))])
            ratio = counting_lemma_ratio(x, small, separation, net)
            rows.append(artifacts.CountingRow(
                separation, small, float(np.linalg.norm(x)), ratio.lhs_count, ratio.rhs_bound, ratio.ratio,
            ))
            best = max(best, ratio.ratio)
        logger.info(f'Gr({n},{k}) δ₂={separation:g}: {share} samples, max ratio {best:.4g}')
        maxima.append(best)
    artifacts.write_counting_csv(rows, result.artifact('counting.csv'))

    keep = [(delta, value) for delta, value in zip(ladder, maxima) if value > 0]
    slope = None
    if len(keep) >= 2:
        scales, values = zip(*keep)
        slope = float(linregress(-np.log(scales), np.log(values)).slope)
    result.note(f'max ratio {max(maxima):.4g} over {len(rows)} samples')
    result.add_verdict(compare(
        'counting-trend',
        None if slope is None else abs(slope),
        COUNTING_TREND_LIMIT,
        detail='' if slope is None else f'slope {slope:+.4f}' + ('' if complete else ', net budget reached'),
        limited=not complete,
    ))

    loglog = [ChartSeries('max ratio', tuple(ladder), tuple(maxima))]
    path = loglog_chart(result.output_dir / 'counting.svg', f'Counting constant on Gr({n},{k})', loglog, 'log10 ratio')
    if path is not None:
        result.artifacts.append(path)


def energy_growth(config, definition, result):
    """Energy over a δ-ladder against its growth bound, plus the brute-force oracle."""
    system = definition.system
    n, k = system.ambient_dim, config['plane_dim']
    gamma = system_dimension(system)
    deltas = config['deltas']
    eta = None
    if config['eta_mode'] == DERIVED:
        eta = derived_eta(config['epsilon'], gamma, config['s'], n, k)
        usable = [delta for delta in deltas if eta > delta]
        if not usable:
            result.add_verdict(Verdict(
                'energy-exponent', SCALE_LIMITED, None, None, f'η = {eta:.3e} does not exceed any δ of the ladder',
            ))
            return
        if len(usable) < len(deltas):
            logger.warning(f'η = {eta:.3e}: dropped {len(deltas) - len(usable)} rungs with η <= δ')
        deltas = usable

    clouds = [covering_cloud(system, delta) for delta in deltas]
    nets = [_net(config, n, k, delta, index) for index, delta in enumerate(deltas)]
    ladder = energy_ladder(clouds, nets, gamma, eta=eta, eta_factor=config['eta_factor'], n_jobs=workers(config))
    artifacts.write_energy_csv(ladder.reports, result.artifact('energy.csv'))
    result.add_verdict(compare(
        'energy-exponent',
        ladder.exponent,
        ladder.bound_exponent + EXPONENT_SLACK,
        detail=f'k(n-k)-k+2γ = {ladder.bound_exponent:.4f}',
    ))

    mismatched = 0
    for cloud, net, report in list(zip(clouds, nets, ladder.reports))[:2]:
        oracle = energy_brute_force(cloud, net, eta=report.eta)
        mismatched += sum(a != b for a, b in zip(report.counts, oracle.counts))
    result.add_verdict(compare('energy-brute-force', mismatched, 0, detail='directions differing on the two coarsest rungs'))

    _fit_chart(
        result, 'energy.svg', f'Energy of {system.name}', 'ℰ',
        [r.delta for r in ladder.reports], [r.total for r in ladder.reports], ladder.fit, 'log10 ℰ',
    )


def exceptional_sweep(config, definition, result):
    """Flagged-direction counts over a δ-ladder against card E' bound."""
    system = definition.system
    n, k = system.ambient_dim, config['plane_dim']
    deltas = config['deltas']
    clouds = [attractor_cloud(system, delta) for delta in deltas]
    nets = [_net(config, n, k, delta, index) for index, delta in enumerate(deltas)]
    report = exceptional_directions(
        clouds, nets, config['s'], epsilon=config['epsilon'], gamma=system_dimension(system),
        probe_conjecture=config['probe_conjecture'], jitter_count=config['jitter'],
        seed=config['seed'], n_jobs=workers(config),
    )
    artifacts.write_sweep_csv(report.rungs, result.artifact('sweep.csv'))

    bound = report.bound_exponent + EXPONENT_SLACK
    finest = report.finest
    if report.vacuous:
        result.add_verdict(Verdict('exceptional-exponent', PASS, report.exponent, bound, f's={report.threshold:g} >= k: vacuous'))
    elif not any(rung.flagged_count for rung in report.rungs):
        result.add_verdict(Verdict('exceptional-exponent', PASS, None, bound, 'no flagged directions'))
    else:
        limited = finest.net_size < MIN_FINEST_NET or not finest.net_complete
        result.add_verdict(compare(
            'exceptional-exponent', report.exponent, bound,
            detail=f'{finest.flagged_count} of {finest.net_size} flagged at δ={finest.delta:g}',
            limited=limited,
        ))
    if report.conjecture_exponent is not None:
        result.note(f'conjectured exponent {report.conjecture_exponent:.4f}, fitted {report.exponent}')

    _fit_chart(
        result, 'sweep.svg', f'Flagged directions of {system.name}', 'card E′',
        [r.delta for r in report.rungs], [r.flagged_count for r in report.rungs], report.fit, 'log10 count',
    )


def _outcome_row(outcome):
    return artifacts.AlmostDcRow(
        outcome.fiber_dim, outcome.epsilon, outcome.accepted, outcome.good_cells, outcome.good_y_content,
        outcome.y_dimension, outcome.cloud_dimension, outcome.tolerance,
    )


def almost_conservation(config, definition, result):
    """Almost-dimension-conservation witness for a coordinate plane."""
    system = definition.system
    n = system.ambient_dim
    V = Subspace.coordinate(n, config['axes'])
    cloud = attractor_cloud(system, config['deltas'][-1])
    survey = survey_fibers(cloud, V)
    epsilon, tolerance = config['epsilon'], config['tolerance']

    outcomes = []
    if config['fiber_dim'] is not None:
        outcome = evaluate_survey(survey, config['fiber_dim'], epsilon, tolerance)
        outcomes.append(outcome)
        result.add_verdict(Verdict(
            'almost-dc',
            PASS if outcome.accepted else SCALE_LIMITED,
            outcome.conserved_dimension,
            outcome.cloud_dimension - tolerance,
            f'{outcome.good_cells} good fat planes',
        ))
    grid = config['delta_grid']
    if grid:
        scanned = [evaluate_survey(survey, value, epsilon, tolerance) for value in grid]
        outcomes.extend(scanned)
        passing = [o.fiber_dim for o in scanned if o.accepted]
        result.note(f'Δ passing: {", ".join(f"{value:g}" for value in passing) or "none"}')
        result.add_verdict(Verdict(
            'almost-dc-grid', PASS if passing else SCALE_LIMITED, len(passing), len(grid),
            'grid values with a witness',
        ))
    artifacts.write_almost_dc_csv([_outcome_row(o) for o in outcomes], result.artifact('almost_dc.csv'))


def jacobian_error(n, seed, draws=JACOBIAN_DRAWS, h=JACOBIAN_STEP):
    """Worst relative gap between the finite-difference and analytic Jacobians."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in sample_directions(n, draws, seed):
        z = rng.standard_normal(n)
        normal = abs(float(z @ u))
        if normal < 1e-3:
            continue
        gap = np.max(np.abs(jacobian_fd(z, u, h) - jacobian_analytic(z, u).matrix))
        worst = max(worst, float(gap) / normal)
    return worst


def transversality_check(config, definition, result):
    """Exhaustive transversality scan, its self-test and the Jacobian cross-check."""
    system = definition.system
    family = ProjectedFamily(system)
    report = transversality_scan(
        family, config['directions'], config['word_depth'], pair_budget=config['pair_budget'],
        seed=config['seed'], n_jobs=workers(config),
    )
    artifacts.write_transversality_csv(report, result.artifact('transversality.csv'))
    artifacts.write_transversality_summary_csv(report, result.artifact('transversality_summary.csv'))
    if report.violations:
        outcome = FAIL
    elif not report.exhaustive:
        outcome = SCALE_LIMITED
    else:
        outcome = PASS
    result.add_verdict(Verdict(
        'transversality', outcome, len(report.violations), 0,
        f'{report.pair_count} pairs over {report.direction_count} directions, '
        f'{report.indeterminate_count} indeterminate' + ('' if report.exhaustive else ', pair budget reached'),
    ))

    if config['selftest']:
        selftest = synthetic_violation_selftest(system, word_depth=min(3, config['word_depth']), seed=config['seed'])
        flagged = len(selftest.violations)
        result.add_verdict(Verdict(
            'transversality-selftest', PASS if flagged else FAIL, flagged, 1, 'c inflated past the true gap',
        ))

    error = jacobian_error(family.ambient_dim, config['seed'])
    result.add_verdict(compare('jacobian-fd', error, JACOBIAN_LIMIT, detail=f'h={JACOBIAN_STEP:g}'))

    if config['profile_resolution']:
        profile = projected_dimension_profile(
            system, config['directions'], config['profile_resolution'], s=config['s'],
            seed=config['seed'], n_jobs=workers(config),
        )
        artifacts.write_profile_csv(profile, result.artifact('profile.csv'))
        largest = profile.largest
        result.note(
            f'{profile.exceptional_count} of {len(profile.directions)} directions with σ(e) <= {profile.threshold:.3f}; '
            f'largest sampled σ(e) {"n/a" if largest is None else f"{largest:.3f}"}'
        )
