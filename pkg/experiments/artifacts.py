"""CSV tables written by the experiments, each with its reader.

Files carry no timestamps, so identical configurations give identical bytes.
"""
import csv
from typing import NamedTuple

from sweep.energy import EnergyReport
from sweep.exceptional import ExceptionalRung
from transversality.scan import PairCheck

from .verdicts import Verdict

VERDICT_HEADER = ['check', 'outcome', 'measured', 'bound', 'detail']
COUNTING_HEADER = ['separation', 'small', 'norm', 'lhs_count', 'rhs_bound', 'ratio']
ENERGY_HEADER = ['delta', 'separation', 'eta', 'direction', 'count']
SWEEP_HEADER = ['delta', 'net_complete', 'direction', 'box_count', 'flagged', 'relation_count']
ALMOST_DC_HEADER = [
    'fiber_dim', 'epsilon', 'accepted', 'good_cells', 'good_y_content', 'y_dimension',
    'cloud_dimension', 'tolerance',
]
TRANSVERSALITY_SUMMARY_HEADER = [
    'system', 'separation', 'word_depth', 'tail', 'directions', 'pairs', 'exhaustive',
    'vacuous', 'violations', 'indeterminate', 'min_margin',
]
PROFILE_HEADER = ['direction', 'coordinates', 'sigma', 'exceptional']


class CountingRow(NamedTuple):
    separation: float
    small: float
    norm: float
    lhs_count: int
    rhs_bound: float
    ratio: float


class AlmostDcRow(NamedTuple):
    fiber_dim: float
    epsilon: float
    accepted: bool
    good_cells: int
    good_y_content: float
    y_dimension: float
    cloud_dimension: float
    tolerance: float


class TransversalitySummary(NamedTuple):
    system: str
    separation: float
    word_depth: int
    tail: float
    directions: int
    pairs: int
    exhaustive: bool
    vacuous: int
    violations: int
    indeterminate: int
    min_margin: float


class ProfileRow(NamedTuple):
    direction: int
    coordinates: tuple
    sigma: float
    exceptional: bool


def _real(value):
    return '' if value is None else repr(float(value))


def _optional_real(text):
    return None if text == '' else float(text)


def _flag(value):
    return 'true' if value else 'false'


def _truth(text):
    if text not in ('true', 'false'):
        raise ValueError(f'expected true or false, got {text!r}')
    return text == 'true'


def _word(word):
    return '.'.join(str(letter) for letter in word)


def _letters(text):
    return tuple(int(letter) for letter in text.split('.')) if text else ()


def _vector(values):
    return ' '.join(repr(float(x)) for x in values)


def _floats(text):
    return tuple(float(x) for x in text.split())


def write_table(path, header, rows):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def read_table(path, header):
    with open(path, newline='') as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != header:
        raise ValueError(f'{path} does not start with the header {",".join(header)}')
    return rows[1:]


def write_verdicts_csv(verdicts, path):
    def measured(value):
        if value is None:
            return ''
        if isinstance(value, bool):
            return str(value)
        return repr(float(value))

    return write_table(path, VERDICT_HEADER, [
        [v.check, v.outcome, measured(v.measured), measured(v.bound), v.detail] for v in verdicts
    ])


def read_verdicts_csv(path):
    def value(text):
        if text in ('True', 'False'):
            return text == 'True'
        return _optional_real(text)

    return [
        Verdict(check, outcome, value(measured), value(bound), detail)
        for check, outcome, measured, bound, detail in read_table(path, VERDICT_HEADER)
    ]


def write_counting_csv(rows, path):
    return write_table(path, COUNTING_HEADER, [
        [_real(r.separation), _real(r.small), _real(r.norm), r.lhs_count, _real(r.rhs_bound), _real(r.ratio)]
        for r in rows
    ])


def read_counting_csv(path):
    return [
        CountingRow(float(a), float(b), float(c), int(d), float(e), float(f))
        for a, b, c, d, e, f in read_table(path, COUNTING_HEADER)
    ]


def write_energy_csv(reports, path):
    rows = []
    for report in reports:
        for index, count in enumerate(report.counts):
            rows.append([_real(report.delta), _real(report.separation), _real(report.eta), index, count])
    return write_table(path, ENERGY_HEADER, rows)


def read_energy_csv(path):
    grouped = {}
    for delta, separation, eta, _, count in read_table(path, ENERGY_HEADER):
        key = (float(delta), float(separation), float(eta))
        grouped.setdefault(key, []).append(int(count))
    return [EnergyReport(delta, separation, eta, tuple(counts)) for (delta, separation, eta), counts in grouped.items()]


def write_sweep_csv(rungs, path):
    rows = []
    for rung in rungs:
        relations = iter(rung.relation_counts)
        for index, (count, flagged) in enumerate(zip(rung.box_counts, rung.flagged)):
            relation = next(relations, '') if flagged else ''
            rows.append([_real(rung.delta), _flag(rung.net_complete), index, count, _flag(flagged), relation])
    return write_table(path, SWEEP_HEADER, rows)


def read_sweep_csv(path):
    grouped = {}
    for delta, complete, _, count, flagged, relation in read_table(path, SWEEP_HEADER):
        rung = grouped.setdefault(float(delta), {'complete': _truth(complete), 'counts': [], 'flags': [], 'relations': []})
        rung['counts'].append(int(count))
        rung['flags'].append(_truth(flagged))
        if relation != '':
            rung['relations'].append(int(relation))
    return [
        ExceptionalRung(
            delta, len(rung['counts']), tuple(rung['counts']), tuple(rung['flags']),
            rung['complete'], tuple(rung['relations']),
        )
        for delta, rung in grouped.items()
    ]


def write_almost_dc_csv(outcomes, path):
    return write_table(path, ALMOST_DC_HEADER, [
        [
            _real(o.fiber_dim), _real(o.epsilon), _flag(o.accepted), o.good_cells, _real(o.good_y_content),
            _real(o.y_dimension), _real(o.cloud_dimension), _real(o.tolerance),
        ]
        for o in outcomes
    ])


def read_almost_dc_csv(path):
    return [
        AlmostDcRow(float(a), float(b), _truth(c), int(d), float(e), float(f), float(g), float(h))
        for a, b, c, d, e, f, g, h in read_table(path, ALMOST_DC_HEADER)
    ]


def transversality_header(n):
    return ['direction', *[f'u{i}' for i in range(n)], 'first_word', 'second_word',
            'projected_distance', 'determinant', 'margin', 'outcome']


def write_transversality_csv(report, path):
    return write_table(path, transversality_header(report.ambient_dim), [
        [
            row.direction_index, *[_real(x) for x in row.direction], _word(row.first_word), _word(row.second_word),
            _real(row.projected_distance), _real(row.determinant), _real(row.margin), row.outcome,
        ]
        for row in report.rows
    ])


def read_transversality_csv(path, n):
    rows = []
    for record in read_table(path, transversality_header(n)):
        index, direction, rest = record[0], record[1:n + 1], record[n + 1:]
        first, second, distance, determinant, margin, outcome = rest
        rows.append(PairCheck(
            int(index), tuple(float(x) for x in direction), _letters(first), _letters(second),
            float(distance), float(determinant), float(margin), outcome,
        ))
    return rows


def write_transversality_summary_csv(report, path):
    return write_table(path, TRANSVERSALITY_SUMMARY_HEADER, [[
        report.system_name, _real(report.separation), report.word_depth, _real(report.tail),
        report.direction_count, report.pair_count, _flag(report.exhaustive), report.vacuous_count,
        len(report.violations), report.indeterminate_count, _real(report.min_margin),
    ]])


def read_transversality_summary_csv(path):
    (row,) = read_table(path, TRANSVERSALITY_SUMMARY_HEADER)
    name, separation, depth, tail, directions, pairs, exhaustive, vacuous, violations, indeterminate, margin = row
    return TransversalitySummary(
        name, float(separation), int(depth), float(tail), int(directions), int(pairs), _truth(exhaustive),
        int(vacuous), int(violations), int(indeterminate), _optional_real(margin),
    )


def write_profile_csv(profile, path):
    return write_table(path, PROFILE_HEADER, [
        [index, _vector(e), '' if sigma != sigma else _real(sigma), _flag(flag)]
        for index, (e, sigma, flag) in enumerate(zip(profile.directions, profile.dimensions, profile.exceptional))
    ])


def read_profile_csv(path):
    return [
        ProfileRow(int(index), _floats(coordinates), float('nan') if sigma == '' else float(sigma), _truth(flag))
        for index, coordinates, sigma, flag in read_table(path, PROFILE_HEADER)
    ]
