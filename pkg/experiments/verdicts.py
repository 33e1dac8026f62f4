"""Acceptance verdicts and the exit status they add up to."""
from dataclasses import dataclass

PASS = 'PASS'
FAIL = 'FAIL'
SCALE_LIMITED = 'SCALE-LIMITED'

OUTCOME_CHOICES = [
    (PASS, 'Pass'),
    (FAIL, 'Fail'),
    (SCALE_LIMITED, 'Scale-limited'),
]

VERDICT_PREFIX = 'VERDICT'

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def _number(value):
    if value is None:
        return 'n/a'
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f'{value:.6g}'


@dataclass(frozen=True)
class Verdict:
    check: str
    outcome: str
    measured: object = None
    bound: object = None
    detail: str = ''

    @property
    def line(self):
        """One grep-able line: ``VERDICT PASS check: measured/bound (detail)``."""
        text = f'{VERDICT_PREFIX} {self.outcome} {self.check}: {_number(self.measured)}/{_number(self.bound)}'
        return f'{text} ({self.detail})' if self.detail else text


def compare(check, measured, bound, detail='', limited=False):
    """PASS when measured <= bound; a failed comparison is SCALE-LIMITED when ``limited``."""
    if measured is None:
        return Verdict(check, SCALE_LIMITED, measured, bound, detail or 'nothing to measure at this scale')
    if measured <= bound:
        return Verdict(check, PASS, measured, bound, detail)
    return Verdict(check, SCALE_LIMITED if limited else FAIL, measured, bound, detail)


def exit_status(verdicts, budget_exceeded=False):
    if any(v.outcome == FAIL for v in verdicts):
        return EXIT_FAIL
    if budget_exceeded:
        return EXIT_BUDGET
    return EXIT_PASS
