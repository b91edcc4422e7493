"""The acceptance battery at full size, one test per criterion.

Each criterion contributes one PASS/FAIL line to the "acceptance criteria"
section of the pytest summary; failing checks are listed in the assertion.
"""

import pytest

from semipos.acceptance import BUDGETS, TITLES, run_criterion


@pytest.mark.parametrize("k", sorted(BUDGETS))
def test_criterion(k, acceptance_log):
    checks, seconds = run_criterion(k, "full", seed=0)
    failing = [c.line() for c in checks if not c.passed]
    ok = not failing and seconds <= BUDGETS[k]
    line = f"{'PASS' if ok else 'FAIL'}  criterion {k} ({TITLES[k]}): {seconds:.2f}s of {BUDGETS[k]}s budget"
    if failing:
        line += "; " + "; ".join(s.split("  ", 1)[1] for s in failing)
    acceptance_log.append(line)
    print(line)
    assert not failing, "\n".join(failing)
    assert seconds <= BUDGETS[k], f"took {seconds:.2f}s, budget {BUDGETS[k]}s"
