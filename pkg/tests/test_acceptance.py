"""The fifteen acceptance criteria at their stated tolerances.

Each criterion runs once per session; a pass/fail line per criterion is
printed immediately and repeated in the terminal summary.
"""

import pytest

from levy_spde import checks
from levy_spde.config import RunConfig

from .conftest import ACCEPTANCE_LINES


@pytest.fixture(scope="module")
def results(request):
    capman = request.config.pluginmanager.getplugin("capturemanager")
    out = {}

    def progress(check, dt):
        line = f"{'PASS' if check.status == 'pass' else 'FAIL'}  {check.check_id}  ({dt:.1f}s)  {check.detail}"
        ACCEPTANCE_LINES.append(line)
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
        out[check.check_id] = check

    checks.run_checks(RunConfig(), progress=progress)
    return out


@pytest.mark.slow
@pytest.mark.parametrize("check_id", checks.CHECK_IDS)
def test_criterion(results, check_id):
    check = results[check_id]
    assert check.status == "pass", check.detail
