"""The twelve acceptance criteria at their stated scale.

Each test prints one ``[PASS]``/``[FAIL]`` line; the metrics of a failing
criterion are included in the assertion message.
"""

import json

import pytest

from qfilterlab.experiments.acceptance import CRITERIA, format_line, run_criterion

_LINES = {}


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None and _LINES:
        reporter.write_line("")
        reporter.write_line("acceptance summary:")
        for n in sorted(_LINES):
            reporter.write_line(_LINES[n])


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    result = run_criterion(n)
    line = format_line(result)
    _LINES[n] = line
    with capsys.disabled():
        print(f"\n{line}")
    assert result["passed"], json.dumps(result["parts"], indent=1, default=str)
