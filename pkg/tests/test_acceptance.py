"""One test per acceptance criterion; each prints a single pass/fail line."""

import inspect

import pytest

from engelkit.acceptance import CHECKS

SEED = 0


@pytest.mark.parametrize("number", range(1, len(CHECKS) + 1), ids=lambda k: f"criterion{k:02d}")
def test_criterion(number, capsys):
    fn = CHECKS[number - 1]
    chk = fn(seed=SEED) if "seed" in inspect.signature(fn).parameters else fn()
    with capsys.disabled():
        print("\n" + chk.line())
    assert chk.passed, chk.detail
