import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from anticonc import kernels  # noqa: E402


def _backends():
    names = ["python"]
    try:
        kernels.get_backend("cython")
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = kernels.get_backend(request.param)
    for name in ("wht_inplace", "apply_pair_inplace", "tree_sum"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def criterion(request):
    """Record ``(number, title, passed, detail)`` for the acceptance summary."""
    results = request.config.stash[_ACCEPTANCE]

    def record(number, title, passed, detail=""):
        results[number] = (title, bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
