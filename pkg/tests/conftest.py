import numpy as np
import pytest

from mmwave_esprit.config import SystemConfig


@pytest.fixture
def cfg():
    return SystemConfig()


@pytest.fixture
def small_cfg():
    # 4-antenna arrays, 2 RF chains, one stream per block
    return SystemConfig(n_bs=4, n_ms=4, n_rf_bs=2, n_rf_ms=2, n_s=1, n_b_t=4, n_b_r=4,
                        m1=2, m2=2, n_paths=1, omp_n_b_t=None, omp_n_b_r=None)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one ``criterion: PASS/FAIL`` line, echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
