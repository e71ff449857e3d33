import numpy as np
import pytest
from hypothesis import settings

from metricjet.sampling import SamplingConfig

settings.register_profile("metricjet", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("metricjet")


@pytest.fixture(scope="session")
def cfg() -> SamplingConfig:
    return SamplingConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Records one PASS/FAIL line per acceptance criterion and returns the verdict."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
