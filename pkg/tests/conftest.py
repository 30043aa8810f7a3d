import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lab", max_examples=40, deadline=None)
settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_ball_points(rng, count, n, max_norm=0.7):
    z = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * max_norm * rng.uniform(size=(count, 1)) ** (1.0 / (2 * n))


ACCEPTANCE_LINES: list[str] = []


def report_criterion(k: int, ok: bool, text: str) -> str:
    """Record and print the one-line verdict for an acceptance criterion."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
