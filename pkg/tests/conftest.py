import numpy as np
import pytest
from hypothesis import settings

from tccbench import synth
from tccbench.color import Illuminant

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def scene(spec=None, illuminant=(0.3, 0.4, 0.3), length=1, seed=0):
    """Frames of a synthetic sequence under `illuminant`."""
    spec = spec or synth.SceneSpec()
    _, frames = synth.generate_synthetic_sequence(spec, Illuminant(*illuminant), length, seed)
    return frames


@pytest.fixture(scope="session")
def make_scene():
    return scene


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
