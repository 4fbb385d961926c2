import numpy as np
import pytest

from hnsf import dsp

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def synthetic_clip(seconds=1.0, seed=0):
    """Harmonic 'voiced' spans around a noise-like 'unvoiced' span."""
    r = np.random.default_rng(seed)
    n = int(seconds * dsp.SAMPLE_RATE)
    t = np.arange(n) / dsp.SAMPLE_RATE
    f0 = 140 + 20 * np.sin(2 * np.pi * 2 * t)
    phase = np.cumsum(2 * np.pi * f0 / dsp.SAMPLE_RATE)
    voiced = 0.3 * sum((0.5 / k) * np.sin(k * phase) for k in range(1, 20))
    noise = 0.05 * r.normal(size=n)
    mask = (t < 0.4 * seconds) | (t >= 0.7 * seconds)
    return np.where(mask, voiced, noise)


@pytest.fixture(scope="session")
def clip():
    return synthetic_clip()


@pytest.fixture(scope="session")
def clip_features(clip):
    return dsp.extract_features(clip)
