import dataclasses

import numpy as np
import pytest

from vocodekit.audio_io import Waveform, default_config

SR = 24000


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def narrow_cfg(cfg):
    """Same rates, kernels and dilations as config_v1 but 16 channels after conv_pre."""
    return dataclasses.replace(cfg, upsample_initial_channel=16)


def tone(freq, seconds=1.0, amp=0.5, sr=SR, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return Waveform(amp * np.cos(2 * np.pi * freq * t + phase), sr)


def noise(seconds=1.0, amp=0.1, seed=0, sr=SR):
    rng = np.random.default_rng(seed)
    return Waveform(amp * rng.standard_normal(int(round(seconds * sr))), sr)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Print and keep one pass/fail line per acceptance criterion."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
