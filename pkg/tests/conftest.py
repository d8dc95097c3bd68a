import numpy as np
import pytest

from crystalflow.grid import GridField


@pytest.fixture
def x256():
    return np.arange(256) / 256.0


def sine_field(n, amplitude=1.0, mean=0.0, k=1):
    x = np.arange(n) / n
    return GridField(mean + amplitude * np.sin(2.0 * np.pi * k * x))


def cosine_field(n, amplitude=1.0, mean=0.0, k=1):
    x = np.arange(n) / n
    return GridField(mean + amplitude * np.cos(2.0 * np.pi * k * x))
