import numpy as np
import pytest

from sinest.model import make_sine_window, make_time_grid


@pytest.fixture(scope="session")
def grid256():
    return make_time_grid(256)


@pytest.fixture(scope="session")
def window256():
    return make_sine_window(256)


def tone(L, theta, phi=0.0, amp=1.0):
    """Raw (unwindowed) constant-frequency frame on the centred grid."""
    n = make_time_grid(L).n_values
    return amp * np.cos(theta * n + phi)


def windowed_tone(L, theta, phi=0.0, amp=1.0):
    return make_sine_window(L).h * tone(L, theta, phi, amp)
