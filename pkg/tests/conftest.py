import sys
from pathlib import Path

import pytest

import blockfade as bf

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def mi_point():
    """Session-cached Monte-Carlo MI points shared across tests.

    The interpolation grid is enabled for speed; its ln-p error budget
    (1e-6) is far below every tolerance asserted on these estimates.
    """
    cache = {}

    def get(n_t, n_r, n_b, snr, halfwidth=0.01, seed=0, workers=4,
            grid_accel=True):
        key = (n_t, n_r, n_b, snr, halfwidth, seed, workers, grid_accel)
        if key not in cache:
            config = bf.ChannelConfig(n_t, n_r, n_b, snr)
            rule = bf.StoppingRule(halfwidth=halfwidth)
            cache[key] = bf.mutual_information(
                config, rule, seed=seed, workers=workers,
                grid_accel=grid_accel)
        return cache[key]

    return get
