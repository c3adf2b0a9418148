import numpy as np
import pytest

from anisoflow.grid import Field, Grid


@pytest.fixture(scope="session")
def grid16():
    return Grid((16, 16, 16), (2 * np.pi, 2 * np.pi, 2 * np.pi))


@pytest.fixture(scope="session")
def grid32():
    return Grid((32, 32, 32), (2 * np.pi, 2 * np.pi, 2 * np.pi))


def random_field(grid, seed, ncomp=1):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((ncomp,) + grid.dims)
    vals -= vals.mean(axis=(1, 2, 3), keepdims=True)
    return Field(grid, vals)


# reference cutoff implemented independently of the package (same closed form)
def chi_hat_ref(t):
    t = np.abs(np.asarray(t, dtype=float))

    def theta(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    up = theta(2.0 - t)
    dn = theta(t - 1.0)
    mid = np.where(up + dn > 0, up / (up + dn + 1e-300), 0.0)
    return np.where(t <= 1, 1.0, np.where(t >= 2, 0.0, mid))


def psi_hat_ref(t):
    return chi_hat_ref(np.asarray(t) / 2.0) - chi_hat_ref(t)
