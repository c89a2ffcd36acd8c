import numpy as np
import pytest

import lacelab as ll


@pytest.fixture(scope="session")
def k1_excl():
    return ll.make_uniform_box(1, 1)


@pytest.fixture(scope="session")
def k1_incl():
    return ll.make_uniform_box(1, 1, include_origin=True)


@pytest.fixture(scope="session")
def k2_excl():
    return ll.make_uniform_box(2, 1)


@pytest.fixture(scope="session")
def kL5():
    return ll.make_uniform_box(1, 5)


@pytest.fixture(scope="session")
def params_L5(kL5):
    return ll.InductionParams.for_kernel(kL5, theta=2.5, eps=0.4, gamma=0.3,
                                         delta=0.05, lam=2.3)


@pytest.fixture(scope="session")
def params_unit(k1_incl):
    # L = 1 kernel: beta = 1
    return ll.InductionParams.for_kernel(k1_incl, theta=2.5, eps=0.4,
                                         gamma=0.3, delta=0.05, lam=2.3)


def axis_grid(d, count=16, k_max=np.pi, with_zero=True):
    ks = np.linspace(-k_max, k_max, count)[:, None] * np.ones(d)[None, :]
    ks[:, 1:] = 0.0
    if with_zero:
        ks = np.vstack([np.zeros((1, d)), ks])
    return ks
