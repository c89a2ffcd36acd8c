import math

import numpy as np
import pytest

import lacelab as ll


@pytest.fixture(scope="module")
def srw_constants():
    kern = ll.make_uniform_box(1, 1, include_origin=True)
    model = ll.SimpleRandomWalk(kern)
    return kern, model, ll.solve_zc(model, M=256)


@pytest.fixture(scope="module")
def synthetic_setup():
    kern = ll.make_uniform_box(1, 5)
    model = ll.SyntheticTheta(kern, theta=2.5, beta0=0.05, beta0_e=0.025,
                              e_profile=2)
    constants = ll.solve_zc(model, M=2 ** 17)
    params = ll.InductionParams.for_kernel(kern, theta=2.5, eps=0.4,
                                           gamma=0.3, delta=0.05, lam=2.3)
    return kern, model, constants, params


class TestVarianceProbe:
    def test_srw_ratio_identically_one(self, srw_constants):
        _, model, constants = srw_constants
        probe = ll.probe_variance(model, constants,
                                  n_ladder=[2 ** j for j in range(4, 11)])
        assert np.abs(probe.ratios - 1.0).max() <= 1e-10

    def test_first_step_ratio_is_inverse_v(self, synthetic_setup):
        _, model, constants, _ = synthetic_setup
        probe = ll.probe_variance(model, constants, n_ladder=[1, 2, 4])
        # -lap f_1(0) / f_1(0) = sigma^2 exactly, so the n=1 ratio is 1/v
        assert probe.ratios[0] == pytest.approx(1.0 / constants.v, rel=1e-9)

    def test_synthetic_rate_positive(self, synthetic_setup):
        _, model, constants, _ = synthetic_setup
        probe = ll.probe_variance(model, constants,
                                  n_ladder=[2 ** j for j in range(5, 10)])
        dev = np.abs(probe.ratios - 1.0)
        assert np.all(np.diff(dev) < 0)
        assert probe.delta_hat is not None and probe.delta_hat > 0


class TestScalingProbe:
    def test_srw_matches_heuristic_closed_form(self, srw_constants):
        kern, model, constants = srw_constants
        params = ll.InductionParams.for_kernel(kern, theta=2.5, eps=0.4,
                                               gamma=0.3, delta=0.05, lam=2.3)
        probe = ll.probe_clt(model, constants, params, n_ladder=[256, 1024],
                             magnitudes=(0.0, 0.5, 1.0))
        for i, n in enumerate(probe.n_values):
            scale = math.sqrt(constants.v * kern.sigma2 * n)
            for j, mag in enumerate(probe.magnitudes):
                expect = (1.0 - kern.a(np.array([mag / scale]))) ** n \
                    / math.exp(-mag ** 2 / 2.0)
                assert probe.ratios[i, j] == pytest.approx(expect, rel=1e-12)

    def test_srw_ratios_approach_one(self, srw_constants):
        kern, model, constants = srw_constants
        params = ll.InductionParams.for_kernel(kern, theta=2.5, eps=0.4,
                                               gamma=0.3, delta=0.05, lam=2.3)
        probe = ll.probe_clt(model, constants, params,
                             n_ladder=[64, 256, 1024, 4096],
                             magnitudes=(1.0,))
        dev = np.abs(probe.ratios[:, 0] - 1.0)
        assert np.all(np.diff(dev) < 0)
        assert dev[-1] <= 1e-3

    def test_regime_mask_follows_threshold(self, synthetic_setup):
        kern, model, constants, params = synthetic_setup
        probe = ll.probe_clt(model, constants, params, n_ladder=[4, 4096],
                             magnitudes=(0.0, 2.0))
        # tight threshold at tiny n excludes the large magnitude
        assert bool(probe.regime_mask[0, 1]) is False
        assert bool(probe.regime_mask[1, 1]) is True

    def test_deviation_shrinks_with_n(self, synthetic_setup):
        _, model, constants, params = synthetic_setup
        probe = ll.probe_clt(model, constants, params,
                             n_ladder=[2 ** 8, 2 ** 10, 2 ** 12],
                             magnitudes=(0.0, 0.5, 1.0, 1.75))
        devs = [probe.max_regime_deviation(n) for n in probe.n_values]
        assert np.all(np.diff(devs) < 0)

    def test_rate_fits_present(self, synthetic_setup):
        _, model, constants, params = synthetic_setup
        probe = ll.probe_clt(model, constants, params,
                             n_ladder=[2 ** j for j in range(6, 11)],
                             magnitudes=(0.0, 0.5, 1.0))
        assert probe.theta_hat is not None
        assert probe.delta_hat is not None and probe.delta_hat > 0

    def test_diagonal_direction_present_in_d2(self, k2_excl):
        model = ll.SimpleRandomWalk(k2_excl)
        constants = ll.solve_zc(model, M=64)
        params = ll.InductionParams.for_kernel(k2_excl, theta=2.5, eps=0.4,
                                               gamma=0.3, delta=0.05, lam=2.3)
        probe = ll.probe_clt(model, constants, params, n_ladder=[64],
                             magnitudes=(0.0, 1.0))
        assert set(probe.labels) == {"zero", "axis", "diagonal"}
        # axis and diagonal ratios agree by symmetry of the kernel
        j_ax = probe.labels.index("axis")
        j_di = probe.labels.index("diagonal")
        assert probe.ratios[0, j_ax] == pytest.approx(probe.ratios[0, j_di],
                                                      rel=1e-9)
