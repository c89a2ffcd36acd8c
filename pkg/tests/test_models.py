import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lacelab as ll
from lacelab.models import (EnumerationBudgetError, HorizonError,
                            IncompleteInputError, UnsupportedQueryError,
                            write_coefficients_csv)

K0 = np.zeros(1)


def q(m, k, z):
    return ll.CoefficientQuery(m=m, k=k, z=z)


class TestQueries:
    def test_validation(self):
        with pytest.raises(ValueError):
            ll.CoefficientQuery(m=0, k=K0, z=1.0)
        with pytest.raises(ValueError):
            ll.CoefficientQuery(m=1, k=K0, z=0.0)

    def test_horizon_error(self, k1_excl):
        model = ll.SimpleRandomWalk(k1_excl, n_max=4)
        with pytest.raises(HorizonError):
            model.g(q(5, K0, 1.0))


class TestSimpleRandomWalk:
    def test_g1_is_z_dhat(self, k1_excl):
        model = ll.SimpleRandomWalk(k1_excl)
        assert model.g(q(1, K0, 1.0)) == 1.0
        k = np.array([0.7])
        assert model.g(q(1, k, 0.9)) == 0.9 * k1_excl.fourier(k)

    def test_no_memory_terms(self, k1_excl):
        model = ll.SimpleRandomWalk(k1_excl)
        assert model.g(q(2, np.array([0.3]), 1.1)) == 0.0
        assert model.e(q(3, K0, 1.0)) == 0.0

    def test_laplacians(self, k1_excl):
        model = ll.SimpleRandomWalk(k1_excl)
        assert model.g_laplacian_at_zero(1, 1.0) == -k1_excl.sigma2
        assert model.g_laplacian_at_zero(2, 1.0) == 0.0

    def test_z_derivative(self, k1_excl):
        model = ll.SimpleRandomWalk(k1_excl)
        assert model.g_z_derivative_at_zero(1, 0.97) == 1.0
        assert model.g_z_derivative_at_zero(4, 0.97) == 0.0


class TestSyntheticTheta:
    def test_g_closed_form(self, k1_excl):
        model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1)
        expected = 0.1 * 2.0 ** -2.5  # 0.017677669529663688
        assert model.g(q(2, K0, 1.0)) == pytest.approx(expected, abs=1e-15)
        assert model.g(q(2, K0, 1.0)) == pytest.approx(0.017677669529663688,
                                                       abs=1e-15)

    def test_g1_unchanged(self, k1_excl):
        model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1)
        k = np.array([1.3])
        assert model.g(q(1, k, 1.05)) == 1.05 * k1_excl.fourier(k)

    def test_e_closed_form(self, k1_excl):
        model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.0, beta0_e=0.05)
        assert model.e(q(4, K0, 1.0)) == pytest.approx(0.0015625, abs=1e-18)
        assert model.e(q(1, np.array([0.4]), 1.0)) == 0.0

    def test_laplacian_closed_form(self, k1_excl):
        model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1)
        expected = -0.1 * 2.0 ** -2.5 * 2.0 * k1_excl.sigma2
        got = model.g_laplacian_at_zero(2, 1.0)
        assert got == pytest.approx(expected, abs=1e-15)
        assert got == pytest.approx(-0.035355339059327376, abs=1e-15)

    def test_z_derivative_closed_form(self, k1_excl):
        model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1)
        got = model.g_z_derivative_at_zero(3, 1.0)
        assert got == pytest.approx(0.3 * 3.0 ** -2.5, abs=1e-15)
        assert got == pytest.approx(0.019245008972987526, abs=1e-15)

    def test_magnitude_envelope(self, k1_incl):
        model = ll.SyntheticTheta(k1_incl, theta=2.5, beta0=0.1,
                                  sign_pattern="alt")
        ks = np.linspace(-math.pi, math.pi, 41)[:, None]
        for z in (0.9, 1.0, 1.1):
            gt = model.g_block(ks, z, 32)
            ms = np.arange(2, 33, dtype=float)
            envelope = 0.1 * z ** ms * ms ** -2.5
            assert np.all(np.abs(gt[2:]) <= envelope[:, None] * (1 + 1e-12))

    def test_sign_patterns(self, k1_excl):
        minus = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1,
                                  sign_pattern="-")
        alt = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1,
                                sign_pattern="alt")
        assert minus.g(q(2, K0, 1.0)) < 0
        assert alt.g(q(2, K0, 1.0)) > 0 > alt.g(q(3, K0, 1.0))
        with pytest.raises(ValueError):
            ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1, sign_pattern="?")

    def test_block_matches_scalar(self, k1_incl):
        model = ll.SyntheticTheta(k1_incl, theta=2.7, beta0=0.08,
                                  beta0_e=0.03, e_profile=2)
        ks = np.array([[0.0], [0.5], [2.8]])
        gt = model.g_block(ks, 0.95, 6)
        et = model.e_block(ks, 0.95, 6)
        for m in range(1, 7):
            for j, k in enumerate(ks):
                assert gt[m, j] == pytest.approx(model.g_value(m, k, 0.95),
                                                 rel=1e-13)
                assert et[m, j] == pytest.approx(model.e_value(m, k, 0.95),
                                                 rel=1e-13)

    def test_theta_must_exceed_two(self, k1_excl):
        with pytest.raises(ValueError):
            ll.SyntheticTheta(k1_excl, theta=2.0, beta0=0.1)


@pytest.mark.parametrize("factory", [
    lambda kern: ll.SimpleRandomWalk(kern),
    lambda kern: ll.SyntheticTheta(kern, theta=2.5, beta0=0.1, beta0_e=0.02),
    lambda kern: ll.WeaklySelfAvoidingWalk(kern, u=0.4, n_max=6),
])
class TestSharedInvariants:
    def test_e1_vanishes(self, factory, k1_excl):
        model = factory(k1_excl)
        assert model.e(q(1, np.array([0.9]), 1.02)) == 0.0

    def test_g1_equals_z_dhat(self, factory, k1_excl):
        model = factory(k1_excl)
        for k in (K0, np.array([0.31]), np.array([2.0])):
            got = model.g(q(1, k, 0.97))
            assert got == pytest.approx(0.97 * k1_excl.fourier(k), abs=1e-15)

    def test_even_in_k(self, factory, k1_excl):
        model = factory(k1_excl)
        for m in (1, 2, 4):
            k = np.array([1.234])
            assert model.g(q(m, k, 1.0)) == model.g(q(m, -k, 1.0))


class TestWeaklySAW:
    def test_interaction_free_is_plain_walk(self, k1_excl):
        ks = np.linspace(-math.pi, math.pi, 9)[:, None]
        f = ll.enumerate_weakly_saw(k1_excl, 0.0, 8, ks, 0.95)
        dh = k1_excl.fourier(ks)
        for n in range(9):
            assert np.abs(f[n] - (0.95 * dh) ** n).max() <= 1e-12

    def test_strict_avoidance_two_steps(self, k1_excl):
        f = ll.enumerate_weakly_saw(k1_excl, 1.0, 2, np.zeros((1, 1)), 1.0)
        assert f[2, 0] == 0.5

    def test_half_interaction_two_steps(self, k1_excl):
        f = ll.enumerate_weakly_saw(k1_excl, 0.5, 2, np.zeros((1, 1)), 1.0)
        assert f[2, 0] == 0.75

    def test_budget_error(self, k1_excl):
        with pytest.raises(EnumerationBudgetError):
            ll.WeaklySelfAvoidingWalk(k1_excl, u=0.5, n_max=40, budget=10 ** 6)

    def test_u_range(self, k1_excl):
        with pytest.raises(ValueError):
            ll.WeaklySelfAvoidingWalk(k1_excl, u=1.5, n_max=4)

    def test_g2_at_zero(self, k1_excl):
        model = ll.WeaklySelfAvoidingWalk(k1_excl, u=1.0, n_max=6)
        assert model.g_value(2, K0, 1.0) == -0.5

    def test_fugacity_grading(self, k1_excl):
        model = ll.WeaklySelfAvoidingWalk(k1_excl, u=0.3, n_max=6)
        k = np.array([0.42])
        g3 = model.g_value(3, k, 1.0)
        assert model.g_value(3, k, 0.9) == pytest.approx(0.9 ** 3 * g3, rel=1e-13)

    def test_z_derivative_fd_matches_grading(self, k1_excl):
        # central difference with one Richardson step; documented 1e-7 relative
        model = ll.WeaklySelfAvoidingWalk(k1_excl, u=0.6, n_max=6)
        analytic = 4 * 0.95 ** 3 * model.g_at_zero(1.0, 4)[4]
        fd = model.g_z_derivative_at_zero(4, 0.95)
        assert fd == pytest.approx(analytic, rel=1e-7)

    def test_laplacian_matches_fourier_side(self, k1_excl):
        # exact x-space moments against a finite difference of g itself
        model = ll.WeaklySelfAvoidingWalk(k1_excl, u=0.5, n_max=5)
        h = 1e-3
        m = 3
        val = model._lapg0[m]
        fd_h = 2 * (model.g_value(m, np.array([h]), 1.0)
                    - model.g_value(m, K0, 1.0)) / h ** 2
        fd_h2 = 2 * (model.g_value(m, np.array([h / 2]), 1.0)
                     - model.g_value(m, K0, 1.0)) / (h / 2) ** 2
        assert (4 * fd_h2 - fd_h) / 3 == pytest.approx(val, rel=1e-8)


class TestExtraction:
    def test_two_term_hand_example(self):
        f = np.array([[1.0], [0.5], [0.3]])
        model = ll.extract_coefficients(f, 2)
        assert model.g_table[1, 0] == 0.5
        assert model.g_table[2, 0] == pytest.approx(0.05, abs=1e-16)

    def test_srw_deconvolves_to_geometric(self, k1_excl):
        ks = np.linspace(-2.5, 2.5, 7)[:, None]
        dh = k1_excl.fourier(ks)
        f = np.vstack([(0.97 * dh) ** n for n in range(17)])
        model = ll.extract_coefficients(f, 16, k_points=ks, z0=0.97)
        assert np.abs(model.g_table[1] - 0.97 * dh).max() <= 1e-14
        assert np.abs(model.g_table[2:]).max() <= 1e-12

    def test_weakly_saw_g2(self, k1_excl):
        f = ll.enumerate_weakly_saw(k1_excl, 1.0, 4, np.zeros((1, 1)), 1.0)
        model = ll.extract_coefficients(f, 4)
        assert model.g_table[2, 0] == -0.5

    def test_round_trip(self, k1_excl):
        rng = np.random.default_rng(11)
        f = np.vstack([np.ones((1, 3)),
                       rng.uniform(-1, 1, (24, 3)) * 0.4 ** np.arange(1, 25)[:, None]])
        ks = np.linspace(0, 1, 3)[:, None]
        model = ll.extract_coefficients(f, 24, k_points=ks)
        state = ll.solve(model, 1.0, ks, 24)
        assert np.abs(state.f - f).max() <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_round_trip_random(self, seed):
        rng = np.random.default_rng(seed)
        horizon = int(rng.integers(4, 20))
        damp = rng.uniform(0.25, 0.45)
        f = np.vstack([np.ones((1, 2)),
                       rng.uniform(-1, 1, (horizon, 2))
                       * damp ** np.arange(1, horizon + 1)[:, None]])
        ks = np.array([[0.0], [1.0]])
        model = ll.extract_coefficients(f, horizon, k_points=ks)
        state = ll.solve(model, 1.0, ks, horizon)
        assert np.abs(state.f - f).max() <= 1e-10

    def test_missing_rows(self):
        with pytest.raises(IncompleteInputError):
            ll.extract_coefficients(np.ones((3, 1)), 5)

    def test_f0_must_be_one(self):
        bad = np.array([[0.9], [0.5]])
        with pytest.raises(IncompleteInputError):
            ll.extract_coefficients(bad, 1)

    def test_non_finite_rejected(self):
        bad = np.array([[1.0], [np.nan]])
        with pytest.raises(IncompleteInputError):
            ll.extract_coefficients(bad, 1)

    def test_off_table_query(self):
        model = ll.extract_coefficients(np.array([[1.0], [0.5]]), 1,
                                        k_points=np.array([[0.0]]))
        with pytest.raises(UnsupportedQueryError):
            model.g_value(1, np.array([0.3]), 1.0)

    def test_extracted_laplacian_stencil(self, k1_excl):
        wsaw = ll.WeaklySelfAvoidingWalk(k1_excl, u=0.5, n_max=5)
        h = 2e-3
        ks = np.array([[0.0], [h], [h / 2]])
        f = wsaw.f_block(ks, 1.0, 5)
        model = ll.extract_coefficients(f, 5, k_points=ks, kernel=k1_excl)
        assert model.g_laplacian_at_zero(3, 1.0) == pytest.approx(
            wsaw.g_laplacian_at_zero(3, 1.0), rel=1e-6)
        bare = ll.extract_coefficients(f[:, :1], 5, k_points=ks[:1])
        with pytest.raises(UnsupportedQueryError):
            bare.g_laplacian_at_zero(2, 1.0)


def test_coefficient_csv_export(tmp_path, k1_excl):
    model = ll.SyntheticTheta(k1_excl, theta=2.5, beta0=0.1, beta0_e=0.05)
    path = tmp_path / "coeffs.csv"
    write_coefficients_csv(path, model, np.array([[0.0], [1.0]]), 1.0, 3)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "m,k_index,z,g,e"
    assert len(lines) == 1 + 3 * 2
