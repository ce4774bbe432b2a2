import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import load_oracle_cases, random_physical_state
from qlidar import fock, metrics
from qlidar.channel import ChannelParams, apply_loss
from qlidar.errors import InvalidParameterError
from qlidar.states import (
    GaussianState,
    ProbeBudget,
    probe_from_budget,
    rotate,
    squeezed_vacuum,
    thermal_state,
)

VACUUM = thermal_state(0.0)
COHERENT_1 = GaussianState([math.sqrt(2.0), 0.0], np.eye(2))  # |alpha|^2 = 1
THERMAL_2 = thermal_state(2.0)


class TestSqrtSpd:
    def test_diagonal(self):
        assert_allclose(metrics.sqrt_spd_2x2(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), rtol=1e-15)

    def test_identity(self):
        assert_allclose(metrics.sqrt_spd_2x2(np.eye(2)), np.eye(2), rtol=1e-15)

    def test_coupled(self):
        m = np.array([[2.0, 1.0], [1.0, 2.0]])
        root = metrics.sqrt_spd_2x2(m)
        s3 = math.sqrt(3.0)
        expected = np.array([[(s3 + 1) / 2, (s3 - 1) / 2], [(s3 - 1) / 2, (s3 + 1) / 2]])
        assert_allclose(root, expected, rtol=1e-14)
        assert_allclose(root @ root, m, atol=1e-12)

    def test_square_roundtrip_random(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            m = random_physical_state(rng).sigma
            root = metrics.sqrt_spd_2x2(m)
            assert np.max(np.abs(root @ root - m)) < 1e-12

    def test_rejects_non_spd(self):
        with pytest.raises(InvalidParameterError):
            metrics.sqrt_spd_2x2(np.diag([1.0, -1.0]))
        with pytest.raises(InvalidParameterError):
            metrics.sqrt_spd_2x2(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestBures:
    def test_identical(self):
        m = np.array([[1.4, 0.3], [0.3, 1.1]])
        assert metrics.bures_sq(m, m) < 1e-14

    def test_commuting_scalar(self):
        # commuting closed form: sum of (sqrt differences)^2
        assert abs(metrics.bures_sq(np.eye(2), 4.0 * np.eye(2)) - 2.0) < 1e-14

    def test_commuting_diag(self):
        got = metrics.bures_sq(np.eye(2), np.diag([0.25, 4.0]))
        assert abs(got - 1.25) < 1e-14

    def test_symmetry_and_eig_reference(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            a = random_physical_state(rng).sigma
            b = random_physical_state(rng).sigma
            ab = metrics.bures_sq(a, b)
            assert abs(ab - metrics.bures_sq(b, a)) < 1e-10
            assert abs(ab - metrics._bures_sq_eig(a, b)) < 1e-10


class TestW2:
    def test_identical_states(self):
        state = probe_from_budget(ProbeBudget(4.0, 0.3))
        w2, disp, b2 = metrics.w2_sq(state, state)
        assert w2 < 1e-12 and disp < 1e-12 and b2 < 1e-12

    def test_vacuum_vs_coherent(self):
        w2, disp, b2 = metrics.w2_sq(VACUUM, COHERENT_1)
        assert abs(w2 - 2.0) < 1e-12
        assert abs(disp - 2.0) < 1e-12
        assert b2 == 0.0

    def test_vacuum_vs_squeezed(self):
        # commuting closed form with sqrt(sigma) entries e^{-r}, e^{r}
        expected = (math.exp(-0.5) - 1.0) ** 2 + (math.exp(0.5) - 1.0) ** 2
        w2, disp, b2 = metrics.w2_sq(VACUUM, squeezed_vacuum(0.5))
        assert abs(w2 - expected) < 1e-12
        assert disp == 0.0
        assert abs(b2 - expected) < 1e-12

    def test_decomposition_identity(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            a, b = random_physical_state(rng), random_physical_state(rng)
            w2, disp, b2 = metrics.w2_sq(a, b)
            assert abs(w2 - (disp + b2)) < 1e-12

    def test_metric_axioms_sample(self):
        rng = np.random.default_rng(37)
        for _ in range(2000):
            a, b, c = (random_physical_state(rng) for _ in range(3))
            dab = math.sqrt(metrics.w2_sq(a, b)[0])
            dba = math.sqrt(metrics.w2_sq(b, a)[0])
            dac = math.sqrt(metrics.w2_sq(a, c)[0])
            dbc = math.sqrt(metrics.w2_sq(b, c)[0])
            assert dab >= 0.0
            assert abs(dab - dba) < 1e-10
            assert dac <= dab + dbc + 1e-9

    def test_mean_scaling_exactness(self):
        # equal covariances: the channel contracts w2_sq by exactly eta_eff
        rng = np.random.default_rng(41)
        for _ in range(100):
            sigma = random_physical_state(rng).sigma
            a = GaussianState(rng.uniform(-3, 3, 2), sigma)
            b = GaussianState(rng.uniform(-3, 3, 2), sigma)
            params = ChannelParams(eta=float(rng.uniform(0, 1)), n_th=float(rng.uniform(0, 2)))
            before = metrics.w2_sq(a, b)[0]
            after = metrics.w2_sq(apply_loss(a, params), apply_loss(b, params))[0]
            assert abs(after - params.eta_eff * before) < 1e-12 * max(1.0, before)


class TestFidelity:
    def test_identical(self):
        state = probe_from_budget(ProbeBudget(3.0, 0.6))
        assert abs(metrics.gaussian_fidelity(state, state) - 1.0) < 1e-12

    def test_coherent_pair(self):
        # |<alpha|beta>|^2 with |alpha - beta|^2 = 1
        got = metrics.gaussian_fidelity(VACUUM, COHERENT_1)
        assert abs(got - math.exp(-1.0)) < 1e-12

    def test_vacuum_vs_thermal(self):
        # ground-state population of a thermal state: 1 / (n + 1)
        got = metrics.gaussian_fidelity(VACUUM, THERMAL_2)
        assert abs(got - 1.0 / 3.0) < 1e-12
        rho0 = fock.build_state(VACUUM, 200)
        rho1 = fock.build_state(THERMAL_2, 200)
        assert abs(got - fock.oracle_fidelity(rho0, rho1)) < 1e-6

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            a, b = random_physical_state(rng), random_physical_state(rng)
            f = metrics.gaussian_fidelity(a, b)
            assert 0.0 <= f <= 1.0 + 1e-12
            assert abs(f - metrics.gaussian_fidelity(b, a)) < 1e-12


class TestXiQbb:
    def test_identical(self):
        state = probe_from_budget(ProbeBudget(2.0, 0.2))
        assert metrics.xi_qbb(state, state) < 1e-10
        assert metrics.xi_qbb(state, state, mode="fidelity_proxy") < 1e-10

    def test_coherent_pair_modes(self):
        # proxy: -(1/2) ln F = 0.5.  For pure states the s = 1/2 overlap equals
        # the fidelity itself, so the overlap exponent is exactly twice that.
        proxy = metrics.xi_qbb(VACUUM, COHERENT_1, mode="fidelity_proxy")
        overlap = metrics.xi_qbb(VACUUM, COHERENT_1, mode="overlap")
        assert abs(proxy - 0.5) < 1e-12
        assert abs(overlap - 1.0) < 1e-12
        assert abs(overlap - 2.0 * proxy) < 1e-8

    def test_pure_pairs_overlap_doubles_proxy(self):
        rng = np.random.default_rng(47)
        for _ in range(50):
            a = rotate(squeezed_vacuum(float(rng.uniform(0, 1))), float(rng.uniform(0, math.pi)))
            b = GaussianState(rng.uniform(-2, 2, 2), squeezed_vacuum(float(rng.uniform(0, 1))).sigma)
            overlap = metrics.xi_qbb(a, b, mode="overlap")
            proxy = metrics.xi_qbb(a, b, mode="fidelity_proxy")
            assert abs(overlap - 2.0 * proxy) < 1e-8

    def test_vacuum_thermal_overlap_vs_oracle(self):
        got = metrics.xi_qbb(VACUUM, THERMAL_2, mode="overlap")
        rho0 = fock.build_state(VACUUM, 200)
        rho1 = fock.build_state(THERMAL_2, 200)
        oracle = -math.log(fock.oracle_s_overlap(rho0, rho1, 0.5))
        assert abs(got - oracle) < 1e-6

    def test_saturation_cap(self):
        far = GaussianState([80.0, 0.0], np.eye(2))
        assert metrics.xi_qbb(VACUUM, far, cap=700.0) == 700.0
        assert metrics.xi_qbb(VACUUM, far, cap=50.0) == 50.0

    def test_unknown_mode(self):
        with pytest.raises(InvalidParameterError):
            metrics.xi_qbb(VACUUM, COHERENT_1, mode="nope")


class TestXiQcb:
    def test_identical(self):
        state = probe_from_budget(ProbeBudget(2.0, 0.5))
        assert metrics.xi_qcb(state, state) < 1e-10

    def test_symmetric_pair_minimizer(self):
        other = GaussianState([0.0, math.sqrt(2.0)], np.eye(2))
        s_star, _ = metrics.s_overlap_minimum(COHERENT_1, other)
        assert abs(s_star - 0.5) < 1e-4
        assert abs(metrics.xi_qcb(COHERENT_1, other) - metrics.xi_qbb(COHERENT_1, other)) < 1e-8

    def test_dominates_qbb(self):
        rng = np.random.default_rng(53)
        for _ in range(200):
            a, b = random_physical_state(rng), random_physical_state(rng)
            assert metrics.xi_qcb(a, b) >= metrics.xi_qbb(a, b) - 1e-10

    def test_vacuum_thermal_s_grid_vs_oracle(self):
        # boundary minimiser case; closed form checked on an interior s grid
        rho0 = fock.build_state(VACUUM, 200)
        rho1 = fock.build_state(THERMAL_2, 200)
        for s in np.arange(0.05, 0.96, 0.05):
            closed = math.exp(metrics._log_s_overlap(VACUUM, THERMAL_2, float(s)))
            oracle = fock.oracle_s_overlap(rho0, rho1, float(s))
            assert abs(closed - oracle) < 1e-6
        xi_cb = metrics.xi_qcb(VACUUM, THERMAL_2)
        assert xi_cb >= metrics.xi_qbb(VACUUM, THERMAL_2) - 1e-10
        # the true minimum sits at the s -> 0 edge where Q -> 1/3
        assert abs(xi_cb - math.log(3.0)) < 1e-6


class TestHomodyneSnr:
    def test_aligned(self):
        h1 = GaussianState([2.0, 0.0], np.eye(2))
        assert abs(metrics.homodyne_snr(h1, VACUUM, 0.0) - 4.0) < 1e-12

    def test_orthogonal(self):
        h1 = GaussianState([2.0, 0.0], np.eye(2))
        assert metrics.homodyne_snr(h1, VACUUM, math.pi / 2) < 1e-12

    def test_squeezing_boost(self):
        h1 = GaussianState([2.0, 0.0], np.diag([0.25, 4.0]))
        assert abs(metrics.homodyne_snr(h1, VACUUM, 0.0) - 16.0) < 1e-12

    def test_max_variance_option(self):
        h1 = GaussianState([2.0, 0.0], np.diag([0.25, 4.0]))
        h0 = thermal_state(1.0)  # variance 3 > 0.25
        conservative = metrics.homodyne_snr(h1, h0, 0.0, variance="max")
        assert abs(conservative - 4.0 / 3.0) < 1e-12


class TestOptimalQuadrature:
    def test_aligned_case(self):
        h1 = GaussianState([2.0, 0.0], np.diag([0.25, 4.0]))
        quad = metrics.optimal_quadrature(h1, VACUUM)
        assert abs(quad.theta_opt - 0.0) < 1e-9
        assert abs(quad.snr_sq_opt - 16.0) < 1e-9
        assert not quad.degenerate

    def test_no_displacement_degenerate(self):
        quad = metrics.optimal_quadrature(squeezed_vacuum(0.7), VACUUM)
        assert quad.degenerate
        assert quad.snr_sq_opt == 0.0
        # variance-minimising direction is the squeezed (first) axis
        assert min(quad.theta_opt, math.pi - quad.theta_opt) < 1e-9

    def test_rotated_vs_grid(self):
        from qlidar.states import rotation_matrix

        rot = rotation_matrix(math.pi / 6)
        h1 = GaussianState([2.0, 0.0], rot @ np.diag([0.25, 4.0]) @ rot.T)
        quad = metrics.optimal_quadrature(h1, VACUUM)
        thetas = np.linspace(0.0, math.pi, 100_000, endpoint=False)
        u = np.stack([np.cos(thetas), np.sin(thetas)])
        num = (h1.mu @ u) ** 2
        var = np.einsum("ij,ik,kj->j", u, h1.sigma, u)
        grid_max = float(np.max(num / var))
        assert quad.snr_sq_opt >= grid_max - 1e-6 * grid_max
        assert abs(quad.snr_sq_opt - grid_max) < 1e-6 * grid_max

    def test_dominates_sampled_angles(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            h1 = random_physical_state(rng)
            h0 = random_physical_state(rng)
            quad = metrics.optimal_quadrature(h1, h0)
            for theta in np.linspace(0, math.pi, 360, endpoint=False):
                assert quad.snr_sq_opt >= metrics.homodyne_snr(h1, h0, float(theta)) - 1e-9


class TestRotationInvariance:
    def test_all_metrics(self):
        rng = np.random.default_rng(61)
        for _ in range(40):
            a, b = random_physical_state(rng), random_physical_state(rng)
            theta = float(rng.uniform(0, 2 * math.pi))
            ar, br = rotate(a, theta), rotate(b, theta)
            assert abs(metrics.w2_sq(a, b)[0] - metrics.w2_sq(ar, br)[0]) < 1e-10
            assert abs(metrics.bures_sq(a.sigma, b.sigma) - metrics.bures_sq(ar.sigma, br.sigma)) < 1e-10
            assert abs(metrics.gaussian_fidelity(a, b) - metrics.gaussian_fidelity(ar, br)) < 1e-10
            assert abs(metrics.xi_qbb(a, b) - metrics.xi_qbb(ar, br)) < 1e-10
            assert abs(metrics.xi_qcb(a, b) - metrics.xi_qcb(ar, br)) < 1e-10


class TestOracleGrid:
    def test_closed_forms_match_frozen_oracle(self):
        for case_id, s0, s1, _, fid, overlap in load_oracle_cases():
            got_f = metrics.gaussian_fidelity(s0, s1)
            got_q = math.exp(metrics._log_s_overlap(s0, s1, 0.5))
            assert abs(got_f - fid) < 1e-6, f"fidelity mismatch on case {case_id}"
            assert abs(got_q - overlap) < 1e-6, f"overlap mismatch on case {case_id}"


def test_metric_report_consistency():
    probe = probe_from_budget(ProbeBudget(5.0, 0.5))
    out = apply_loss(probe, ChannelParams(eta=0.6, n_th=1.0))
    env = thermal_state(1.0)
    rep = metrics.metric_report(out, env)
    assert abs(rep.w2_sq - (rep.displacement_term + rep.bures_sq)) < 1e-12
    assert rep.xi_qcb >= rep.xi_qbb - 1e-10
    assert 0.0 <= rep.fidelity <= 1.0 + 1e-12
    assert abs(rep.w2_sq - metrics.w2_sq(env, out)[0]) < 1e-12
    assert abs(rep.xi_qbb - metrics.xi_qbb(env, out)) < 1e-12
    assert abs(rep.snr_sq_opt - metrics.optimal_quadrature(out, env).snr_sq_opt) < 1e-12
