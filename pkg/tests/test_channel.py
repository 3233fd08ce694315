"""Channel generation: moments, imperfect-CSI decomposition, determinism, prefix coupling."""

import math

import numpy as np
import pytest

from faidet.channel import (
    apply_imperfect_csi,
    derive_rng,
    generate_estimated_channel,
    generate_scenario,
    pathloss,
    selected_port_indices,
)
from faidet.specfun import port_correlation
from faidet.sysmodel import SystemConfig

DRAWS = 100_000


def batched_channel(seed, mu, gain=1.0, draws=DRAWS):
    # rows are independent and identically distributed, so a tall matrix is
    # a batch of independent single-antenna draws
    rng = derive_rng(seed, 0)
    return generate_estimated_channel(rng, draws, 2, mu, gain).entries


class TestPathloss:
    def test_reference_distance(self):
        assert pathloss(1.0, 2.7) == 1.0

    def test_power_law(self):
        assert pathloss(10.0, 2.7) == pytest.approx(10.0**-2.7, rel=1e-14)
        assert pathloss(10.0, 2.7) == pytest.approx(1.9952623149688797e-3, rel=1e-12)

    def test_er_distance_value(self):
        assert pathloss(3.0, 2.7) == pytest.approx(3.0**-2.7, rel=1e-14)

    def test_below_reference_rejected(self):
        with pytest.raises(ValueError):
            pathloss(0.5, 2.7)


class TestEstimatedChannel:
    def test_fully_correlated_ports(self):
        rng = derive_rng(1, 0)
        mat = generate_estimated_channel(rng, 4, 8, 1.0, 1.0).entries
        for n in range(1, 8):
            np.testing.assert_allclose(mat[:, n], mat[:, 0], rtol=0, atol=0)

    def test_independent_ports(self):
        mat = batched_channel(2, mu=0.0)
        corr = np.mean(mat[:, 0] * np.conj(mat[:, 1]))
        assert abs(corr) <= 0.02

    def test_moment_oracle(self):
        # per-entry variance -> gain, inter-port complex correlation -> mu^2
        mu = 0.6
        mat = batched_channel(3, mu=mu)
        var = np.mean(np.abs(mat) ** 2)
        corr = np.mean(mat[:, 0] * np.conj(mat[:, 1])).real
        se = 1.0 / math.sqrt(DRAWS)
        assert var == pytest.approx(1.0, abs=3 * se * 2.0)
        assert corr == pytest.approx(mu * mu, abs=0.02)

    def test_moments_with_w_derived_mu_and_gain(self):
        mu = port_correlation(0.5)
        gain = pathloss(3.0, 2.7)
        mat = batched_channel(4, mu=mu, gain=gain)
        var = np.mean(np.abs(mat) ** 2)
        corr = np.mean(mat[:, 0] * np.conj(mat[:, 1])).real
        se = gain / math.sqrt(DRAWS)
        assert var == pytest.approx(gain, abs=3 * se * 2.0)
        assert corr == pytest.approx(mu * mu * gain, abs=3 * se * 2.0)

    def test_parameter_validation(self):
        rng = derive_rng(0, 0)
        with pytest.raises(ValueError):
            generate_estimated_channel(rng, 2, 2, 1.5, 1.0)
        with pytest.raises(ValueError):
            generate_estimated_channel(rng, 2, 2, 0.5, 0.0)


class TestImperfectCsi:
    def test_perfect_csi(self):
        rng = derive_rng(5, 0)
        est = generate_estimated_channel(rng, 4, 8, 0.5, 1.0)
        pair = apply_imperfect_csi(rng, est, 1.0, 1.0)
        np.testing.assert_array_equal(pair.true_channel.entries, est.entries)

    def test_zero_accuracy_independence(self):
        rng = derive_rng(6, 0)
        est = generate_estimated_channel(rng, DRAWS, 1, 0.0, 1.0)
        pair = apply_imperfect_csi(rng, est, 0.0, 1.0)
        cross = np.mean(pair.true_channel.entries * np.conj(est.entries))
        assert abs(cross) <= 0.02

    def test_error_moment_oracle(self):
        rho = 0.9
        rng = derive_rng(7, 0)
        est = generate_estimated_channel(rng, DRAWS, 1, 0.0, 1.0)
        pair = apply_imperfect_csi(rng, est, rho, 1.0)
        residual = pair.true_channel.entries - rho * est.entries
        assert abs(np.mean(residual)) <= 0.01
        assert np.mean(np.abs(residual) ** 2) == pytest.approx(1 - rho * rho, abs=0.01)

    def test_decomposition_residual_variance_scales_with_error_variance(self):
        rho, sigma2 = 0.8, 0.25
        rng = derive_rng(8, 0)
        est = generate_estimated_channel(rng, DRAWS, 1, 0.0, 1.0)
        pair = apply_imperfect_csi(rng, est, rho, sigma2)
        residual = pair.true_channel.entries - rho * est.entries
        expect = (1 - rho * rho) * sigma2
        assert np.mean(np.abs(residual) ** 2) == pytest.approx(expect, abs=0.01 * sigma2)


class TestSelectedPorts:
    def test_no_subsampling(self):
        assert selected_port_indices(10, 1) == tuple(range(10))

    def test_ceiling_rule(self):
        ports = selected_port_indices(200, 16)
        assert len(ports) == math.ceil(200 / 16) == 13
        assert ports[:3] == (0, 16, 32)
        assert ports[0] == 0

    def test_stride_bounds(self):
        with pytest.raises(ValueError):
            selected_port_indices(10, 0)
        with pytest.raises(ValueError):
            selected_port_indices(10, 11)


class TestScenario:
    def test_reference_shape(self):
        config = SystemConfig(ports=200)
        channels = generate_scenario(derive_rng(9, 0), config)
        assert len(channels.dr_links) == 2
        assert len(channels.er_links) == 2
        for link in channels.dr_links + channels.er_links:
            assert link.estimated.entries.shape == (4, 200)
            assert link.true_channel.entries.shape == (4, 200)

    def test_error_variance_equals_pathloss(self):
        config = SystemConfig()
        channels = generate_scenario(derive_rng(10, 0), config)
        assert channels.dr_links[0].error_variance == pytest.approx(10.0**-2.7)
        assert channels.er_links[0].error_variance == pytest.approx(3.0**-2.7)

    def test_determinism(self):
        config = SystemConfig(ports=32)
        a = generate_scenario(derive_rng(11, 4), config)
        b = generate_scenario(derive_rng(11, 4), config)
        for la, lb in zip(a.dr_links + a.er_links, b.dr_links + b.er_links):
            np.testing.assert_array_equal(la.estimated.entries, lb.estimated.entries)
            np.testing.assert_array_equal(la.true_channel.entries, lb.true_channel.entries)
        assert a.selected_ports == b.selected_ports

    def test_port_count_prefix_coupling(self):
        # the same trial stream yields nested scenarios as N grows
        small = generate_scenario(derive_rng(12, 0), SystemConfig(ports=50))
        large = generate_scenario(derive_rng(12, 0), SystemConfig(ports=200))
        for ls, ll in zip(small.dr_links + small.er_links, large.dr_links + large.er_links):
            np.testing.assert_array_equal(ls.estimated.entries, ll.estimated.entries[:, :50])
            np.testing.assert_array_equal(
                ls.true_channel.entries, ll.true_channel.entries[:, :50]
            )

    def test_rho_only_mixes_the_same_draws(self):
        # common-random-number coupling across CSI accuracy values
        exact = generate_scenario(derive_rng(13, 0), SystemConfig(rho=1.0))
        noisy = generate_scenario(derive_rng(13, 0), SystemConfig(rho=0.9))
        np.testing.assert_array_equal(
            exact.dr_links[0].estimated.entries, noisy.dr_links[0].estimated.entries
        )

    def test_independent_links(self):
        # single-port links make every entry an independent sample
        config = SystemConfig(tx_antennas=4000, ports=1, num_dr=2, num_er=0)
        channels = generate_scenario(derive_rng(14, 0), config)
        a = channels.dr_links[0].estimated.entries.ravel()
        b = channels.dr_links[1].estimated.entries.ravel()
        gain = pathloss(config.dr_distance_m, config.pathloss_exponent)
        assert abs(np.mean(a * np.conj(b))) <= 3 * gain / math.sqrt(a.size)
