"""Closed-form port selection against exhaustive metric scans."""

import numpy as np
import pytest

from faidet.channel import ChannelMatrix, ChannelSet, CsiPair, derive_rng, generate_scenario
from faidet.oracles import brute_force_dr_port, brute_force_er_port
from faidet.portselect import select_dr_port, select_er_port
from faidet.sysmodel import BeamformingSolution, SystemConfig, eh_power_at_port, sinr_at_port


def random_solution(rng, m, kd, scale=1.0):
    w = [
        scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2 * m)
        for _ in range(kd)
    ]
    a = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2 * m)
    return BeamformingSolution(w=w, V_E=scale * (a @ a.conj().T), v=None, objective=0.0)


class TestErSelection:
    def test_single_port(self):
        config = SystemConfig(ports=1)
        channels = generate_scenario(derive_rng(90, 0), config)
        sol = random_solution(derive_rng(90, 1), 4, 2)
        assert select_er_port(0, sol, channels, config) == 0

    def test_scalar_transmitter_picks_strongest_port(self):
        config = SystemConfig(tx_antennas=1, num_dr=0, num_er=1, ports=16)
        channels = generate_scenario(derive_rng(91, 0), config)
        sol = BeamformingSolution(
            w=[], V_E=np.array([[0.7]], dtype=complex), v=None, objective=0.0
        )
        expect = int(np.argmax(np.abs(channels.er_links[0].estimated.entries[0]) ** 2))
        assert select_er_port(0, sol, channels, config) == expect

    def test_oracle_equivalence(self):
        config = SystemConfig(ports=50, rho=0.9)
        rng = derive_rng(92, 0)
        channels = generate_scenario(rng, config)
        for _ in range(25):
            sol = random_solution(rng, 4, 2)
            for j in range(config.num_er):
                assert select_er_port(j, sol, channels, config) == brute_force_er_port(
                    j, sol, channels, config
                )

    def test_respects_subsampling(self):
        config = SystemConfig(ports=50, port_stride=7)
        rng = derive_rng(93, 0)
        channels = generate_scenario(rng, config)
        sol = random_solution(rng, 4, 2)
        port = select_er_port(0, sol, channels, config)
        assert port in channels.selected_ports
        assert port == brute_force_er_port(0, sol, channels, config)


class TestDrSelection:
    def test_single_port(self):
        config = SystemConfig(ports=1)
        channels = generate_scenario(derive_rng(94, 0), config)
        sol = random_solution(derive_rng(94, 1), 4, 2)
        assert select_dr_port(0, sol, channels, config) == 0

    def test_interference_free_reduces_to_matched_energy(self):
        # K_D = 1, K_E = 0, rho = 1: the SINR argmax is the signal argmax
        config = SystemConfig(num_dr=1, num_er=0, ports=32, rho=1.0)
        rng = derive_rng(95, 0)
        channels = generate_scenario(rng, config)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        sol = BeamformingSolution(
            w=[w], V_E=np.zeros((4, 4), dtype=complex), v=None, objective=0.0
        )
        h = channels.dr_links[0].estimated.entries
        expect = int(np.argmax(np.abs(h.conj().T @ w) ** 2))
        assert select_dr_port(0, sol, channels, config) == expect

    def test_oracle_equivalence(self):
        config = SystemConfig(ports=50, rho=0.9)
        rng = derive_rng(96, 0)
        channels = generate_scenario(rng, config)
        for _ in range(25):
            sol = random_solution(rng, 4, 2)
            for i in range(config.num_dr):
                assert select_dr_port(i, sol, channels, config) == brute_force_dr_port(
                    i, sol, channels, config
                )

    def test_oracle_equivalence_with_subsampling(self):
        config = SystemConfig(ports=50, rho=0.95, port_stride=4)
        rng = derive_rng(97, 0)
        channels = generate_scenario(rng, config)
        for _ in range(10):
            sol = random_solution(rng, 4, 2)
            for i in range(config.num_dr):
                assert select_dr_port(i, sol, channels, config) == brute_force_dr_port(
                    i, sol, channels, config
                )

    def test_zero_rho_rejected(self):
        config = SystemConfig(ports=4)
        rng = derive_rng(98, 0)
        shape = (4, 4)
        est = ChannelMatrix(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        link = CsiPair(est, est, rho=0.0, error_variance=1.0)
        channels = ChannelSet(dr_links=(link, link), er_links=(link, link), selected_ports=(0, 1, 2, 3))
        sol = random_solution(rng, 4, 2)
        with pytest.raises(ValueError):
            select_dr_port(0, sol, channels, config)


class TestSelectionProperties:
    def test_monotone_improvement(self):
        # moving to the selected port never lowers the receiver's own metric
        config = SystemConfig(ports=40, rho=0.9)
        rng = derive_rng(99, 0)
        channels = generate_scenario(rng, config)
        for _ in range(10):
            sol = random_solution(rng, 4, 2)
            start = int(rng.integers(40))
            j = int(rng.integers(2))
            best = select_er_port(j, sol, channels, config)
            assert eh_power_at_port(j, best, sol, channels, config) >= eh_power_at_port(
                j, start, sol, channels, config
            ) - 1e-12
            i = int(rng.integers(2))
            best = select_dr_port(i, sol, channels, config)
            assert sinr_at_port(i, best, sol, channels, config) >= sinr_at_port(
                i, start, sol, channels, config
            ) - 1e-12

    def test_tie_break_lowest_index(self):
        # identical columns (full correlation) tie on every port
        config = SystemConfig(ports=8, antenna_size=1e-9)
        channels = generate_scenario(derive_rng(100, 0), config)
        mu_cols = channels.dr_links[0].estimated.entries
        np.testing.assert_allclose(mu_cols[:, 0], mu_cols[:, 5], rtol=1e-6)
        sol = random_solution(derive_rng(100, 1), 4, 2)
        assert select_er_port(0, sol, channels, config) == 0
        assert select_dr_port(0, sol, channels, config) == 0

    def test_accepts_lifted_solution(self):
        # covariance blocks from the lifted solve select like their vectors
        from faidet.beamforming import P2Solution

        config = SystemConfig(ports=30)
        rng = derive_rng(101, 0)
        channels = generate_scenario(rng, config)
        sol = random_solution(rng, 4, 2)
        lifted = P2Solution(
            W_blocks=[np.outer(wi, wi.conj()) for wi in sol.w],
            V_E=sol.V_E,
            objective=0.0,
            rank_report=[0.0, 0.0, 0.0],
        )
        for j in range(2):
            assert select_er_port(j, lifted, channels, config) == select_er_port(
                j, sol, channels, config
            )
        for i in range(2):
            assert select_dr_port(i, lifted, channels, config) == select_dr_port(
                i, sol, channels, config
            )
