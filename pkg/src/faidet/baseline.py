"""Fixed-position MIMO benchmark with the same physical antenna size.

Each receiver replaces its fluid antenna by a fixed half-wavelength array
packed into the same aperture: floor(2 W) + 1 elements.  Receive channels
are drawn i.i.d. (half-wavelength elements are approximately decorrelated;
the port-correlation construct does not apply), with the same pathloss and
imperfect-CSI model as the fluid-antenna links.

The benchmark alternates two steps until the harvested power converges:

  1. transmit covariance solve, where each DR appears through its combined
     effective channel H u (u the unit-norm receive combiner) and each ER
     element harvests independently (rectenna per element, no combining
     loss) -- realized by expanding every ER element into its own
     energy-collecting term;
  2. max-SINR combiner update per DR: the dominant generalized eigenvector
     of the signal covariance against the interference-plus-noise
     covariance at its array.

Both steps maximize their subproblem, so the objective is non-decreasing,
and the port count plays no role anywhere.  A one-element array reduces the
whole pipeline to the single-port fluid-antenna case.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import beamforming
from .ao import STATUS_CONVERGED, STATUS_INFEASIBLE, STATUS_MAX_ITERATIONS, AoResult
from .channel import (
    ChannelMatrix,
    ChannelSet,
    CsiPair,
    apply_imperfect_csi,
    generate_estimated_channel,
    pathloss,
)
from .sysmodel import PortSelection, SystemConfig


@dataclass(frozen=True)
class MimoConfig:
    """Receive array sizes derived from the aperture: floor(2 W) + 1 elements."""

    dr_elements: tuple[int, ...]
    er_elements: tuple[int, ...]

    @classmethod
    def from_system(cls, config: SystemConfig) -> "MimoConfig":
        return cls(
            dr_elements=tuple(
                int(math.floor(2.0 * config.dr_antenna_size(i))) + 1
                for i in range(config.num_dr)
            ),
            er_elements=tuple(
                int(math.floor(2.0 * config.er_antenna_size(j))) + 1
                for j in range(config.num_er)
            ),
        )


@dataclass(frozen=True)
class MimoChannels:
    """Per-link M x R matrices; columns are receive elements."""

    dr_links: tuple[CsiPair, ...]
    er_links: tuple[CsiPair, ...]


def mimo_scenario(rng: np.random.Generator, config: SystemConfig) -> MimoChannels:
    """Draw i.i.d. receive-array channels with the FA pathloss and CSI model."""
    config.validate()
    arrays = MimoConfig.from_system(config)
    gain_dr = pathloss(config.dr_distance_m, config.pathloss_exponent)
    gain_er = pathloss(config.er_distance_m, config.pathloss_exponent)
    streams = rng.spawn(2 * (config.num_dr + config.num_er))

    dr_links = []
    for i in range(config.num_dr):
        est = generate_estimated_channel(
            streams[2 * i], config.tx_antennas, arrays.dr_elements[i], 0.0, gain_dr
        )
        dr_links.append(apply_imperfect_csi(streams[2 * i + 1], est, config.dr_rho(i), gain_dr))
    base = 2 * config.num_dr
    er_links = []
    for j in range(config.num_er):
        est = generate_estimated_channel(
            streams[base + 2 * j], config.tx_antennas, arrays.er_elements[j], 0.0, gain_er
        )
        er_links.append(
            apply_imperfect_csi(streams[base + 2 * j + 1], est, config.er_rho(j), gain_er)
        )
    return MimoChannels(dr_links=tuple(dr_links), er_links=tuple(er_links))


def initial_combiners(channels: MimoChannels) -> list[np.ndarray]:
    """Unit-norm combiner capturing the most estimated channel energy per DR."""
    combiners = []
    for link in channels.dr_links:
        h = link.estimated.entries
        _, vec = np.linalg.eigh(h.conj().T @ h)
        combiners.append(vec[:, -1])
    return combiners


def update_combiner(
    dr_index: int,
    channels: MimoChannels,
    w_blocks: list[np.ndarray],
    v_e: np.ndarray,
    config: SystemConfig,
) -> np.ndarray:
    """Max-SINR combiner: dominant generalized eigenvector of signal vs noise."""
    link = channels.dr_links[dr_index]
    h = link.estimated.entries
    rho2 = link.rho**2
    total_power = sum(float(np.trace(b).real) for b in w_blocks) + float(np.trace(v_e).real)
    psi = sum(
        (b for k, b in enumerate(w_blocks) if k != dr_index), np.zeros_like(v_e)
    ) + v_e
    signal = h.conj().T @ w_blocks[dr_index] @ h
    floor = ((1.0 - rho2) * link.error_variance * total_power + config.dr_noise(dr_index)) / rho2
    clutter = h.conj().T @ psi @ h + floor * np.eye(h.shape[1])
    signal = 0.5 * (signal + signal.conj().T)
    clutter = 0.5 * (clutter + clutter.conj().T)
    _, vec = scipy.linalg.eigh(signal, clutter)
    u = vec[:, -1]
    return u / np.linalg.norm(u)


def _effective_scenario(
    channels: MimoChannels, combiners: list[np.ndarray], config: SystemConfig
) -> tuple[ChannelSet, SystemConfig, PortSelection]:
    """Single-port scenario equivalent to the current combiner choice.

    DR i contributes its combined column H_i u_i; every ER element becomes
    its own single-column energy collector with the parent's weight, which
    reproduces the element-wise (combining-free) harvest exactly.
    """
    dr_links = tuple(
        CsiPair(
            estimated=ChannelMatrix((link.estimated.entries @ u)[:, None]),
            true_channel=ChannelMatrix((link.true_channel.entries @ u)[:, None]),
            rho=link.rho,
            error_variance=link.error_variance,
        )
        for link, u in zip(channels.dr_links, combiners)
    )
    er_links = []
    beta = []
    rho_er = []
    for j, link in enumerate(channels.er_links):
        for r in range(link.estimated.entries.shape[1]):
            er_links.append(
                CsiPair(
                    estimated=ChannelMatrix(link.estimated.entries[:, r : r + 1]),
                    true_channel=ChannelMatrix(link.true_channel.entries[:, r : r + 1]),
                    rho=link.rho,
                    error_variance=link.error_variance,
                )
            )
            beta.append(config.er_beta(j))
            rho_er.append(link.rho)

    effective = ChannelSet(dr_links=dr_links, er_links=tuple(er_links), selected_ports=(0,))
    rho_all = tuple(config.dr_rho(i) for i in range(config.num_dr)) + tuple(rho_er)
    cfg = dataclasses.replace(
        config,
        ports=1,
        port_stride=1,
        num_er=len(er_links),
        energy_weight=tuple(beta) if beta else 0.0,
        rho=rho_all if rho_all else 1.0,
        antenna_size=1.0,
    )
    ports = PortSelection(dr_ports=(0,) * cfg.num_dr, er_ports=(0,) * cfg.num_er)
    return effective, cfg, ports


def mimo_optimize(channels: MimoChannels, config: SystemConfig) -> AoResult:
    """Alternate transmit solves and combiner updates until convergence."""
    config.validate()
    combiners = initial_combiners(channels)
    trace: list[float] = []
    status = STATUS_MAX_ITERATIONS
    best = None  # (solution, effective scenario, its config, its ports)
    for _ in range(config.max_ao_iterations):
        effective, cfg, ports = _effective_scenario(channels, combiners, config)
        try:
            p2 = beamforming.solve_p2(ports, effective, cfg)
        except beamforming.InfeasibleError:
            return AoResult(
                solution=None,
                ports=None,
                objective_trace=trace,
                iterations=len(trace) + 1,
                status=STATUS_INFEASIBLE,
            )
        if trace and p2.objective < trace[-1] - 1e-9:
            # both steps maximize their subproblems; a drop is numerical
            # trouble, so keep the previous iterate
            break
        trace.append(p2.objective)
        best = (p2, effective, cfg, ports)
        if config.num_dr == 0 or (
            len(trace) >= 2 and trace[-1] - trace[-2] <= config.ao_tolerance_w
        ):
            status = STATUS_CONVERGED
            break
        if len(trace) == config.max_ao_iterations:
            break
        combiners = [
            update_combiner(i, channels, p2.W_blocks, p2.V_E, config)
            for i in range(config.num_dr)
        ]
    p2, effective, cfg, ports = best
    solution = beamforming.recover_rank1(p2, ports, effective, cfg)
    return AoResult(
        solution=solution,
        ports=None,
        objective_trace=trace,
        iterations=len(trace),
        status=status,
    )


def mimo_benchmark(rng: np.random.Generator, config: SystemConfig) -> AoResult:
    """Generate a receive-array scenario and optimize it end to end."""
    return mimo_optimize(mimo_scenario(rng, config), config)
