"""Scenario configuration and the core link metrics.

All quantities are linear (watts, linear SINR); dB/dBm conversion happens
only at the command-line boundary.  Metrics are evaluated on ESTIMATED
channels, with the estimation error entering as the additive expectation
terms (1 - rho^2) * sigma_err^2 * total transmit power; the optimizer never
sees the true channels.  `realized_weighted_eh` evaluates the harvested
power on the true channels for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelSet


def _broadcast(value, count, name) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * count
    out = tuple(float(v) for v in value)
    if len(out) != count:
        raise ValueError(f"{name} must be scalar or length {count}, got {len(out)} values")
    return out


@dataclass
class SystemConfig:
    """Every scenario parameter, in linear units.

    Per-receiver parameters (antenna_size, rho, noise_w, sinr_threshold,
    energy_weight) accept a scalar, broadcast to all receivers, or an
    explicit sequence.  Receiver ordering for antenna_size and rho is all
    DRs first, then all ERs.
    """

    tx_antennas: int = 4
    num_dr: int = 2
    num_er: int = 2
    ports: int = 200
    antenna_size: float | Sequence[float] = 0.5  # aperture in wavelengths, per receiver
    rho: float | Sequence[float] = 1.0  # CSI accuracy, per receiver
    power_w: float = 1.0
    noise_w: float | Sequence[float] = 1e-8  # per DR
    sinr_threshold: float | Sequence[float] = 10.0  # linear, per DR
    energy_weight: float | Sequence[float] = 1.0  # per ER
    dr_distance_m: float = 10.0
    er_distance_m: float = 3.0
    pathloss_exponent: float = 2.7
    port_stride: int = 1  # estimate CSI every `stride` ports
    max_ao_iterations: int = 30
    ao_tolerance_w: float = 1e-6

    _antenna_sizes: tuple[float, ...] = field(init=False, repr=False, default=())
    _rhos: tuple[float, ...] = field(init=False, repr=False, default=())
    _noise: tuple[float, ...] = field(init=False, repr=False, default=())
    _gamma: tuple[float, ...] = field(init=False, repr=False, default=())
    _beta: tuple[float, ...] = field(init=False, repr=False, default=())

    def __post_init__(self):
        receivers = self.num_dr + self.num_er
        self._antenna_sizes = _broadcast(self.antenna_size, receivers, "antenna_size")
        self._rhos = _broadcast(self.rho, receivers, "rho")
        self._noise = _broadcast(self.noise_w, self.num_dr, "noise_w")
        self._gamma = _broadcast(self.sinr_threshold, self.num_dr, "sinr_threshold")
        self._beta = _broadcast(self.energy_weight, self.num_er, "energy_weight")

    # per-receiver accessors (DRs indexed 0..num_dr-1, ERs 0..num_er-1)
    def dr_antenna_size(self, i: int) -> float:
        return self._antenna_sizes[i]

    def er_antenna_size(self, j: int) -> float:
        return self._antenna_sizes[self.num_dr + j]

    def dr_rho(self, i: int) -> float:
        return self._rhos[i]

    def er_rho(self, j: int) -> float:
        return self._rhos[self.num_dr + j]

    def dr_noise(self, i: int) -> float:
        return self._noise[i]

    def dr_gamma(self, i: int) -> float:
        return self._gamma[i]

    def er_beta(self, j: int) -> float:
        return self._beta[j]

    def validate(self) -> None:
        if self.tx_antennas < 1:
            raise ValueError("tx_antennas must be >= 1")
        if self.num_dr < 0 or self.num_er < 0 or self.num_dr + self.num_er == 0:
            raise ValueError("need at least one receiver")
        if self.ports < 1:
            raise ValueError("ports must be >= 1")
        if not (self.power_w > 0):
            raise ValueError("power_w must be > 0")
        if not (1 <= self.port_stride <= self.ports):
            raise ValueError(f"port_stride must lie in [1, {self.ports}]")
        if self.max_ao_iterations < 1:
            raise ValueError("max_ao_iterations must be >= 1")
        if self.ao_tolerance_w < 0:
            raise ValueError("ao_tolerance_w must be >= 0")
        for w in self._antenna_sizes:
            if not (w > 0):
                raise ValueError("antenna_size must be > 0")
        for r in self._rhos:
            if not (0.0 <= r <= 1.0):
                raise ValueError("rho must lie in [0, 1]")
        for i in range(self.num_dr):
            # rho = 0 makes the SINR identically zero and the port-selection
            # denominator singular; reject it up front
            if self.dr_rho(i) == 0.0:
                raise ValueError("rho must be > 0 for data receivers")
        for s in self._noise:
            if not (s > 0):
                raise ValueError("noise_w must be > 0")
        for g in self._gamma:
            if not (g > 0):
                raise ValueError("sinr_threshold must be > 0")
        for b in self._beta:
            if b < 0:
                raise ValueError("energy_weight must be >= 0")
        if not (self.dr_distance_m >= 1 and self.er_distance_m >= 1):
            raise ValueError("distances must be >= 1 m")
        if not (self.pathloss_exponent > 0):
            raise ValueError("pathloss_exponent must be > 0")


@dataclass(frozen=True)
class PortSelection:
    """Active port index per receiver (0-based column indices)."""

    dr_ports: tuple[int, ...]
    er_ports: tuple[int, ...]


@dataclass
class BeamformingSolution:
    """Information beamformers plus the aggregate energy covariance.

    w : list of K_D complex M-vectors.
    V_E : M x M Hermitian PSD aggregate energy covariance.
    v : dominant energy beamformer when V_E has (numerical) rank <= 1,
        else None.
    objective : weighted harvested power of the solve that produced this, W.
    """

    w: list[np.ndarray]
    V_E: np.ndarray
    v: np.ndarray | None
    objective: float


def total_transmit_power(solution: BeamformingSolution) -> float:
    return float(
        sum(np.vdot(wi, wi).real for wi in solution.w) + np.trace(solution.V_E).real
    )


def _quad(h: np.ndarray, mat: np.ndarray) -> float:
    return float(np.real(h.conj() @ mat @ h))


def sinr_at_port(
    dr_index: int, port: int, solution: BeamformingSolution, channels: ChannelSet, config
) -> float:
    """Receive SINR of one DR at one port, on estimated CSI (linear)."""
    link = channels.dr_links[dr_index]
    h = link.estimated.entries[:, port]
    if solution.w and solution.w[0].shape[0] != h.shape[0]:
        raise ValueError("beamformer dimension does not match channel")
    rho2 = link.rho**2
    ptot = total_transmit_power(solution)
    signal = rho2 * abs(np.vdot(h, solution.w[dr_index])) ** 2
    interference = sum(
        rho2 * abs(np.vdot(h, wk)) ** 2 for k, wk in enumerate(solution.w) if k != dr_index
    )
    interference += rho2 * _quad(h, solution.V_E)
    error = (1.0 - rho2) * link.error_variance * ptot
    return signal / (interference + error + config.dr_noise(dr_index))


def eh_power_at_port(
    er_index: int, port: int, solution: BeamformingSolution, channels: ChannelSet, config
) -> float:
    """Harvested power of one ER at one port, on estimated CSI (watts)."""
    link = channels.er_links[er_index]
    g = link.estimated.entries[:, port]
    if solution.w and solution.w[0].shape[0] != g.shape[0]:
        raise ValueError("beamformer dimension does not match channel")
    rho2 = link.rho**2
    ptot = total_transmit_power(solution)
    collected = sum(abs(np.vdot(g, wi)) ** 2 for wi in solution.w) + _quad(g, solution.V_E)
    return rho2 * collected + (1.0 - rho2) * link.error_variance * ptot


def weighted_eh(
    solution: BeamformingSolution, ports: PortSelection, channels: ChannelSet, config
) -> float:
    """Weighted harvested power over all ERs at their active ports (watts)."""
    return sum(
        config.er_beta(j) * eh_power_at_port(j, ports.er_ports[j], solution, channels, config)
        for j in range(config.num_er)
    )


def realized_weighted_eh(
    solution: BeamformingSolution, ports: PortSelection, channels: ChannelSet, config
) -> float:
    """Harvested power on the TRUE channels at the chosen ports (reporting only)."""
    total = 0.0
    for j in range(config.num_er):
        g = channels.er_links[j].true_channel.entries[:, ports.er_ports[j]]
        collected = sum(abs(np.vdot(g, wi)) ** 2 for wi in solution.w)
        collected += _quad(g, solution.V_E)
        total += config.er_beta(j) * collected
    return total


def energy_objective_matrix(ports: PortSelection, channels: ChannelSet, config) -> np.ndarray:
    """Weighted ER covariance S = sum_j beta_j (rho_j^2 g g^H + (1-rho_j^2) sigma_g^2 I).

    The weighted harvested power equals sum_i w_i^H S w_i + tr(S V_E); PSD
    whenever all weights are nonnegative.
    """
    m = config.tx_antennas
    s = np.zeros((m, m), dtype=complex)
    for j in range(config.num_er):
        link = channels.er_links[j]
        g = link.estimated.entries[:, ports.er_ports[j]]
        rho2 = link.rho**2
        s += config.er_beta(j) * (
            rho2 * np.outer(g, g.conj()) + (1.0 - rho2) * link.error_variance * np.eye(m)
        )
    return s


def dr_signal_matrix(dr_index: int, ports: PortSelection, channels: ChannelSet, config) -> np.ndarray:
    """Numerator-side matrix of DR i's lifted SINR constraint; may be indefinite.

    rho^2 h h^H - gamma (1 - rho^2) sigma_h^2 I with h the active-port column.
    """
    link = channels.dr_links[dr_index]
    h = link.estimated.entries[:, ports.dr_ports[dr_index]]
    rho2 = link.rho**2
    m = config.tx_antennas
    return rho2 * np.outer(h, h.conj()) - config.dr_gamma(dr_index) * (
        1.0 - rho2
    ) * link.error_variance * np.eye(m)


def dr_leakage_matrix(dr_index: int, ports: PortSelection, channels: ChannelSet, config) -> np.ndarray:
    """Interference-side matrix of DR i's lifted SINR constraint; PSD.

    rho^2 h h^H + (1 - rho^2) sigma_h^2 I.
    """
    link = channels.dr_links[dr_index]
    h = link.estimated.entries[:, ports.dr_ports[dr_index]]
    rho2 = link.rho**2
    m = config.tx_antennas
    return rho2 * np.outer(h, h.conj()) + (1.0 - rho2) * link.error_variance * np.eye(m)
