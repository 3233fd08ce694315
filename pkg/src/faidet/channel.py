"""Correlated multi-port channel generation under imperfect CSI.

Each receiver carries one fluid antenna with N candidate ports along its
aperture.  The estimated channel entry between transmit antenna m and port n
is built from a shared reference component and a per-port component,

    h_hat[m, n] = sqrt(gain) * ( (sqrt(1 - mu^2) x_mn + mu x_m0)
                                + 1j (sqrt(1 - mu^2) y_mn + mu y_m0) ),

with all x, y i.i.d. real Gaussian of variance 1/2, so every entry has
complex variance `gain` (the large-scale pathloss) and any two ports of the
same transmit antenna have correlation coefficient mu^2.  The true channel
adds estimation error,

    h = rho * h_hat + sqrt(1 - rho^2) * delta,

where delta entries are complex Gaussian with variance equal to the link
pathloss.

Draw ordering is port-major and the reference components come first, so a
scenario with fewer ports consumes a strict prefix of the Gaussian stream of
a scenario with more ports.  Sweeps over the port count can therefore couple
their random numbers per trial (smaller-N scenarios are embedded in
larger-N ones).

Random streams are derived from a master seed through `SeedSequence` paths,
making every (trial, link, component) stream independent of generation
order and of the other streams' consumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import port_correlation

# stream-path constants for derived generators
STREAM_TRIAL = 1
STREAM_BASELINE = 2


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream at `path` under `master_seed`.

    Streams with different paths are statistically independent and do not
    depend on the order in which they are created.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, path)]))


@dataclass(frozen=True)
class ChannelMatrix:
    """M x N complex gains; row = transmit antenna, column = port."""

    entries: np.ndarray

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("channel matrix must be 2-D")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("channel matrix contains non-finite entries")

    @property
    def tx_antennas(self) -> int:
        return self.entries.shape[0]

    @property
    def ports(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class CsiPair:
    """Estimated channel, the true channel it estimates, and the error model."""

    estimated: ChannelMatrix
    true_channel: ChannelMatrix
    rho: float
    error_variance: float


@dataclass(frozen=True)
class ChannelSet:
    """All links of one scenario plus the subsampled port index set."""

    dr_links: tuple[CsiPair, ...]
    er_links: tuple[CsiPair, ...]
    selected_ports: tuple[int, ...]


def pathloss(distance_m: float, exponent: float) -> float:
    """Large-scale gain distance^-exponent, unit gain at the 1 m reference."""
    if not (distance_m >= 1.0):
        raise ValueError(f"distance must be >= 1 m (reference distance), got {distance_m}")
    if not (exponent > 0):
        raise ValueError(f"pathloss exponent must be > 0, got {exponent}")
    return float(distance_m) ** (-float(exponent))


def selected_port_indices(ports: int, stride: int) -> tuple[int, ...]:
    """Indices of the CSI-estimated ports: 0, stride, 2*stride, ... (0-based)."""
    if not (1 <= stride <= ports):
        raise ValueError(f"stride must lie in [1, {ports}], got {stride}")
    return tuple(range(0, ports, stride))


def generate_estimated_channel(
    rng: np.random.Generator, tx_antennas: int, ports: int, mu: float, link_gain: float
) -> ChannelMatrix:
    """Draw one estimated channel matrix with inter-port correlation mu.

    Parameters
    ----------
    rng : seeded generator; consumed in a documented order (reference
        components first, then per-port components port by port).
    tx_antennas, ports : matrix dimensions M, N.
    mu : port correlation coefficient in [0, 1].
    link_gain : large-scale pathloss scaling E|entry|^2.
    """
    if not (0.0 <= mu <= 1.0):
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if not (link_gain > 0):
        raise ValueError(f"link gain must be > 0, got {link_gain}")
    sigma = math.sqrt(0.5)
    ref = sigma * rng.standard_normal((tx_antennas, 2))
    per_port = sigma * rng.standard_normal((ports, tx_antennas, 2))
    mix = math.sqrt(1.0 - mu * mu)
    x = mix * per_port[:, :, 0].T + mu * ref[:, :1]
    y = mix * per_port[:, :, 1].T + mu * ref[:, 1:]
    return ChannelMatrix(math.sqrt(link_gain) * (x + 1j * y))


def apply_imperfect_csi(
    rng: np.random.Generator, estimated: ChannelMatrix, rho: float, error_variance: float
) -> CsiPair:
    """Draw the estimation error and combine it with the estimate.

    true = rho * estimated + sqrt(1 - rho^2) * delta, with delta entries
    complex Gaussian of variance `error_variance`.  Error draws are port-major
    like the estimate's.
    """
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if error_variance < 0:
        raise ValueError(f"error variance must be >= 0, got {error_variance}")
    m, n = estimated.entries.shape
    scale = math.sqrt(error_variance / 2.0)
    draws = scale * rng.standard_normal((n, m, 2))
    delta = draws[:, :, 0].T + 1j * draws[:, :, 1].T
    true = rho * estimated.entries + math.sqrt(1.0 - rho * rho) * delta
    return CsiPair(estimated, ChannelMatrix(true), float(rho), float(error_variance))


def generate_scenario(rng: np.random.Generator, config) -> ChannelSet:
    """Build the full ChannelSet for one trial of `config`.

    Per-link estimate and error streams are spawned from `rng` in a fixed
    order (DR links first, then ER links; estimate stream before error
    stream), so each link's draws are independent of every other link's and
    of the port count used elsewhere.
    """
    config.validate()
    gain_dr = pathloss(config.dr_distance_m, config.pathloss_exponent)
    gain_er = pathloss(config.er_distance_m, config.pathloss_exponent)
    streams = rng.spawn(2 * (config.num_dr + config.num_er))

    dr_links = []
    for i in range(config.num_dr):
        mu = port_correlation(config.dr_antenna_size(i))
        est = generate_estimated_channel(
            streams[2 * i], config.tx_antennas, config.ports, mu, gain_dr
        )
        dr_links.append(apply_imperfect_csi(streams[2 * i + 1], est, config.dr_rho(i), gain_dr))

    base = 2 * config.num_dr
    er_links = []
    for j in range(config.num_er):
        mu = port_correlation(config.er_antenna_size(j))
        est = generate_estimated_channel(
            streams[base + 2 * j], config.tx_antennas, config.ports, mu, gain_er
        )
        er_links.append(
            apply_imperfect_csi(streams[base + 2 * j + 1], est, config.er_rho(j), gain_er)
        )

    return ChannelSet(
        dr_links=tuple(dr_links),
        er_links=tuple(er_links),
        selected_ports=selected_port_indices(config.ports, config.port_stride),
    )
