"""Closed-form optimal port selection for fixed beamformers.

Port selections of different receivers decouple, so each reduces to an
argmax of a per-port score over the CSI-estimated port subset:

  * an ER maximizes diag(G^H Omega G) with Omega the total transmit
    covariance (all DR covariances plus the energy covariance) -- the
    variable part of its harvested power;
  * a DR maximizes diag(H^H W_i H) / (diag(H^H Psi H) + Z), the monotone
    rescaling of its SINR, with Psi the interference covariance and Z
    collecting the estimation-error and noise terms.

Only the diagonals are formed (cost O(N M^2) per receiver).  Ties break to
the lowest port index, matching the brute-force metric scan exactly.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .sysmodel import BeamformingSolution


def _covariances(solution) -> tuple[list[np.ndarray], np.ndarray]:
    """DR covariance blocks and energy covariance from either solution type."""
    if isinstance(solution, BeamformingSolution):
        return [np.outer(wi, wi.conj()) for wi in solution.w], solution.V_E
    return list(solution.W_blocks), solution.V_E


def _diag_quadratic(columns: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """diag(columns^H mat columns) for an M x K column stack."""
    return np.einsum("mk,mn,nk->k", columns.conj(), mat, columns).real


def select_er_port(er_index: int, solution, channels: ChannelSet, config) -> int:
    """Port maximizing ER `er_index`'s harvested power over the selected ports."""
    w_blocks, v_e = _covariances(solution)
    omega = sum(w_blocks, np.zeros_like(v_e)) + v_e
    sub = list(channels.selected_ports)
    g = channels.er_links[er_index].estimated.entries[:, sub]
    scores = _diag_quadratic(g, omega)
    return sub[int(np.argmax(scores))]


def select_dr_port(dr_index: int, solution, channels: ChannelSet, config) -> int:
    """Port maximizing DR `dr_index`'s SINR over the selected ports."""
    w_blocks, v_e = _covariances(solution)
    link = channels.dr_links[dr_index]
    rho2 = link.rho**2
    if rho2 == 0.0:
        raise ValueError("rho = 0 leaves the SINR undefined for port selection")
    psi = sum(
        (blk for k, blk in enumerate(w_blocks) if k != dr_index), np.zeros_like(v_e)
    ) + v_e
    total_power = sum(float(np.trace(blk).real) for blk in w_blocks) + float(
        np.trace(v_e).real
    )
    z = (1.0 - rho2) * link.error_variance * total_power / rho2 + config.dr_noise(
        dr_index
    ) / rho2

    sub = list(channels.selected_ports)
    h = link.estimated.entries[:, sub]
    num = _diag_quadratic(h, w_blocks[dr_index])
    den = _diag_quadratic(h, psi) + z
    return sub[int(np.argmax(num / den))]
