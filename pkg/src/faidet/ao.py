"""Alternating optimization: covariance solves interleaved with port updates.

Each round solves the transmit problem at the current ports, then moves
every receiver to its closed-form best port under the new covariances.
Both steps maximize their own subproblem with the other variables held
fixed, so the weighted harvested power is non-decreasing along the run; the
loop stops once the improvement falls below the configured tolerance or the
iteration cap is hit.  Beamforming vectors are extracted from the final
covariances only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import beamforming, portselect
from .channel import ChannelSet
from .sysmodel import BeamformingSolution, PortSelection

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_INFEASIBLE = "infeasible"


@dataclass
class AoResult:
    solution: BeamformingSolution | None
    ports: PortSelection | None
    objective_trace: list[float]
    iterations: int
    status: str


def initialize_ports(channels: ChannelSet, config) -> PortSelection:
    """Start every receiver at its strongest estimated port (largest column norm)."""
    sub = list(channels.selected_ports)

    def best(link):
        norms = np.sum(np.abs(link.estimated.entries[:, sub]) ** 2, axis=0)
        return sub[int(np.argmax(norms))]

    return PortSelection(
        dr_ports=tuple(best(channels.dr_links[i]) for i in range(config.num_dr)),
        er_ports=tuple(best(channels.er_links[j]) for j in range(config.num_er)),
    )


def update_ports(p2: beamforming.P2Solution, channels: ChannelSet, config) -> PortSelection:
    """Closed-form best port per receiver under the given covariances."""
    return PortSelection(
        dr_ports=tuple(
            portselect.select_dr_port(i, p2, channels, config) for i in range(config.num_dr)
        ),
        er_ports=tuple(
            portselect.select_er_port(j, p2, channels, config) for j in range(config.num_er)
        ),
    )


def optimize(channels: ChannelSet, config) -> AoResult:
    """Run the alternating loop to convergence; see module docstring."""
    config.validate()
    ports = initialize_ports(channels, config)
    trace: list[float] = []
    status = STATUS_MAX_ITERATIONS
    best = None  # (covariance solution, the ports it was solved at)
    for _ in range(config.max_ao_iterations):
        try:
            p2 = beamforming.solve_p2(ports, channels, config)
        except beamforming.InfeasibleError:
            return AoResult(
                solution=None,
                ports=ports,
                objective_trace=trace,
                iterations=len(trace) + 1,
                status=STATUS_INFEASIBLE,
            )
        if trace and p2.objective < trace[-1] - 1e-9:
            # each step maximizes its subproblem, so a drop is numerical
            # trouble; keep the previous iterate
            break
        trace.append(p2.objective)
        best = (p2, ports)
        if len(trace) >= 2 and trace[-1] - trace[-2] <= config.ao_tolerance_w:
            status = STATUS_CONVERGED
            break
        if len(trace) == config.max_ao_iterations:
            break
        new_ports = update_ports(p2, channels, config)
        if new_ports == ports:
            # re-solving an identical problem cannot improve the objective
            status = STATUS_CONVERGED
            break
        ports = new_ports
    p2, ports = best
    solution = beamforming.recover_rank1(p2, ports, channels, config)
    return AoResult(
        solution=solution,
        ports=ports,
        objective_trace=trace,
        iterations=len(trace),
        status=status,
    )
