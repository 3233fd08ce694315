"""Fluid-antenna assisted integrated data and energy transfer.

Simulation of spatially correlated multi-port channels under imperfect CSI
and joint optimization of transmit beamforming (semidefinite relaxation)
with per-receiver port selection (closed-form argmax), alternating to a
stationary point, plus a fixed-array benchmark and a Monte-Carlo sweep
engine.
"""

from .ao import AoResult, initialize_ports, optimize
from .baseline import MimoConfig, mimo_benchmark
from .beamforming import InfeasibleError, P2Solution, recover_rank1, solve_p2
from .channel import ChannelSet, CsiPair, derive_rng, generate_scenario, pathloss
from .experiments import SweepSpec, SweepResult, emit_csv, run_sweep
from .portselect import select_dr_port, select_er_port
from .specfun import bessel_j1, hyp1f2, port_correlation
from .sysmodel import (
    BeamformingSolution,
    PortSelection,
    SystemConfig,
    eh_power_at_port,
    sinr_at_port,
    weighted_eh,
)

__version__ = "0.1.0"

__all__ = [
    "AoResult",
    "BeamformingSolution",
    "ChannelSet",
    "CsiPair",
    "InfeasibleError",
    "MimoConfig",
    "P2Solution",
    "PortSelection",
    "SweepResult",
    "SweepSpec",
    "SystemConfig",
    "bessel_j1",
    "derive_rng",
    "eh_power_at_port",
    "emit_csv",
    "generate_scenario",
    "hyp1f2",
    "initialize_ports",
    "mimo_benchmark",
    "optimize",
    "pathloss",
    "port_correlation",
    "recover_rank1",
    "run_sweep",
    "select_dr_port",
    "select_er_port",
    "sinr_at_port",
    "solve_p2",
    "weighted_eh",
]
