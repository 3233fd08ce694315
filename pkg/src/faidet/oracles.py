"""Independent reference routes used by the self-test suite and the tests.

Everything here deliberately re-derives a quantity the production code
computes another way: the special functions are re-summed in arbitrary
precision with a four-fold term budget, port selections are found by
exhaustively evaluating the per-port metrics, and the single-constraint
energy solve is checked against its eigenvalue closed form.  The arbitrary-
precision route is itself anchored to published table values of J1.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from . import sdp
from .channel import ChannelSet
from .sysmodel import BeamformingSolution, eh_power_at_port, sinr_at_port

ORACLE_DPS = 60
ORACLE_MAX_TERMS = 2000  # 4x the production budget

# Abramowitz & Stegun, Table 9.1 (15 significant digits and beyond)
PUBLISHED_J1 = {
    1.0: "0.44005058574493351596",
    2.0: "0.57672480775687338720",
}


def bessel_j1_reference(x: float, dps: int = ORACLE_DPS) -> float:
    """J1 by term-by-term extended-precision summation."""
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        if xm == 0:
            return 0.0
        total = mpmath.mpf(0)
        term = xm / 2
        q = -(xm * xm) / 4
        for k in range(ORACLE_MAX_TERMS):
            total += term
            term = term * q / ((k + 1) * (k + 2))
            if abs(term) < mpmath.mpf(10) ** (-(dps + 5)) * abs(total):
                return float(total)
    raise ArithmeticError(f"reference J1 summation did not converge at x={x}")


def hyp1f2_reference(a: float, b: float, c: float, z: float, dps: int = ORACLE_DPS) -> float:
    """1F2 by term-by-term extended-precision summation."""
    with mpmath.workdps(dps):
        am, bm, cm, zm = (mpmath.mpf(v) for v in (a, b, c, z))
        total = mpmath.mpf(0)
        term = mpmath.mpf(1)
        for k in range(ORACLE_MAX_TERMS):
            total += term
            term = term * zm * (am + k) / ((bm + k) * (cm + k) * (k + 1))
            if abs(term) < mpmath.mpf(10) ** (-(dps + 5)) * abs(total):
                return float(total)
    raise ArithmeticError(f"reference 1F2 summation did not converge at z={z}")


def port_correlation_reference(aperture: float, dps: int = ORACLE_DPS) -> float:
    """mu(W) composed from the two extended-precision series."""
    with mpmath.workdps(dps):
        w = mpmath.mpf(aperture)
        x = 2 * mpmath.pi * w
        f = _hyp1f2_mp(mpmath.mpf("0.5"), mpmath.mpf(1), mpmath.mpf("1.5"), -mpmath.pi**2 * w * w)
        radicand = f - _j1_mp(x) / x
        return float(mpmath.sqrt(2) * mpmath.sqrt(radicand))


def _j1_mp(x):
    total = mpmath.mpf(0)
    term = x / 2
    q = -(x * x) / 4
    for k in range(ORACLE_MAX_TERMS):
        total += term
        term = term * q / ((k + 1) * (k + 2))
        if abs(term) < mpmath.eps * abs(total) / 100:
            return total
    raise ArithmeticError("reference J1 summation did not converge")


def _hyp1f2_mp(a, b, c, z):
    total = mpmath.mpf(0)
    term = mpmath.mpf(1)
    for k in range(ORACLE_MAX_TERMS):
        total += term
        term = term * z * (a + k) / ((b + k) * (c + k) * (k + 1))
        if abs(term) < mpmath.eps * abs(total) / 100:
            return total
    raise ArithmeticError("reference 1F2 summation did not converge")


def brute_force_er_port(
    er_index: int, solution: BeamformingSolution, channels: ChannelSet, config
) -> int:
    """Exhaustive argmax of the harvested power over the selected ports."""
    best_port, best_value = None, -math.inf
    for port in channels.selected_ports:
        value = eh_power_at_port(er_index, port, solution, channels, config)
        if value > best_value:
            best_port, best_value = port, value
    return best_port


def brute_force_dr_port(
    dr_index: int, solution: BeamformingSolution, channels: ChannelSet, config
) -> int:
    """Exhaustive argmax of the SINR over the selected ports."""
    best_port, best_value = None, -math.inf
    for port in channels.selected_ports:
        value = sinr_at_port(dr_index, port, solution, channels, config)
        if value > best_value:
            best_port, best_value = port, value
    return best_port


def max_trace_closed_form(objective: np.ndarray, power: float) -> float:
    """Optimum of max tr(S X) s.t. tr(X) <= power, X PSD: power * lambda_max(S)."""
    return power * float(np.linalg.eigvalsh(objective)[-1])


def run_selftest(seed: int = 20240) -> list[tuple[str, bool, str]]:
    """Exercise the embedded oracles against the production paths."""
    from . import specfun
    from .channel import derive_rng, generate_scenario
    from .sysmodel import PortSelection, SystemConfig
    from . import portselect

    checks: list[tuple[str, bool, str]] = []

    for x, table in PUBLISHED_J1.items():
        ref = bessel_j1_reference(x)
        err = abs(ref - float(table))
        checks.append(
            (f"oracle J1({x:g}) vs published table", err < 1e-14, f"abs err {err:.2e}")
        )
    for w in (0.1, 0.25, 0.5, 1.0, 2.0, 5.0):
        ref = port_correlation_reference(w)
        got = specfun.port_correlation(w)
        rel = abs(got - ref) / ref
        checks.append(
            (f"port correlation at W={w:g} vs extended precision", rel < 1e-8, f"rel err {rel:.2e}")
        )

    config = SystemConfig(ports=40, antenna_size=0.5, rho=0.9, sinr_threshold=4.0)
    rng = derive_rng(seed, 0, 0)
    channels = generate_scenario(rng, config)
    gen = derive_rng(seed, 0, 1)
    ok_ports = True
    for _ in range(20):
        w = [
            gen.standard_normal(config.tx_antennas) + 1j * gen.standard_normal(config.tx_antennas)
            for _ in range(config.num_dr)
        ]
        a = gen.standard_normal((config.tx_antennas, config.tx_antennas)) + 1j * gen.standard_normal(
            (config.tx_antennas, config.tx_antennas)
        )
        solution = BeamformingSolution(w=w, V_E=a @ a.conj().T, v=None, objective=0.0)
        for j in range(config.num_er):
            if portselect.select_er_port(j, solution, channels, config) != brute_force_er_port(
                j, solution, channels, config
            ):
                ok_ports = False
        for i in range(config.num_dr):
            if portselect.select_dr_port(i, solution, channels, config) != brute_force_dr_port(
                i, solution, channels, config
            ):
                ok_ports = False
    checks.append(("closed-form port selection vs exhaustive scan", ok_ports, "20 instances"))

    gen = derive_rng(seed, 0, 2)
    worst = 0.0
    for _ in range(10):
        a = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
        s = a @ a.conj().T
        problem = sdp.SdpProblem(
            block_dims=[4],
            objective=[s],
            constraints=[
                sdp.SdpConstraint(coeffs=[np.eye(4, dtype=complex)], rhs=2.0, sense=sdp.LESS_EQUAL)
            ],
        )
        solved = sdp.solve(problem)
        expect = max_trace_closed_form(s, 2.0)
        worst = max(worst, abs(solved.objective - expect) / expect)
    checks.append(
        ("interior-point energy solve vs eigenvalue closed form", worst < 1e-6, f"rel err {worst:.2e}")
    )
    return checks
