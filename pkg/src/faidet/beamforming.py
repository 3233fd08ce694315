"""Transmit covariance optimization for a fixed port selection.

With the active ports frozen, the weighted harvested power is maximized
over lifted beamforming variables: one PSD matrix per DR (the would-be
outer product w w^H) plus the aggregate energy covariance.  The lifted
SINR constraints are linear in these variables, so the relaxation is a
small dense SDP.  For this separable structure the optimum is attained at
rank-1 DR blocks and an energy covariance of rank at most 1, so dominant
eigenpairs recover beamforming vectors without any relaxation gap; the
recovery still verifies the rank profile and the SINR constraints rather
than assuming them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp
from .channel import ChannelSet
from .sysmodel import (
    BeamformingSolution,
    PortSelection,
    dr_leakage_matrix,
    dr_signal_matrix,
    energy_objective_matrix,
    sinr_at_port,
)

RANK_TOLERANCE = 1e-5
SINR_SLACK = 1e-6  # slack the recovered vectors are expected to satisfy
# relative violation that indicates an actual solver breakdown: beyond what
# finite solver precision can explain even against a noise-floor denominator
BREAKDOWN_SLACK = 1e-4


class InfeasibleError(Exception):
    """The SINR thresholds cannot be met at the given ports and power."""


class RecoveryError(Exception):
    """Solution violates the expected rank profile or a recovered constraint."""

    def __init__(self, message, spectra=None):
        super().__init__(message)
        self.spectra = spectra


@dataclass
class P2Solution:
    """Lifted solution: one PSD block per DR plus the energy covariance."""

    W_blocks: list[np.ndarray]
    V_E: np.ndarray
    objective: float
    rank_report: list[float]  # lambda2/lambda1 per DR block, then for V_E


def assemble_p2(ports: PortSelection, channels: ChannelSet, config) -> sdp.SdpProblem:
    """Build the lifted problem: blocks [W_1 .. W_KD, V_E], all M x M."""
    m = config.tx_antennas
    kd = config.num_dr
    s = energy_objective_matrix(ports, channels, config)
    blocks = kd + 1

    constraints = []
    for i in range(kd):
        f = dr_signal_matrix(i, ports, channels, config)
        d = dr_leakage_matrix(i, ports, channels, config)
        coeffs = [-d.copy() for _ in range(blocks)]
        coeffs[i] = f / config.dr_gamma(i)
        constraints.append(
            sdp.SdpConstraint(coeffs=coeffs, rhs=config.dr_noise(i), sense=sdp.GREATER_EQUAL)
        )
    constraints.append(
        sdp.SdpConstraint(
            coeffs=[np.eye(m, dtype=complex) for _ in range(blocks)],
            rhs=config.power_w,
            sense=sdp.LESS_EQUAL,
        )
    )
    return sdp.SdpProblem(
        block_dims=[m] * blocks,
        objective=[s.copy() for _ in range(blocks)],
        constraints=constraints,
    )


def _rank_ratio(mat: np.ndarray) -> float:
    eig = np.linalg.eigvalsh(mat)
    top = eig[-1]
    if top <= 1e-12 * max(1.0, abs(float(np.trace(mat).real))):
        return 0.0
    second = eig[-2] if eig.size > 1 else 0.0
    return max(second, 0.0) / top


def _hermitian_basis(r: int) -> list[np.ndarray]:
    basis = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(r):
        for j in range(i + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            basis.append(e)
    return basis


def reduce_rank(block: np.ndarray, functionals: list[np.ndarray], target_rank: int = 1) -> np.ndarray:
    """Move to an optimal point of rank <= target_rank without changing any functional.

    An interior-point solve lands at the analytic center of the optimal
    face, which can exceed the rank the separable structure admits.  Given
    the block and the coefficient matrices of every constraint acting on it,
    this walks along perturbations R D R^H (block = R R^H) whose constraint
    values all vanish -- such directions keep the full solution feasible and
    optimal for every step size that preserves positive semidefiniteness --
    and steps exactly far enough to annihilate one eigenvalue.  A nonzero
    direction exists whenever rank^2 exceeds the number of functionals.
    """
    scale = max(float(np.trace(block).real), 0.0)
    if scale <= 0.0:
        return block
    for _ in range(block.shape[0]):
        eigval, eigvec = np.linalg.eigh(block)
        keep = eigval > 1e-11 * eigval[-1]
        r = int(np.count_nonzero(keep))
        if r <= target_rank or r * r <= len(functionals):
            return block
        factor = eigvec[:, keep] * np.sqrt(eigval[keep])
        basis = _hermitian_basis(r)
        rows = []
        for a in functionals:
            m = factor.conj().T @ a @ factor
            rows.append([float(np.trace(m @ e).real) for e in basis])
        system = np.array(rows)
        _, sigma, vt = np.linalg.svd(system)
        null = vt[-1]
        if sigma.size and sigma[-1] > 1e-9 * sigma[0] and system.shape[0] >= system.shape[1]:
            return block  # no usable null direction
        direction = sum(c * e for c, e in zip(null, basis))
        dir_eig = np.linalg.eigvalsh(direction)
        pivot = dir_eig[np.argmax(np.abs(dir_eig))]
        if abs(pivot) < 1e-14:
            return block
        step = np.eye(r) - direction / pivot
        block = factor @ step @ factor.conj().T
        block = 0.5 * (block + block.conj().T)
    return block


def solve_p2(
    ports: PortSelection, channels: ChannelSet, config, tolerance: float = 3e-10
) -> P2Solution:
    """Solve the lifted problem; raises InfeasibleError on certified infeasibility.

    The tight default tolerance keeps the recovered vectors' constraint
    slack well inside the verification margin; if the interior point cannot
    reach it the solve is retried once at ten times the tolerance.
    """
    problem = assemble_p2(ports, channels, config)
    solution = sdp.solve(problem, tolerance=tolerance)
    if solution.status == "max_iterations":
        solution = sdp.solve(problem, tolerance=10.0 * tolerance)
    if solution.status == "infeasible":
        raise InfeasibleError(
            f"SINR thresholds infeasible at ports {ports} with power {config.power_w} W"
        )
    if solution.status != "optimal":
        # hard instances can diverge before certifying anything; settle the
        # question with the (always strictly feasible) slack problem
        if sdp.feasibility_slack(problem) > 1e-6:
            raise InfeasibleError(
                f"SINR thresholds infeasible at ports {ports} with power {config.power_w} W"
            )
        raise RuntimeError(
            f"SDP solve did not reach optimality (status={solution.status}, "
            f"residuals={solution.residuals})"
        )
    # blocks can sit on a non-unique optimal face with rank above the
    # admissible profile (most visibly when the objective is degenerate);
    # walk each one down to rank <= 1 along constraint-preserving directions
    w_blocks = [
        reduce_rank(block, [con.coeffs[i] for con in problem.constraints])
        for i, block in enumerate(solution.blocks[: config.num_dr])
    ]
    v_functionals = [con.coeffs[config.num_dr] for con in problem.constraints]
    v_e = reduce_rank(solution.blocks[config.num_dr], v_functionals)
    s = problem.objective[config.num_dr]
    objective = sum(float(np.trace(s @ b).real) for b in w_blocks)
    objective += float(np.trace(s @ v_e).real)
    report = [_rank_ratio(b) for b in w_blocks] + [_rank_ratio(v_e)]
    return P2Solution(W_blocks=w_blocks, V_E=v_e, objective=objective, rank_report=report)


def dominant_beamformer(block: np.ndarray) -> np.ndarray:
    """sqrt(lambda1) * u1 of a PSD block (the lifted vector, up to phase)."""
    eigval, eigvec = np.linalg.eigh(block)
    return np.sqrt(max(eigval[-1], 0.0)) * eigvec[:, -1]


def _refine_powers(
    w: list[np.ndarray], v_e: np.ndarray, ports: PortSelection, channels: ChannelSet, config
) -> tuple[list[np.ndarray], np.ndarray] | None:
    """Rebalance beam powers so near-active SINR constraints hold exactly.

    Dropping the sub-dominant eigenvalue mass and the solver's finite gap
    leave the recovered vectors an eps-scale distance off the constraint
    boundary, which matters when interference is nulled and the SINR
    denominator collapses to the noise floor.  Holding every direction
    fixed, the SINR constraints are linear in the per-beam power scalings,
    so the active ones can be re-solved exactly (with the total power held
    by scaling the energy covariance).  Returns None when no correction is
    needed or the correction would not be a small local adjustment.
    """
    kd = config.num_dr
    if kd == 0:
        return None
    probe = BeamformingSolution(w=w, V_E=v_e, v=None, objective=0.0)
    margins = sinr_margins(probe, ports, channels, config)
    active = [i for i in range(kd) if margins[i] < 1e-3]
    if not active:
        return None

    powers = np.array([float(np.vdot(wi, wi).real) for wi in w])
    t_v = float(np.trace(v_e).real)
    use_q = t_v > 1e-15 * max(1.0, config.power_w)
    total0 = float(powers.sum() + t_v)

    cross = np.empty((kd, kd))
    quad_v = np.empty(kd)
    for i in range(kd):
        h = channels.dr_links[i].estimated.entries[:, ports.dr_ports[i]]
        for k in range(kd):
            cross[i, k] = abs(np.vdot(h, w[k])) ** 2
        quad_v[i] = float(np.real(h.conj() @ v_e @ h))

    unknowns = list(active) + (["q"] if use_q else [])
    col = {u: idx for idx, u in enumerate(unknowns)}
    n = len(unknowns)
    mat = np.zeros((n, n))
    rhs = np.zeros(n)
    for row, i in enumerate(active):
        link = channels.dr_links[i]
        rho2 = link.rho**2
        err = (1.0 - rho2) * link.error_variance
        gamma = config.dr_gamma(i)
        rhs[row] = gamma * config.dr_noise(i)
        for k in range(kd):
            coeff = -gamma * (err * powers[k])
            if k == i:
                coeff += rho2 * cross[i, i]
            else:
                coeff += -gamma * rho2 * cross[i, k]
            if k in col:
                mat[row, col[k]] += coeff
            else:
                rhs[row] -= coeff  # inactive beams keep their power
        q_coeff = -gamma * (rho2 * quad_v[i] + err * t_v)
        if use_q:
            mat[row, col["q"]] += q_coeff
        else:
            rhs[row] -= q_coeff
    if use_q:
        row = n - 1
        for k in active:
            mat[row, col[k]] = powers[k]
        mat[row, col["q"]] = t_v
        rhs[row] = total0 - sum(powers[k] for k in range(kd) if k not in col)

    try:
        scale = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        return None
    factors = {u: scale[col[u]] for u in unknowns}
    if any(not (0.0 < f) or abs(f - 1.0) > 0.1 for f in factors.values()):
        return None

    new_w = [
        np.sqrt(factors[i]) * w[i] if i in factors else w[i].copy() for i in range(kd)
    ]
    new_v_e = factors["q"] * v_e if use_q else v_e
    new_total = sum(float(np.vdot(x, x).real) for x in new_w) + float(
        np.trace(new_v_e).real
    )
    if new_total > config.power_w * (1.0 + 1e-9):
        return None
    return new_w, new_v_e


def recover_rank1(
    p2: P2Solution,
    ports: PortSelection,
    channels: ChannelSet,
    config,
    rank_tolerance: float = RANK_TOLERANCE,
) -> BeamformingSolution:
    """Extract beamforming vectors from the lifted blocks and re-verify them.

    Each DR block must be numerically rank 1 (lambda2/lambda1 below
    `rank_tolerance`); the energy covariance may have rank 0 or 1 and is kept
    as a matrix either way.  Beam powers on active SINR constraints are then
    rebalanced onto the constraint boundary, and the result is checked
    against the per-port SINR expression; any remaining violation is solver
    trouble and raises.
    """
    bad = [r for r in p2.rank_report[: config.num_dr] if r > rank_tolerance]
    if bad or p2.rank_report[config.num_dr] > rank_tolerance:
        spectra = [np.linalg.eigvalsh(b) for b in p2.W_blocks] + [np.linalg.eigvalsh(p2.V_E)]
        raise RecoveryError(
            f"rank profile violated (ratios {p2.rank_report}); solver trouble", spectra
        )
    w = [dominant_beamformer(block) for block in p2.W_blocks]
    v_e = p2.V_E
    refined = _refine_powers(w, v_e, ports, channels, config)
    if refined is not None:
        w, v_e = refined
    v_scale = float(np.trace(v_e).real)
    v = dominant_beamformer(v_e) if v_scale > 1e-12 * max(1.0, config.power_w) else None

    recovered = BeamformingSolution(w=w, V_E=v_e, v=v, objective=p2.objective)
    margins = sinr_margins(recovered, ports, channels, config)
    if any(margin < -BREAKDOWN_SLACK for margin in margins):
        raise RecoveryError(
            f"recovered vectors violate SINR constraints (relative margins {margins})"
        )
    return recovered


def sinr_margins(
    solution: BeamformingSolution, ports: PortSelection, channels: ChannelSet, config
) -> list[float]:
    """Relative SINR slack (sinr/gamma - 1) per DR at its active port."""
    return [
        sinr_at_port(i, ports.dr_ports[i], solution, channels, config) / config.dr_gamma(i) - 1.0
        for i in range(config.num_dr)
    ]
