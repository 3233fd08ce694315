"""Small dense complex semidefinite programs in standard conic form.

Problems are stated over Hermitian PSD blocks X_1..X_B:

    maximize    sum_b tr(C_b X_b)
    subject to  sum_b tr(A_cb X_b)  <=/>=  rhs_c      for each constraint c
                X_b >= 0.

Complex Hermitian blocks are handled through the real embedding
R(Q) = [[Re Q, -Im Q], [Im Q, Re Q]]: R preserves PSD-ness and doubles
traces (tr(R(A) R(X)) = 2 tr(A X)), which the mapping compensates by
scaling right-hand sides.  The embedded problem is posed as the conic dual
of cvxopt's inequality-form SDP, whose interior-point solver returns our
block variables as its dual PSD multipliers together with certified
infeasibility detection.  Mapped-back blocks are re-projected onto the
Hermitian embedding structure, which removes the anti-structured component
the embedding leaves free.

cvxopt's interior point is deterministic, so identical problems produce
identical solutions.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers

LESS_EQUAL = "<="
GREATER_EQUAL = ">="

# residual thresholds for accepting an iterate as optimal
_ACCEPT_FEAS = 1e-7
_ACCEPT_GAP = 1e-7


@dataclass
class SdpConstraint:
    """sum_b tr(coeffs[b] X_b) sense rhs."""

    coeffs: list[np.ndarray]
    rhs: float
    sense: str = LESS_EQUAL


@dataclass
class SdpProblem:
    block_dims: list[int]
    objective: list[np.ndarray]  # maximize sum_b tr(objective[b] X_b)
    constraints: list[SdpConstraint]

    def validate(self) -> None:
        if len(self.objective) != len(self.block_dims):
            raise ValueError("objective must provide one matrix per block")
        for b, (dim, c) in enumerate(zip(self.block_dims, self.objective)):
            _require_hermitian(c, dim, f"objective[{b}]")
        if not self.constraints:
            raise ValueError("problem needs at least one constraint")
        bounded = False
        for idx, con in enumerate(self.constraints):
            if con.sense not in (LESS_EQUAL, GREATER_EQUAL):
                raise ValueError(f"constraint {idx}: unknown sense {con.sense!r}")
            if len(con.coeffs) != len(self.block_dims):
                raise ValueError(f"constraint {idx}: one coefficient matrix per block required")
            for b, (dim, a) in enumerate(zip(self.block_dims, con.coeffs)):
                _require_hermitian(a, dim, f"constraint[{idx}].coeffs[{b}]")
            if con.sense == LESS_EQUAL and all(
                np.linalg.eigvalsh(a)[0] > 0 for a in con.coeffs
            ):
                bounded = True
        if not bounded:
            raise ValueError(
                "no constraint bounds the feasible set "
                "(need a <= constraint with positive-definite coefficients on every block)"
            )


@dataclass
class Residuals:
    primal_feasibility: float  # worst relative constraint violation of the blocks
    dual_feasibility: float
    duality_gap: float  # relative


@dataclass
class SdpSolution:
    blocks: list[np.ndarray]
    objective: float
    status: str  # "optimal" | "infeasible" | "max_iterations"
    residuals: Residuals = field(
        default_factory=lambda: Residuals(np.inf, np.inf, np.inf)
    )


def _require_hermitian(mat: np.ndarray, dim: int, name: str) -> None:
    if mat.shape != (dim, dim):
        raise ValueError(f"{name}: expected shape {(dim, dim)}, got {mat.shape}")
    scale = max(np.abs(mat).max(), 1.0)
    if np.abs(mat - mat.conj().T).max() > 1e-10 * scale:
        raise ValueError(f"{name} is not Hermitian")


def _embed(q: np.ndarray) -> np.ndarray:
    return np.block([[q.real, -q.imag], [q.imag, q.real]])


def _unembed(y: np.ndarray, dim: int) -> np.ndarray:
    x = 0.5 * ((y[:dim, :dim] + y[dim:, dim:]) + 1j * (y[dim:, :dim] - y[:dim, dim:]))
    return 0.5 * (x + x.conj().T)


def _constraint_values(problem: SdpProblem, blocks: list[np.ndarray]) -> list[float]:
    return [
        sum(float(np.trace(a @ x).real) for a, x in zip(con.coeffs, blocks))
        for con in problem.constraints
    ]


def _worst_violation(problem: SdpProblem, blocks: list[np.ndarray]) -> float:
    worst = 0.0
    for con, value in zip(problem.constraints, _constraint_values(problem, blocks)):
        slack = con.rhs - value if con.sense == LESS_EQUAL else value - con.rhs
        worst = max(worst, -slack / max(1.0, abs(con.rhs)))
    for x in blocks:
        scale = max(float(np.trace(x).real), 1e-12)
        lam_min = float(np.linalg.eigvalsh(x)[0])
        worst = max(worst, -lam_min / scale)
    return worst


def solve(problem: SdpProblem, tolerance: float = 1e-8, max_iterations: int = 100) -> SdpSolution:
    """Interior-point solve; never returns a silently wrong answer.

    Returns status "optimal" with residual-certified blocks, "infeasible"
    with cvxopt's infeasibility certificate detected, or "max_iterations"
    carrying the best iterate and its residuals.
    """
    problem.validate()
    dims = problem.block_dims
    n_cons = len(problem.constraints)

    # our problem is the conic dual of:  min u'x  s.t. x >= 0,
    #   sum_c x_c A_cb >= C_b per block  (cvxopt inequality form).
    # Rows are equilibrated to unit coefficient norm, which only rescales
    # the x-form variables; the recovered blocks are unaffected, but badly
    # mixed constraint scales would otherwise starve small-rhs rows of
    # feasibility resolution.
    u = np.empty(n_cons)
    sign = np.empty(n_cons)
    row_scale = np.empty(n_cons)
    for c, con in enumerate(problem.constraints):
        sign[c] = 1.0 if con.sense == LESS_EQUAL else -1.0
        row_scale[c] = max(max(np.linalg.norm(a) for a in con.coeffs), 1e-300)
        u[c] = 2.0 * sign[c] * con.rhs / row_scale[c]  # x2: embedded traces double

    gs, hs = [], []
    for b, dim in enumerate(dims):
        n_emb = 2 * dim
        cols = np.empty((n_emb * n_emb, n_cons))
        for c, con in enumerate(problem.constraints):
            cols[:, c] = -_embed(sign[c] * con.coeffs[b] / row_scale[c]).reshape(-1, order="F")
        gs.append(cvx_matrix(cols))
        hs.append(cvx_matrix(-_embed(problem.objective[b])))

    options = {
        "show_progress": False,
        "maxiters": int(max_iterations),
        "abstol": tolerance,
        "reltol": tolerance,
        # below 1e-9 the scaling updates break down on these problem sizes
        "feastol": max(min(tolerance, 1e-8), 1e-9),
    }
    try:
        sol = cvx_solvers.sdp(
            cvx_matrix(u),
            Gl=cvx_matrix(-np.eye(n_cons)),
            hl=cvx_matrix(np.zeros(n_cons)),
            Gs=gs,
            hs=hs,
            options=options,
        )
    except (ZeroDivisionError, ArithmeticError, ValueError):
        return SdpSolution(
            blocks=[np.zeros((d, d), dtype=complex) for d in dims],
            objective=float("nan"),
            status="max_iterations",
            residuals=Residuals(np.inf, np.inf, np.inf),
        )

    status = sol["status"]
    if status == "dual infeasible":
        # certificate that no PSD blocks satisfy the constraints
        return SdpSolution(
            blocks=[np.zeros((d, d), dtype=complex) for d in dims],
            objective=float("nan"),
            status="infeasible",
            residuals=Residuals(np.inf, 0.0, np.inf),
        )
    if status == "primal infeasible" or sol["zs"] is None:
        # cannot happen for a validated (bounded) problem; surface as breakdown
        return SdpSolution(
            blocks=[np.zeros((d, d), dtype=complex) for d in dims],
            objective=float("nan"),
            status="max_iterations",
            residuals=Residuals(np.inf, np.inf, np.inf),
        )

    blocks = [_unembed(np.array(sol["zs"][b]), dim) for b, dim in enumerate(dims)]
    objective = sum(
        float(np.trace(c @ x).real) for c, x in zip(problem.objective, blocks)
    )

    # cvxopt's relative gap is meaningless when the objective is ~0 (pure
    # feasibility); take the better of it and the absolute gap on a unit scale
    candidates = []
    if sol["relative gap"] is not None:
        candidates.append(abs(float(sol["relative gap"])))
    if sol["gap"] is not None:
        candidates.append(float(sol["gap"]) / max(1.0, abs(objective)))
    gap_measure = min(candidates) if candidates else np.inf
    dual_feas = sol["primal infeasibility"]
    residuals = Residuals(
        primal_feasibility=_worst_violation(problem, blocks),
        dual_feasibility=np.inf if dual_feas is None else float(dual_feas),
        duality_gap=gap_measure,
    )
    # all three residuals must clear: diverged runs can leave a plausible
    # block iterate and a meaningless gap while the solver-side residual
    # screams (observed: gap ~1e-16 with solver residual ~1)
    ok = (
        residuals.primal_feasibility <= _ACCEPT_FEAS
        and residuals.dual_feasibility <= _ACCEPT_FEAS
        and residuals.duality_gap <= _ACCEPT_GAP
    )
    return SdpSolution(
        blocks=blocks,
        objective=objective,
        status="optimal" if ok else "max_iterations",
        residuals=residuals,
    )


def feasibility_slack(problem: SdpProblem, tolerance: float = 1e-8) -> float:
    """Minimal uniform relaxation of the >= rows that admits a feasible point.

    Adds a scalar slack block t >= 0 relaxing every >= constraint c to
    rhs_c - t * |rhs_c| (a vanishing epsilon of t also enters the bounding
    <= row so the augmented set stays bounded).  The augmented problem is
    strictly feasible by construction, so the interior point classifies it
    reliably even when the original problem diverges; a result of ~0 means
    the original constraints are satisfiable, anything substantially
    positive certifies how far from satisfiable they are.
    """
    problem.validate()
    slack_dim = problem.block_dims + [1]
    objective = [np.zeros((d, d), dtype=complex) for d in problem.block_dims]
    objective.append(np.array([[-1.0]], dtype=complex))

    constraints = []
    for con in problem.constraints:
        if con.sense == GREATER_EQUAL:
            scale = max(abs(con.rhs), 1e-9 * max(np.linalg.norm(a) for a in con.coeffs))
            t_coeff = np.array([[scale]], dtype=complex)
        else:
            t_coeff = np.array([[1e-9 * max(abs(con.rhs), 1.0)]], dtype=complex)
        constraints.append(
            SdpConstraint(coeffs=[a.copy() for a in con.coeffs] + [t_coeff],
                          rhs=con.rhs, sense=con.sense)
        )
    augmented = SdpProblem(block_dims=slack_dim, objective=objective, constraints=constraints)
    solution = solve(augmented, tolerance=tolerance)
    if solution.status != "optimal":
        return float("inf")
    return max(-solution.objective, 0.0)


def dump(problem: SdpProblem, path: str) -> None:
    """Plain-text dump for offline cross-checking with an external solver.

    Format: `blocks` line with dimensions; one `objective <b>` section and
    one `constraint <c> <sense> <rhs>` section per entry, each followed by
    the matrix rows as whitespace-separated `re+imj` values.
    """
    with open(path, "w") as fh:
        fh.write("blocks " + " ".join(str(d) for d in problem.block_dims) + "\n")
        for b, c in enumerate(problem.objective):
            fh.write(f"objective {b}\n")
            _write_matrix(fh, c)
        for idx, con in enumerate(problem.constraints):
            fh.write(f"constraint {idx} {con.sense} {con.rhs!r}\n")
            for b, a in enumerate(con.coeffs):
                fh.write(f"block {b}\n")
                _write_matrix(fh, a)


def _write_matrix(fh: io.TextIOBase, mat: np.ndarray) -> None:
    for row in np.atleast_2d(mat):
        fh.write(" ".join(f"{v.real!r}{v.imag:+}j" for v in row) + "\n")
