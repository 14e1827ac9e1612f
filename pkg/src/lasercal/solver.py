"""Sparse on-manifold batch least squares.

Assembly builds the Gauss-Newton normal equations F' W F and gradient
F' W e from factor evaluations; the Levenberg-Marquardt loop damps with
lambda * diag(normal) (Marquardt scaling) so radian and meter blocks need
no manual balancing.  Pose blocks update multiplicatively as
T <- T exp(-hat(delta)) followed by rotation renormalization; velocity
blocks update additively.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .factors import FactorEvaluation, StateId
from .se3 import Pose, se3_exp

BLOCK = 6

# Dimension up to which the damped normal system is solved densely; larger
# systems go through sparse LU.
DENSE_SOLVE_LIMIT = 420

# Dimension up to which solve() computes the full-problem singular values
# for its report; the SVD is cubic and pointless on big trajectory chains.
OBSERVABILITY_DIM_LIMIT = 600

SINGULARITY_RATIO = 1e-8


class UnknownStateId(KeyError):
    """A factor references a state that is not in the ordering."""


class IndefiniteSystem(np.linalg.LinAlgError):
    """The damped normal system is not positive definite (rank deficiency)."""


class BlockMismatch(ValueError):
    """Increment length does not match the state ordering."""


class DivergenceDetected(RuntimeError):
    """Cost increased through ten consecutive damping escalations."""


@dataclass(frozen=True)
class StateVector:
    """Block state: extrinsic first, then poses in time order, then velocities."""

    entries: dict[StateId, Pose | np.ndarray]
    ordering: tuple[StateId, ...]

    def __post_init__(self):
        if set(self.ordering) != set(self.entries) or len(self.ordering) != len(
            self.entries
        ):
            raise ValueError("ordering must cover exactly the state entries")

    def offset_of(self, state_id: StateId) -> int:
        return BLOCK * self.ordering.index(state_id)

    @property
    def dim(self) -> int:
        return BLOCK * len(self.ordering)


@dataclass
class SolveReport:
    iterations: int
    initial_cost: float
    final_cost: float
    converged: bool
    singular_values: list[float] = field(default_factory=list)
    unobservable_directions: list[tuple[StateId, np.ndarray]] = field(
        default_factory=list
    )


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 100
    update_tol: float = 1e-8
    rel_cost_tol: float = 1e-10
    initial_damping: float = 1e-6
    damping_increase: float = 10.0
    damping_decrease: float = 3.0
    max_consecutive_rejects: int = 10
    # None = decide from problem size (full SVD only for small problems)
    compute_observability: bool | None = None


def _offsets(ordering: Sequence[StateId]) -> dict[StateId, int]:
    return {sid: BLOCK * i for i, sid in enumerate(ordering)}


def assemble(
    evaluations: Sequence[FactorEvaluation], ordering: Sequence[StateId]
) -> tuple[scipy.sparse.csr_matrix, np.ndarray, float]:
    """Normal matrix F'WF, gradient F'We, and cost 0.5 sum(e'We)."""
    offsets = _offsets(ordering)
    dim = BLOCK * len(ordering)
    gradient = np.zeros(dim)
    cost = 0.0
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    block_idx = np.arange(BLOCK)
    for ev in evaluations:
        weight = ev.weight
        we = weight @ ev.residual
        cost += 0.5 * float(ev.residual @ we)
        items = list(ev.jacobians.items())
        wj = []
        for sid, jac in items:
            if sid not in offsets:
                raise UnknownStateId(f"factor references unknown state {sid}")
            wj.append(weight @ jac)
        for (sid_i, jac_i), wj_i in zip(items, wj):
            gradient[offsets[sid_i] : offsets[sid_i] + BLOCK] += jac_i.T @ we
            for sid_j, jac_j in items:
                block = jac_i.T @ (weight @ jac_j)
                r = offsets[sid_i] + block_idx
                c = offsets[sid_j] + block_idx
                rows.append(np.repeat(r, BLOCK))
                cols.append(np.tile(c, BLOCK))
                vals.append(block.ravel())
    if rows:
        normal = scipy.sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
    else:
        normal = scipy.sparse.csr_matrix((dim, dim))
    return normal, gradient, cost


def step(
    normal: scipy.sparse.spmatrix, gradient: np.ndarray, damping: float = 0.0
) -> np.ndarray:
    """Solve (H + damping diag(H)) delta = -g.

    With zero damping this is the exact Gauss-Newton step.  Raises
    IndefiniteSystem when the damped system is not positive definite, which
    signals unresolved rank deficiency the caller must damp or regularize.
    """
    if damping < 0.0:
        raise ValueError("damping must be nonnegative")
    dim = gradient.shape[0]
    diag = np.asarray(normal.diagonal()).ravel()
    damped = normal + scipy.sparse.diags(damping * diag)
    if dim <= DENSE_SOLVE_LIMIT:
        dense = damped.toarray()
        try:
            chol = scipy.linalg.cho_factor(dense, lower=True)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise IndefiniteSystem(str(exc)) from exc
        return scipy.linalg.cho_solve(chol, -gradient)
    try:
        lu = scipy.sparse.linalg.splu(damped.tocsc())
        delta = lu.solve(-gradient)
    except RuntimeError as exc:
        raise IndefiniteSystem(str(exc)) from exc
    residual = damped @ delta + gradient
    scale = max(float(np.abs(gradient).max()), 1e-300)
    if not np.all(np.isfinite(delta)) or np.abs(residual).max() > 1e-6 * scale:
        raise IndefiniteSystem("sparse solve failed the residual check")
    return delta


def apply_update(states: StateVector, delta: np.ndarray) -> StateVector:
    """Multiplicative pose update T <- T exp(-hat(delta)), additive velocities."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (states.dim,):
        raise BlockMismatch(f"expected increment of length {states.dim}, got {delta.shape}")
    entries: dict[StateId, Pose | np.ndarray] = {}
    for i, sid in enumerate(states.ordering):
        block = delta[BLOCK * i : BLOCK * i + BLOCK]
        value = states.entries[sid]
        if isinstance(value, Pose):
            entries[sid] = (value @ se3_exp(-block)).renormalized()
        else:
            entries[sid] = value + block
    return StateVector(entries=entries, ordering=states.ordering)


def stack_weighted_jacobian(
    evaluations: Sequence[FactorEvaluation], ordering: Sequence[StateId]
) -> np.ndarray:
    """Dense stacked W^(1/2) F over all factors, for rank/SVD analysis."""
    offsets = _offsets(ordering)
    dim = BLOCK * len(ordering)
    n_rows = sum(ev.residual.shape[0] for ev in evaluations)
    out = np.zeros((n_rows, dim))
    row = 0
    for ev in evaluations:
        n = ev.residual.shape[0]
        vals, vecs = np.linalg.eigh(ev.weight)
        half = vecs @ np.diag(np.sqrt(np.maximum(vals, 0.0))) @ vecs.T
        for sid, jac in ev.jacobians.items():
            if sid not in offsets:
                raise UnknownStateId(f"factor references unknown state {sid}")
            out[row : row + n, offsets[sid] : offsets[sid] + BLOCK] = half @ jac
        row += n
    return out


def observability_report(
    matrix: np.ndarray,
    ordering: Sequence[StateId] | None = None,
    ratio_threshold: float = SINGULARITY_RATIO,
) -> tuple[list[float], list[tuple[StateId, np.ndarray]]]:
    """Singular values (descending) and near-null directions of a stacked
    Jacobian, or of a symmetric normal matrix (square symmetric input).

    Directions below ratio_threshold * sigma_max are reported with the
    state block holding most of their weight.
    """
    matrix = np.asarray(matrix, dtype=float)
    is_normal = (
        matrix.shape[0] == matrix.shape[1]
        and np.abs(matrix - matrix.T).max() <= 1e-9 * max(1.0, np.abs(matrix).max())
    )
    if is_normal:
        eigvals, eigvecs = np.linalg.eigh(matrix)
        order = np.argsort(eigvals)[::-1]
        singular = np.sqrt(np.maximum(eigvals[order], 0.0))
        directions = eigvecs[:, order].T
    else:
        _, singular, vt = np.linalg.svd(matrix)
        directions = vt
    sigma_max = singular[0] if len(singular) else 0.0
    unobservable: list[tuple[StateId, np.ndarray]] = []
    for sigma, direction in zip(singular, directions):
        if sigma_max == 0.0 or sigma / sigma_max < ratio_threshold:
            n_blocks = direction.shape[0] // BLOCK
            norms = [
                np.linalg.norm(direction[BLOCK * b : BLOCK * b + BLOCK])
                for b in range(n_blocks)
            ]
            b = int(np.argmax(norms))
            sid = ordering[b] if ordering is not None else StateId("block", b)
            unobservable.append((sid, direction[BLOCK * b : BLOCK * b + BLOCK].copy()))
    return [float(s) for s in singular], unobservable


def solve(
    problem: Callable[[StateVector], list[FactorEvaluation]],
    initial: StateVector,
    options: SolveOptions | None = None,
) -> tuple[StateVector, SolveReport]:
    """Levenberg-Marquardt over the factor closure.

    Terminates on max-norm of the update below update_tol, relative cost
    decrease below rel_cost_tol, or max_iterations.  Raises
    DivergenceDetected after max_consecutive_rejects damping escalations
    without an accepted step.
    """
    opts = options or SolveOptions()
    states = initial
    evaluations = problem(states)
    normal, gradient, cost = assemble(evaluations, states.ordering)
    initial_cost = cost
    damping = opts.initial_damping
    converged = False
    iterations = 0
    rejects = 0
    while iterations < opts.max_iterations:
        iterations += 1
        try:
            delta = step(normal, gradient, damping)
        except IndefiniteSystem:
            damping = max(damping, 1e-10) * opts.damping_increase
            rejects += 1
            if rejects >= opts.max_consecutive_rejects:
                raise
            continue
        if np.abs(delta).max() < opts.update_tol:
            converged = True
            break
        trial = apply_update(states, delta)
        trial_evaluations = problem(trial)
        trial_normal, trial_gradient, trial_cost = assemble(
            trial_evaluations, states.ordering
        )
        if trial_cost < cost:
            decrease = cost - trial_cost
            states = trial
            evaluations = trial_evaluations
            normal, gradient = trial_normal, trial_gradient
            cost = trial_cost
            damping /= opts.damping_decrease
            rejects = 0
            if decrease < opts.rel_cost_tol * max(cost, 1e-300):
                converged = True
                break
        else:
            damping = max(damping, 1e-10) * opts.damping_increase
            rejects += 1
            if rejects >= opts.max_consecutive_rejects:
                raise DivergenceDetected(
                    f"cost did not decrease over {rejects} consecutive escalations"
                )
    report = SolveReport(
        iterations=iterations,
        initial_cost=initial_cost,
        final_cost=cost,
        converged=converged,
    )
    do_svd = opts.compute_observability
    if do_svd is None:
        do_svd = states.dim <= OBSERVABILITY_DIM_LIMIT
    if do_svd:
        stacked = stack_weighted_jacobian(evaluations, states.ordering)
        report.singular_values, report.unobservable_directions = observability_report(
            stacked, states.ordering
        )
    return states, report
