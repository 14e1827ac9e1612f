"""Error terms for the calibration objectives: residuals, analytic
Jacobians, and weights.

Every Jacobian is taken with respect to the left-invariant perturbation
``T = T_bar @ exp(-hat(delta))`` (minus sign included), matching the state
update applied by the solver.  Velocity states perturb additively.
Jacobian blocks are keyed by StateId inside a FactorEvaluation; the G
blocks that map measurement noise into the residual are stashed in the
evaluation metadata so the covariance propagation is testable on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scene import Correspondence, ExtrinsicPrior, Submap, TimedPose
from .se3 import (
    Pose,
    adjoint,
    left_invariant_error,
    odot,
    se3_exp,
    se3_jacobian,
    se3_jacobian_inv,
    se3_log,
)

H_DEHOMOGENIZE = np.hstack([np.eye(3), np.zeros((3, 1))])


class SingularWeight(ValueError):
    """A factor's weight matrix could not be inverted (degenerate input)."""


class NonpositiveDt(ValueError):
    """Motion-prior factors require a strictly positive time increment."""


@dataclass(frozen=True)
class StateId:
    """Identifies one 6-dof block of the state vector."""

    kind: str  # extrinsic | submap_pose | vehicle_pose | velocity
    index: int


EXTRINSIC_ID = StateId("extrinsic", 0)


@dataclass
class FactorEvaluation:
    """One error term: residual e, weight (inverse covariance), and the
    Jacobian blocks of e with respect to each involved state."""

    residual: np.ndarray
    weight: np.ndarray
    jacobians: dict[StateId, np.ndarray]
    metadata: dict[str, np.ndarray] = field(default_factory=dict)

    def cost(self) -> float:
        return 0.5 * float(self.residual @ self.weight @ self.residual)


@dataclass(frozen=True)
class NoiseParams:
    """User-set covariance parameters for the motion-prior and submap factors."""

    wnoa_psd: np.ndarray  # 6x6, per unit time
    relpose_sigma: np.ndarray  # 6-vector of standard deviations
    submap_sigma_phi: float  # radians
    submap_sigma_rho: np.ndarray  # 3-vector, meters

    @staticmethod
    def default() -> "NoiseParams":
        return NoiseParams(
            wnoa_psd=np.diag([1e-4] * 3 + [1e-3] * 3),
            relpose_sigma=np.array([1e-3] * 3 + [5e-3] * 3),
            submap_sigma_phi=np.deg2rad(1.0),
            submap_sigma_rho=np.array([0.25, 0.25, 0.25]),
        )

    def submap_covariance(self) -> np.ndarray:
        return np.diag(
            [self.submap_sigma_phi**2] * 3 + list(np.asarray(self.submap_sigma_rho) ** 2)
        )


def _invert_weight(cov: np.ndarray) -> np.ndarray:
    """Symmetric PD inverse; raises SingularWeight instead of LinAlgError."""
    try:
        np.linalg.cholesky(cov)
        inv = np.linalg.inv(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularWeight(f"covariance not positive definite: {exc}") from exc
    return 0.5 * (inv + inv.T)


def propagate_point_covariance(
    g1: np.ndarray, g2: np.ndarray, r1: np.ndarray, r2: np.ndarray
) -> np.ndarray:
    """Reprojection-error covariance M = G1 R1 G1' + G2 R2 G2'."""
    m = g1 @ r1 @ g1.T + g2 @ r2 @ g2.T
    return 0.5 * (m + m.T)


def _homogeneous(point: np.ndarray) -> np.ndarray:
    return np.append(point, 1.0)


def _reprojection_terms(
    pose_a: Pose,
    offset_a: Pose,
    obs_point_a: np.ndarray,
    pose_b: Pose,
    offset_b: Pose,
    obs_point_b: np.ndarray,
    extrinsic: Pose,
):
    """Residual and raw blocks shared by both reprojection factors.

    pose is the design pose (vehicle or central submap pose), offset the
    rigid precomputed transform between it and the vehicle pose at the
    observation time (identity when the design pose is the vehicle pose).
    """
    u_a = _homogeneous(obs_point_a)
    u_b = _homogeneous(obs_point_b)
    chain_a = (pose_a @ offset_a @ extrinsic).matrix()
    chain_b = (pose_b @ offset_b @ extrinsic).matrix()
    residual = (chain_a @ u_a - chain_b @ u_b)[:3]

    # extrinsic block: H (Tb ofs_b Text ub_odot - Ta ofs_a Text ua_odot)
    jac_ext = (chain_b @ odot(u_b) - chain_a @ odot(u_a))[:3]
    # design-pose blocks: -/+ H (T (ofs Text u)_odot)
    w_a = (offset_a @ extrinsic).matrix() @ u_a
    w_b = (offset_b @ extrinsic).matrix() @ u_b
    jac_a = -(pose_a.matrix() @ odot(w_a))[:3]
    jac_b = (pose_b.matrix() @ odot(w_b))[:3]

    g1 = pose_a.rotation @ offset_a.rotation @ extrinsic.rotation
    g2 = -(pose_b.rotation @ offset_b.rotation @ extrinsic.rotation)
    return residual, jac_ext, jac_a, jac_b, g1, g2


def reprojection_fixed(
    corr: Correspondence,
    pose_a: Pose,
    pose_b: Pose,
    extrinsic: Pose,
    extrinsic_id: StateId = EXTRINSIC_ID,
) -> FactorEvaluation:
    """Reprojection error with the vehicle poses held fixed (Algorithm 1).

    pose_a/pose_b are the interpolated vehicle poses at the two observation
    times; the only design variable is the extrinsic.
    """
    identity = Pose.identity()
    residual, jac_ext, _, _, g1, g2 = _reprojection_terms(
        pose_a, identity, corr.obs_a.point_laser,
        pose_b, identity, corr.obs_b.point_laser,
        extrinsic,
    )
    m = propagate_point_covariance(g1, g2, corr.obs_a.covariance, corr.obs_b.covariance)
    return FactorEvaluation(
        residual=residual,
        weight=_invert_weight(m),
        jacobians={extrinsic_id: jac_ext},
        metadata={"G1": g1, "G2": g2, "M": m},
    )


def reprojection_submap(
    corr: Correspondence,
    sub_a: Submap,
    sub_b: Submap,
    extrinsic: Pose,
    central_a: Pose | None = None,
    central_b: Pose | None = None,
    extrinsic_id: StateId = EXTRINSIC_ID,
    pose_id_a: StateId | None = None,
    pose_id_b: StateId | None = None,
) -> FactorEvaluation:
    """Reprojection error over central submap poses and the extrinsic
    (Algorithm 2).

    The rigid offsets at the two observation times come from the submaps;
    central_a/central_b override the submaps' stored central poses with the
    current state estimates during optimization.
    """
    if corr.submap_a != sub_a.id or corr.submap_b != sub_b.id:
        raise ValueError("correspondence does not reference the given submaps")
    pose_a = central_a if central_a is not None else sub_a.central
    pose_b = central_b if central_b is not None else sub_b.central
    offset_a = sub_a.offsets[corr.obs_index_a]
    offset_b = sub_b.offsets[corr.obs_index_b]
    residual, jac_ext, jac_a, jac_b, g1, g2 = _reprojection_terms(
        pose_a, offset_a, corr.obs_a.point_laser,
        pose_b, offset_b, corr.obs_b.point_laser,
        extrinsic,
    )
    m = propagate_point_covariance(g1, g2, corr.obs_a.covariance, corr.obs_b.covariance)
    id_a = pose_id_a if pose_id_a is not None else StateId("submap_pose", sub_a.id)
    id_b = pose_id_b if pose_id_b is not None else StateId("submap_pose", sub_b.id)
    return FactorEvaluation(
        residual=residual,
        weight=_invert_weight(m),
        jacobians={extrinsic_id: jac_ext, id_a: jac_a, id_b: jac_b},
        metadata={"G1": g1, "G2": g2, "M": m},
    )


def _log_prior_evaluation(
    state: Pose, mean: Pose, covariance: np.ndarray, state_id: StateId
) -> FactorEvaluation:
    """Left-invariant pose prior e = log(T^-1 T_meas) shared by the
    extrinsic and pose priors.

    F = J_left(e)^-1 on the state; the measurement maps in through
    G = -J_right(e)^-1, giving weight (G Sigma G')^-1 = Jr' Sigma^-1 Jr.
    """
    residual = left_invariant_error(state, mean)
    jac_state = se3_jacobian_inv(residual, "left")
    jac_right_inv = se3_jacobian_inv(residual, "right")
    sigma_inv = _invert_weight(covariance)
    jr = np.linalg.inv(jac_right_inv)
    weight = jr.T @ sigma_inv @ jr
    return FactorEvaluation(
        residual=residual,
        weight=0.5 * (weight + weight.T),
        jacobians={state_id: jac_state},
        metadata={"G": -jac_right_inv},
    )


def extrinsic_prior(
    extrinsic: Pose,
    prior: ExtrinsicPrior,
    extrinsic_id: StateId = EXTRINSIC_ID,
) -> FactorEvaluation:
    """Tikhonov regularization term on the extrinsic."""
    return _log_prior_evaluation(extrinsic, prior.mean, prior.covariance(), extrinsic_id)


def pose_prior(
    pose: Pose, measured: TimedPose, state_id: StateId
) -> FactorEvaluation:
    """Prior pose error against one DVL-INS pose measurement."""
    return _log_prior_evaluation(pose, measured.pose, measured.covariance, state_id)


def wnoa_error(
    pose_km1: Pose,
    pose_k: Pose,
    omega_km1: np.ndarray,
    dt: float,
    psd: np.ndarray,
    id_km1: StateId,
    id_k: StateId,
    id_omega: StateId,
) -> FactorEvaluation:
    """White-noise-on-acceleration motion-prior error
    e = log(T_k^-1 (T_{k-1} exp(dt w))).

    The weight uses the first-order discretization Q_k = dt * psd; this is
    the single place to upgrade should the full WNOA covariance be needed.
    """
    if dt <= 0.0:
        raise NonpositiveDt(f"dt must be positive, got {dt}")
    omega_km1 = np.asarray(omega_km1, dtype=float)
    step = se3_exp(dt * omega_km1)
    residual = se3_log(_compose3(pose_k.inverse(), pose_km1, step))
    jl_inv = se3_jacobian_inv(residual, "left")
    jr_inv = se3_jacobian_inv(residual, "right")
    jac_k = jl_inv
    jac_km1 = -jr_inv @ adjoint(step.inverse())
    jac_omega = jr_inv @ se3_jacobian(dt * omega_km1, "right") * dt
    return FactorEvaluation(
        residual=residual,
        weight=_invert_weight(dt * np.asarray(psd, dtype=float)),
        jacobians={id_km1: jac_km1, id_k: jac_k, id_omega: jac_omega},
    )


def relative_pose_error(
    pose_km1: Pose,
    pose_k: Pose,
    meas_km1: Pose,
    meas_k: Pose,
    sigma: np.ndarray,
    id_km1: StateId,
    id_k: StateId,
) -> FactorEvaluation:
    """Relative pose error e = log(T_k^-1 (T_{k-1} Tm_{k-1}^-1 Tm_k))."""
    delta_meas = meas_km1.inverse() @ meas_k
    residual = se3_log(_compose3(pose_k.inverse(), pose_km1, delta_meas))
    jl_inv = se3_jacobian_inv(residual, "left")
    jr_inv = se3_jacobian_inv(residual, "right")
    jac_k = jl_inv
    jac_km1 = -jr_inv @ adjoint(delta_meas.inverse())
    sigma = np.asarray(sigma, dtype=float)
    return FactorEvaluation(
        residual=residual,
        weight=_invert_weight(np.diag(sigma**2)),
        jacobians={id_km1: jac_km1, id_k: jac_k},
    )


def apply_huber(evaluation: FactorEvaluation, delta: float) -> FactorEvaluation:
    """Optional robust reweighting for outlier experiments (off by default).

    Scales the weight by the Huber IRLS factor min(1, delta / ||e||_W)."""
    norm = np.sqrt(2.0 * evaluation.cost())
    if norm <= delta:
        return evaluation
    scale = delta / norm
    return FactorEvaluation(
        residual=evaluation.residual,
        weight=scale * evaluation.weight,
        jacobians=evaluation.jacobians,
        metadata=evaluation.metadata,
    )


def _compose3(a: Pose, b: Pose, c: Pose) -> Pose:
    return a @ (b @ c)
