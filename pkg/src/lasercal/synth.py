"""Seeded generator of ground-truth patch-test scenarios.

Replaces the field keypoint front end with synthetic correspondences built
by construction: a cross-hatch of lawnmower passes sweeps a gently
undulating keypoint field, each keypoint is observed where the scanner's
swath covers it, and correspondences are formed from ground-truth keypoint
identity.  Everything is a pure function of (inputs, seed).

Planar motion is strictly yaw-only (zero roll and pitch, depth still
varying) so the low-observability direction of the extrinsic problem is
exactly null; excited motion adds sinusoidal roll/pitch at a configurable
amplitude.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.stats

from .factors import NoiseParams, _reprojection_terms
from .scene import (
    Correspondence,
    ExtrinsicPrior,
    KeypointObservation,
    Submap,
    TimedPose,
    Trajectory,
    build_submap,
    interpolate_trajectory,
    trajectory_crossings,
)
from .se3 import Pose, se3_exp

SWATH_HALF_ANGLE = math.radians(25.0)  # beam angle of 50 degrees
GATE_CONFIDENCE = 0.999

# Laser mounted looking straight down: ENU laser frame to NED body frame.
ENU_TO_NED = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])

# Covariance floor keeping generator-emitted pose covariances invertible on
# drift-free scenarios.
POSE_SIGMA_FLOOR = 1e-6


class InfeasibleSpec(ValueError):
    """Scenario geometry cannot provide enough shared keypoints."""


def default_true_extrinsic() -> Pose:
    """Down-looking scanner 0.80 m behind the INS along the vehicle axis."""
    return Pose(ENU_TO_NED.copy(), np.array([-0.80, 0.0, 0.0]))


@dataclass(frozen=True)
class ScenarioSpec:
    """All knobs of one synthetic calibration scenario."""

    seed: int
    n_submaps: int = 8
    keypoints_per_pair: int = 30
    texture_keypoints: int = 60
    motion: str = "excited"  # "planar" | "excited"
    excitation_amplitude: float = math.radians(10.0)
    true_extrinsic: Pose = field(default_factory=default_true_extrinsic)
    prior_offset: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prior_sigma_phi: float = math.radians(1.0)
    prior_sigma_rho: float = 0.05
    global_drift_rot: float = 0.0  # radians per submap
    global_drift_trans: float = 0.0  # meters per submap
    local_drift_rot: float = 0.0  # radians per step
    local_drift_trans: float = 0.0  # meters per step
    point_noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    # geometry
    altitude: float = 5.0
    half_length: float = 8.0
    lane_span: float = 1.2
    speed: float = 0.5
    pose_rate: float = 1.0
    depth_amplitude: float = 0.5
    surface_amplitude: float = 0.3
    min_keypoint_spacing: float = 0.15

    def __post_init__(self):
        if self.n_submaps < 2:
            raise ValueError("need at least 2 submaps")
        if not 0.0 <= self.outlier_fraction < 0.5:
            raise ValueError("outlier_fraction must be in [0, 0.5)")
        for name in (
            "global_drift_rot", "global_drift_trans", "local_drift_rot",
            "local_drift_trans", "point_noise_sigma",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.motion not in ("planar", "excited"):
            raise ValueError(f"unknown motion kind {self.motion!r}")
        object.__setattr__(
            self, "prior_offset", np.asarray(self.prior_offset, dtype=float)
        )


@dataclass(frozen=True)
class GroundTruth:
    """Everything the generator knows that an estimator must not see."""

    extrinsic: Pose
    trajectories: tuple[Trajectory, ...]
    keypoints: np.ndarray  # (n, 3) world positions
    observation_keypoints: tuple[tuple[int, ...], ...]  # per submap, per obs
    outlier_labels: tuple[bool, ...] = ()
    pregate_count: int = 0
    survivor_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class Scenario:
    """One complete calibration problem instance."""

    spec: ScenarioSpec
    submaps: tuple[Submap, ...]
    correspondences: tuple[Correspondence, ...]
    prior: ExtrinsicPrior
    noise: NoiseParams
    ground_truth: GroundTruth

    @property
    def dvlins_measurements(self) -> tuple[Trajectory, ...]:
        """The measured (possibly drifted) trajectory of each submap."""
        return tuple(sm.trajectory for sm in self.submaps)


def random_unit_twist(rng: np.random.Generator, rot_mag: float, trans_mag: float) -> np.ndarray:
    """Twist with uniformly random directions and the given block magnitudes."""

    def unit(v):
        n = np.linalg.norm(v)
        return v / n if n > 0 else np.array([1.0, 0.0, 0.0])

    return np.concatenate(
        [rot_mag * unit(rng.normal(size=3)), trans_mag * unit(rng.normal(size=3))]
    )


def offset_twist(seed: int, rot_mag: float, trans_mag: float) -> np.ndarray:
    """Deterministic random-direction twist, e.g. for prior offsets."""
    return random_unit_twist(np.random.default_rng([seed, 77]), rot_mag, trans_mag)


def _pass_layout(spec: ScenarioSpec):
    """Directions, lane offsets, and time windows of the cross-hatch passes."""
    n_x = (spec.n_submaps + 1) // 2
    n_y = spec.n_submaps - n_x
    lanes_x = np.linspace(-spec.lane_span, spec.lane_span, n_x) if n_x > 1 else np.zeros(1)
    lanes_y = np.linspace(-spec.lane_span, spec.lane_span, n_y) if n_y > 1 else np.zeros(max(n_y, 0))
    passes = []
    for i in range(n_x):
        sign = 1.0 if i % 2 == 0 else -1.0
        passes.append(("x", sign, float(lanes_x[i])))
    for i in range(n_y):
        sign = 1.0 if i % 2 == 0 else -1.0
        passes.append(("y", sign, float(lanes_y[i])))
    return passes, lanes_x, lanes_y


def _surface_height(spec: ScenarioSpec, xy: np.ndarray) -> np.ndarray:
    wavelen = 3.0
    return spec.altitude + spec.surface_amplitude * np.sin(
        2.0 * math.pi * xy[..., 0] / wavelen
    ) * np.cos(2.0 * math.pi * xy[..., 1] / wavelen)


def _sample_spaced(
    rng: np.random.Generator,
    count: int,
    lo: np.ndarray,
    hi: np.ndarray,
    existing: list[np.ndarray],
    spacing: float,
) -> list[np.ndarray]:
    """Rejection-sample points in a box at a minimum mutual spacing."""
    points: list[np.ndarray] = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 20000:
            raise InfeasibleSpec(
                f"cannot place {count} keypoints at spacing {spacing} in box {lo}..{hi}"
            )
        cand = rng.uniform(lo, hi)
        ok = all(np.linalg.norm(cand - p) >= spacing for p in existing + points)
        if ok:
            points.append(cand)
    return points


def _keypoint_field(spec: ScenarioSpec, lanes_x, lanes_y) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 11])
    swath = spec.altitude * math.tan(SWATH_HALF_ANGLE)
    usable = 0.72 * swath  # slack for roll excitation and depth variation
    # box every pass can see: lateral coordinates pinched by the outer lanes
    y_lo, y_hi = lanes_x.max() - usable, lanes_x.min() + usable
    if len(lanes_y):
        x_lo, x_hi = lanes_y.max() - usable, lanes_y.min() + usable
    else:
        x_lo, x_hi = -0.8 * spec.half_length, 0.8 * spec.half_length
    if y_lo >= y_hi or x_lo >= x_hi:
        raise InfeasibleSpec("lanes too far apart for a common visibility zone")
    shared = _sample_spaced(
        rng,
        spec.keypoints_per_pair,
        np.array([x_lo, y_lo]),
        np.array([x_hi, y_hi]),
        [],
        spec.min_keypoint_spacing,
    )
    # texture keypoints over the swept strips, for map density
    strip = 0.85 * spec.half_length
    width = spec.lane_span + usable
    texture: list[np.ndarray] = []
    for k in range(spec.texture_keypoints):
        for _ in range(2000):
            if len(lanes_y) == 0 or k % 2 == 0:
                cand = rng.uniform([-strip, -width], [strip, width])
            else:
                cand = rng.uniform([-width, -strip], [width, strip])
            if all(
                np.linalg.norm(cand - p) >= spec.min_keypoint_spacing
                for p in shared + texture
            ):
                texture.append(cand)
                break
    xy = np.array(shared + texture)
    z = _surface_height(spec, xy)
    return np.column_stack([xy, z])


def _true_trajectory(spec: ScenarioSpec, index: int, axis: str, sign: float, lane: float) -> Trajectory:
    rng = np.random.default_rng([spec.seed, 23, index])
    duration = 2.0 * spec.half_length / spec.speed
    t0 = index * (duration + 5.0)
    n_knots = int(round(duration * spec.pose_rate)) + 1
    times = t0 + np.arange(n_knots) / spec.pose_rate
    s = -spec.half_length + spec.speed * (times - t0)
    phase_z, phase_r, phase_p = rng.uniform(0.0, 2.0 * math.pi, size=3)
    depth = spec.depth_amplitude * np.sin(2.0 * math.pi * (times - t0) / 11.0 + phase_z)
    if spec.motion == "excited":
        roll = spec.excitation_amplitude * np.sin(2.0 * math.pi * (times - t0) / 7.0 + phase_r)
        pitch = spec.excitation_amplitude * np.sin(2.0 * math.pi * (times - t0) / 5.0 + phase_p)
    else:
        roll = np.zeros(n_knots)
        pitch = np.zeros(n_knots)
    if axis == "x":
        pos = np.column_stack([sign * s, np.full(n_knots, lane), depth])
        yaw = 0.0 if sign > 0 else math.pi
    else:
        pos = np.column_stack([np.full(n_knots, lane), sign * s, depth])
        yaw = sign * math.pi / 2.0
    cov = POSE_SIGMA_FLOOR**2 * np.eye(6)
    poses = []
    for k in range(n_knots):
        cy, sy = math.cos(yaw), math.sin(yaw)
        cp, sp = math.cos(pitch[k]), math.sin(pitch[k])
        cr, sr = math.cos(roll[k]), math.sin(roll[k])
        rot_z = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        rot_y = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rot_x = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
        poses.append(TimedPose(float(times[k]), Pose(rot_z @ rot_y @ rot_x, pos[k]), cov))
    return Trajectory(index, tuple(poses))


def _laser_coords_at_knots(traj: Trajectory, extrinsic: Pose, keypoints: np.ndarray) -> np.ndarray:
    """(n_knots, n_kp, 3) keypoint coordinates in the laser frame."""
    out = np.empty((len(traj.poses), keypoints.shape[0], 3))
    for j, tp in enumerate(traj.poses):
        sensor_inv = (tp.pose @ extrinsic).inverse()
        out[j] = sensor_inv.transform(keypoints)
    return out


def _observe_pass(
    traj: Trajectory, extrinsic: Pose, keypoints: np.ndarray, point_cov: np.ndarray
) -> tuple[list[KeypointObservation], list[int]]:
    """Observations of all keypoints covered by this pass's swath.

    A keypoint is observed when the scan plane (zero along-track laser
    coordinate) crosses it with the across-track angle inside the swath.
    The observation time is refined with a root find on the interpolated
    trajectory, and the stored laser point is computed from the same
    interpolation used everywhere else, making registration through the
    true poses exact by construction.
    """
    coords = _laser_coords_at_knots(traj, extrinsic, keypoints)
    along = coords[:, :, 1]  # laser y is the along-track coordinate
    times = [tp.t for tp in traj.poses]
    observations: list[KeypointObservation] = []
    kp_ids: list[int] = []
    for q in range(keypoints.shape[0]):
        f = along[:, q]
        bracket = None
        for j in range(len(f) - 1):
            if f[j] == 0.0 or f[j] * f[j + 1] < 0.0:
                bracket = j
                break
        if bracket is None:
            continue

        def along_track(t: float, q=q) -> float:
            pose = interpolate_trajectory(traj, t)
            return float((pose @ extrinsic).inverse().transform(keypoints[q])[1])

        t_lo, t_hi = times[bracket], times[bracket + 1]
        if f[bracket] == 0.0:
            t_obs = t_lo
        else:
            t_obs = float(
                scipy.optimize.brentq(along_track, t_lo, t_hi, xtol=1e-10)
            )
        pose = interpolate_trajectory(traj, t_obs)
        p_laser = (pose @ extrinsic).inverse().transform(keypoints[q])
        if p_laser[2] >= 0.0:
            continue  # behind the scanner
        if abs(math.atan2(abs(p_laser[0]), -p_laser[2])) > SWATH_HALF_ANGLE:
            continue
        observations.append(KeypointObservation(t_obs, p_laser, point_cov.copy()))
        kp_ids.append(q)
    order = np.argsort([obs.t for obs in observations])
    return [observations[i] for i in order], [kp_ids[i] for i in order]


def _build_correspondences(
    submaps: list[Submap],
    obs_keypoints: list[list[int]],
    keypoints_per_pair: int,
    rng: np.random.Generator,
) -> list[Correspondence]:
    corrs: list[Correspondence] = []
    n = len(submaps)
    for i in range(n):
        index_i = {kp: k for k, kp in enumerate(obs_keypoints[i])}
        for j in range(i + 1, n):
            common = [kp for kp in obs_keypoints[j] if kp in index_i]
            if len(common) < 2:
                raise InfeasibleSpec(
                    f"submap pair ({i}, {j}) shares only {len(common)} keypoints"
                )
            if len(common) > keypoints_per_pair:
                picked = rng.choice(len(common), size=keypoints_per_pair, replace=False)
                common = [common[k] for k in sorted(picked)]
            index_j = {kp: k for k, kp in enumerate(obs_keypoints[j])}
            for kp in common:
                ka, kb = index_i[kp], index_j[kp]
                corrs.append(
                    Correspondence(
                        submap_a=i,
                        submap_b=j,
                        obs_a=submaps[i].observations[ka],
                        obs_b=submaps[j].observations[kb],
                        obs_index_a=ka,
                        obs_index_b=kb,
                    )
                )
    return corrs


def _default_noise(spec: ScenarioSpec) -> NoiseParams:
    rel_rot = max(spec.local_drift_rot, 1e-5)
    rel_trans = max(spec.local_drift_trans, 1e-4)
    return NoiseParams(
        wnoa_psd=np.diag([1e-4] * 3 + [1e-3] * 3),
        relpose_sigma=np.array([rel_rot] * 3 + [rel_trans] * 3),
        submap_sigma_phi=math.radians(1.0),
        submap_sigma_rho=np.array([0.25, 0.25, 0.25]),
    )


def generate(spec: ScenarioSpec) -> Scenario:
    """Build the noiseless, drift-free scenario for a spec.

    Drift and correspondence corruption are separate passes (inject_drift,
    corrupt_correspondences) so tests can exercise them in isolation;
    make_scenario chains them according to the spec's knobs.
    """
    passes, lanes_x, lanes_y = _pass_layout(spec)
    keypoints = _keypoint_field(spec, lanes_x, lanes_y)
    point_sigma = spec.point_noise_sigma if spec.point_noise_sigma > 0.0 else 0.01
    point_cov = point_sigma**2 * np.eye(3)

    trajectories = [
        _true_trajectory(spec, idx, axis, sign, lane)
        for idx, (axis, sign, lane) in enumerate(passes)
    ]
    observations = []
    obs_keypoints = []
    for traj in trajectories:
        obs, kp_ids = _observe_pass(traj, spec.true_extrinsic, keypoints, point_cov)
        if len(obs) < 2:
            raise InfeasibleSpec(f"pass {traj.id} observes only {len(obs)} keypoints")
        observations.append(obs)
        obs_keypoints.append(kp_ids)

    crossings = trajectory_crossings(trajectories)
    submaps = [
        build_submap(traj, obs, crossing)
        for traj, obs, crossing in zip(trajectories, observations, crossings)
    ]
    corr_rng = np.random.default_rng([spec.seed, 31])
    correspondences = _build_correspondences(
        submaps, obs_keypoints, spec.keypoints_per_pair, corr_rng
    )
    prior_mean = spec.true_extrinsic @ se3_exp(spec.prior_offset)
    prior = ExtrinsicPrior(prior_mean, spec.prior_sigma_phi, spec.prior_sigma_rho)
    ground_truth = GroundTruth(
        extrinsic=spec.true_extrinsic,
        trajectories=tuple(trajectories),
        keypoints=keypoints,
        observation_keypoints=tuple(tuple(ids) for ids in obs_keypoints),
    )
    return Scenario(
        spec=spec,
        submaps=tuple(submaps),
        correspondences=tuple(correspondences),
        prior=prior,
        noise=_default_noise(spec),
        ground_truth=ground_truth,
    )


def _rebuild_submap(submap: Submap, trajectory: Trajectory) -> Submap:
    """Recompute central pose and offsets after the trajectory changed,
    keeping the originally identified central timestamp."""
    central_idx = int(np.argmin(np.abs(trajectory.times - submap.central_time)))
    central = trajectory.poses[central_idx].pose
    central_inv = central.inverse()
    offsets = tuple(
        central_inv @ interpolate_trajectory(trajectory, obs.t)
        for obs in submap.observations
    )
    return dataclasses.replace(
        submap,
        trajectory=trajectory,
        central=central,
        central_time=trajectory.poses[central_idx].t,
        offsets=offsets,
    )


def inject_drift(scenario: Scenario, global_: bool, local: bool) -> Scenario:
    """Corrupt the measured navigation, leaving ground truth untouched.

    Global drift left-composes one random rigid twist per submap (world
    frame), so relative poses within a submap are preserved.  Local drift
    is a per-step random walk composed on the body side, which makes the
    emitted left-invariant pose covariances exact for the injected noise.
    """
    spec = scenario.spec
    rng = np.random.default_rng([spec.seed, 41])
    new_submaps = []
    for submap in scenario.submaps:
        poses = list(submap.trajectory.poses)
        if global_ and (spec.global_drift_rot > 0.0 or spec.global_drift_trans > 0.0):
            shift = se3_exp(
                random_unit_twist(rng, spec.global_drift_rot, spec.global_drift_trans)
            )
            poses = [
                dataclasses.replace(tp, pose=shift @ tp.pose) for tp in poses
            ]
        if local and (spec.local_drift_rot > 0.0 or spec.local_drift_trans > 0.0):
            walk = np.zeros(6)
            step_cov = np.diag(
                [spec.local_drift_rot**2] * 3 + [spec.local_drift_trans**2] * 3
            )
            drifted = [poses[0]]
            for k, tp in enumerate(poses[1:], start=1):
                walk = walk + np.concatenate(
                    [
                        spec.local_drift_rot * rng.normal(size=3),
                        spec.local_drift_trans * rng.normal(size=3),
                    ]
                )
                cov = k * step_cov + POSE_SIGMA_FLOOR**2 * np.eye(6)
                drifted.append(
                    dataclasses.replace(tp, pose=tp.pose @ se3_exp(walk), covariance=cov)
                )
            poses = drifted
        if global_ and (spec.global_drift_rot > 0.0 or spec.global_drift_trans > 0.0):
            inflation = np.diag(
                [spec.global_drift_rot**2] * 3 + [spec.global_drift_trans**2] * 3
            )
            poses = [
                dataclasses.replace(tp, covariance=tp.covariance + inflation)
                for tp in poses
            ]
        trajectory = Trajectory(submap.trajectory.id, tuple(poses))
        new_submaps.append(_rebuild_submap(submap, trajectory))
    correspondences = _relink_correspondences(scenario.correspondences, new_submaps)
    return dataclasses.replace(
        scenario, submaps=tuple(new_submaps), correspondences=tuple(correspondences)
    )


def _relink_correspondences(
    correspondences, submaps: list[Submap]
) -> list[Correspondence]:
    by_id = {sm.id: sm for sm in submaps}
    return [
        dataclasses.replace(
            corr,
            obs_a=by_id[corr.submap_a].observations[corr.obs_index_a],
            obs_b=by_id[corr.submap_b].observations[corr.obs_index_b],
        )
        for corr in correspondences
    ]


def _gate_covariance(corr: Correspondence, submaps, prior: ExtrinsicPrior):
    """Predicted world disparity and its covariance under the prior."""
    sub_a = submaps[corr.submap_a]
    sub_b = submaps[corr.submap_b]
    pose_a = sub_a.central @ sub_a.offsets[corr.obs_index_a]
    pose_b = sub_b.central @ sub_b.offsets[corr.obs_index_b]
    identity = Pose.identity()
    residual, jac_ext, _, _, g1, g2 = _reprojection_terms(
        pose_a, identity, corr.obs_a.point_laser,
        pose_b, identity, corr.obs_b.point_laser,
        prior.mean,
    )
    cov = (
        g1 @ corr.obs_a.covariance @ g1.T
        + g2 @ corr.obs_b.covariance @ g2.T
        + jac_ext @ prior.covariance() @ jac_ext.T
    )
    return residual, cov


def corrupt_correspondences(
    scenario: Scenario, noise_sigma: float, outlier_fraction: float
) -> Scenario:
    """Add point noise, rematch a fraction of pairs to wrong keypoints, and
    drop pairs failing a chi-square gate under the prior extrinsic.

    The gate covariance combines the propagated point covariances with the
    prior-extrinsic uncertainty, so a consistent prior keeps inlier loss
    negligible.  Ground truth records the pre-gate labels and survivors.
    """
    if noise_sigma == 0.0 and outlier_fraction == 0.0:
        return scenario
    spec = scenario.spec
    rng = np.random.default_rng([spec.seed, 59])
    submaps = list(scenario.submaps)
    if noise_sigma > 0.0:
        noisy = []
        for submap in submaps:
            cov = noise_sigma**2 * np.eye(3)
            observations = tuple(
                dataclasses.replace(
                    obs,
                    point_laser=obs.point_laser + noise_sigma * rng.normal(size=3),
                    covariance=cov.copy(),
                )
                for obs in submap.observations
            )
            noisy.append(dataclasses.replace(submap, observations=observations))
        submaps = noisy
    correspondences = _relink_correspondences(scenario.correspondences, submaps)

    n_corr = len(correspondences)
    labels = [False] * n_corr
    if outlier_fraction > 0.0:
        n_out = int(math.floor(outlier_fraction * n_corr))
        chosen = rng.choice(n_corr, size=n_out, replace=False)
        for idx in sorted(chosen):
            corr = correspondences[idx]
            n_obs = len(submaps[corr.submap_b].observations)
            if n_obs < 2:
                continue
            wrong = int(rng.integers(n_obs - 1))
            if wrong >= corr.obs_index_b:
                wrong += 1
            correspondences[idx] = dataclasses.replace(
                corr,
                obs_b=submaps[corr.submap_b].observations[wrong],
                obs_index_b=wrong,
            )
            labels[idx] = True

    threshold = scipy.stats.chi2.ppf(GATE_CONFIDENCE, df=3)
    survivors = []
    for idx, corr in enumerate(correspondences):
        disparity, cov = _gate_covariance(corr, submaps, scenario.prior)
        if float(disparity @ np.linalg.solve(cov, disparity)) <= threshold:
            survivors.append(idx)

    ground_truth = dataclasses.replace(
        scenario.ground_truth,
        outlier_labels=tuple(labels),
        pregate_count=n_corr,
        survivor_indices=tuple(survivors),
    )
    return dataclasses.replace(
        scenario,
        submaps=tuple(submaps),
        correspondences=tuple(correspondences[i] for i in survivors),
        ground_truth=ground_truth,
    )


def make_scenario(spec: ScenarioSpec) -> Scenario:
    """generate + inject_drift + corrupt_correspondences per the spec knobs."""
    scenario = generate(spec)
    wants_global = spec.global_drift_rot > 0.0 or spec.global_drift_trans > 0.0
    wants_local = spec.local_drift_rot > 0.0 or spec.local_drift_trans > 0.0
    if wants_global or wants_local:
        scenario = inject_drift(scenario, wants_global, wants_local)
    if spec.point_noise_sigma > 0.0 or spec.outlier_fraction > 0.0:
        scenario = corrupt_correspondences(
            scenario, spec.point_noise_sigma, spec.outlier_fraction
        )
    return scenario
