"""Domain objects for calibration problems and laser-point registration.

Units are meters, radians, and seconds everywhere; degrees and centimeters
appear only at the reporting boundary.  All types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .se3 import Pose, interpolate

# Isotropic keypoint standard deviation assumed when a dataset omits the
# per-point covariance; on the order of the laser noise for this sensor
# class.  Overridable wherever observations are constructed.
DEFAULT_POINT_SIGMA = 0.01


class ObservationOutOfSpan(ValueError):
    """Observation time falls outside its trajectory's time span."""


def _check_covariance(cov: np.ndarray, dim: int, what: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (dim, dim):
        raise ValueError(f"{what} covariance must be {dim}x{dim}, got {cov.shape}")
    if np.abs(cov - cov.T).max() > 1e-12:
        raise ValueError(f"{what} covariance is not symmetric")
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals.min() < -1e-12:
        raise ValueError(f"{what} covariance has negative eigenvalue {eigvals.min()}")
    return cov


@dataclass(frozen=True)
class TimedPose:
    """A pose measurement at time t with a 6x6 left-invariant covariance."""

    t: float
    pose: Pose
    covariance: np.ndarray

    def __post_init__(self):
        _check_covariance(self.covariance, 6, "pose")


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered vehicle poses for one submap section."""

    id: int
    poses: tuple[TimedPose, ...]

    def __post_init__(self):
        if len(self.poses) < 2:
            raise ValueError("trajectory needs at least 2 poses")
        times = [tp.t for tp in self.poses]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")

    @property
    def times(self) -> np.ndarray:
        return np.array([tp.t for tp in self.poses])

    @property
    def t_start(self) -> float:
        return self.poses[0].t

    @property
    def t_end(self) -> float:
        return self.poses[-1].t

    def positions(self) -> np.ndarray:
        return np.array([tp.pose.translation for tp in self.poses])


def interpolate_trajectory(traj: Trajectory, t: float) -> Pose:
    """Pose at time t via on-manifold interpolation of the bracketing knots.

    Extrapolation is an error, never clamped.
    """
    times = [tp.t for tp in traj.poses]
    if t < times[0] or t > times[-1]:
        raise ObservationOutOfSpan(
            f"time {t} outside trajectory span [{times[0]}, {times[-1]}]"
        )
    k = bisect.bisect_right(times, t) - 1
    if k == len(times) - 1:
        return traj.poses[-1].pose
    return interpolate(
        traj.poses[k].pose, traj.poses[k + 1].pose, times[k], times[k + 1], t
    )


@dataclass(frozen=True)
class KeypointObservation:
    """One laser-frame keypoint detection with its 3x3 covariance."""

    t: float
    point_laser: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "point_laser", np.asarray(self.point_laser, dtype=float)
        )
        _check_covariance(self.covariance, 3, "point")


@dataclass(frozen=True)
class Correspondence:
    """A matched keypoint pair between two submaps.

    obs_index_a/b locate the observations inside their submaps' observation
    lists, which keeps observation identity stable through serialization.
    """

    submap_a: int
    submap_b: int
    obs_a: KeypointObservation
    obs_b: KeypointObservation
    obs_index_a: int = -1
    obs_index_b: int = -1

    def __post_init__(self):
        if self.submap_a == self.submap_b:
            raise ValueError("correspondence must link two different submaps")


@dataclass(frozen=True)
class ExtrinsicPrior:
    """Gaussian prior on the laser-to-INS extrinsic.

    The 6x6 covariance is blkdiag(sigma_phi^2 I, sigma_rho^2 I) in the
    rotation-first twist ordering.
    """

    mean: Pose
    sigma_phi: float
    sigma_rho: float

    def __post_init__(self):
        if self.sigma_phi <= 0.0 or self.sigma_rho <= 0.0:
            raise ValueError("prior sigmas must be strictly positive")

    def covariance(self) -> np.ndarray:
        return np.diag([self.sigma_phi**2] * 3 + [self.sigma_rho**2] * 3)


@dataclass(frozen=True)
class Submap:
    """Laser observations hung off one trajectory section.

    Every vehicle pose at an observation time factors exactly as
    central @ offsets[k]; the offsets are precomputed from the measured
    navigation and treated as rigid parameters.
    """

    id: int
    trajectory: Trajectory
    central: Pose
    central_time: float
    offsets: tuple[Pose, ...]
    observations: tuple[KeypointObservation, ...]


def register_point(
    vehicle: Pose, extrinsic: Pose, point_laser: np.ndarray
) -> np.ndarray:
    """World-frame position of a laser-frame point: (T_vehicle T_extrinsic) p."""
    return vehicle.transform(extrinsic.transform(point_laser))


def trajectory_crossings(trajectories: list[Trajectory]) -> list[np.ndarray]:
    """Crossing point for each trajectory against the others.

    For each pair, the two knot poses at minimum inter-trajectory position
    distance are the closest-approach poses; a trajectory's crossing point is
    the centroid of its own closest-approach positions over all other
    trajectories.  Ties break toward the earliest timestamp.
    """
    positions = [traj.positions() for traj in trajectories]
    crossings = []
    for i, pos_i in enumerate(positions):
        approach_points = []
        for j, pos_j in enumerate(positions):
            if j == i:
                continue
            d2 = ((pos_i[:, None, :] - pos_j[None, :, :]) ** 2).sum(axis=2)
            k = int(np.argmin(d2.min(axis=1)))  # argmin scans in time order
            approach_points.append(pos_i[k])
        crossings.append(np.mean(approach_points, axis=0))
    return crossings


def build_submap(
    traj: Trajectory,
    observations: list[KeypointObservation],
    crossing: np.ndarray | None = None,
) -> Submap:
    """Construct a submap with its central pose and rigid offsets.

    The central pose is the trajectory knot nearest the crossing point
    (earliest timestamp on ties); when no crossing is supplied the centroid
    of the trajectory's own positions is used.  Every observation time must
    lie inside the trajectory span.
    """
    if crossing is None:
        crossing = traj.positions().mean(axis=0)
    d2 = ((traj.positions() - np.asarray(crossing, dtype=float)) ** 2).sum(axis=1)
    central_idx = int(np.argmin(d2))
    central = traj.poses[central_idx].pose
    central_time = traj.poses[central_idx].t
    central_inv = central.inverse()
    offsets = tuple(
        central_inv @ interpolate_trajectory(traj, obs.t) for obs in observations
    )
    return Submap(
        id=traj.id,
        trajectory=traj,
        central=central,
        central_time=central_time,
        offsets=offsets,
        observations=tuple(observations),
    )


def world_keypoints(submap: Submap, extrinsic: Pose) -> np.ndarray:
    """(n, 3) world positions of the submap's keypoints for a given extrinsic."""
    out = np.empty((len(submap.observations), 3))
    for k, (obs, offset) in enumerate(zip(submap.observations, submap.offsets)):
        out[k] = register_point(submap.central @ offset, extrinsic, obs.point_laser)
    return out


def submap_point_sets(submaps: list[Submap], extrinsic: Pose) -> list[np.ndarray]:
    return [world_keypoints(sm, extrinsic) for sm in submaps]
