"""Rotation and rigid-transform primitives on SO(3) / SE(3).

Conventions, fixed package-wide:

* Twists are 6-vectors ordered rotation-first, ``xi = [phi, rho]``, with
  ``phi`` in radians and ``rho`` in meters.  ``se3_hat`` places ``phi^x`` in
  the top-left 3x3 block and ``rho`` in the top-right column, so the
  identity ``se3_hat(xi) @ u == odot(u) @ xi`` holds for homogeneous ``u``.
* Rotations are full 3x3 orthonormal matrices, never quaternions or Euler
  angles.
* Pose perturbations are multiplicative and left-invariant,
  ``T = T_bar @ se3_exp(-delta)``; the group error between an estimate and
  a reference is ``left_invariant_error(T, T_ref) = log(T^-1 T_ref)``.
* Logarithms near a rotation angle of pi raise ``AngleNearPi`` instead of
  returning a branch-ambiguous answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this rotation angle closed forms switch to truncated Taylor series
# to avoid catastrophic cancellation.
SMALL_ANGLE = 1e-8

# Rotation angles within this margin of pi are rejected by logarithms.
NEAR_PI_MARGIN = 1e-6


class AngleNearPi(ValueError):
    """Rotation angle is within the ambiguity margin of pi."""


class OutOfInterval(ValueError):
    """Query time lies outside the interpolation interval."""


def so3_hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric 3x3 matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(phi: np.ndarray) -> np.ndarray:
    """Rodrigues formula, Taylor fallback below SMALL_ANGLE."""
    phi = np.asarray(phi, dtype=float)
    theta = math.sqrt(phi @ phi)
    k = so3_hat(phi)
    k2 = k @ k
    if theta < SMALL_ANGLE:
        return np.eye(3) + k + 0.5 * k2
    s = math.sin(theta) / theta
    c = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + s * k + c * k2


def so3_log(rot: np.ndarray) -> np.ndarray:
    """Principal rotation vector of an orthonormal matrix.

    Raises AngleNearPi when the rotation angle is within NEAR_PI_MARGIN of
    pi; the axis sign is ambiguous there and calibration problems never
    legitimately reach it.
    """
    trace = rot[0, 0] + rot[1, 1] + rot[2, 2]
    cos_theta = min(1.0, max(-1.0, 0.5 * (trace - 1.0)))
    theta = math.acos(cos_theta)
    if theta > math.pi - NEAR_PI_MARGIN:
        raise AngleNearPi(f"rotation angle {theta:.9f} within {NEAR_PI_MARGIN} of pi")
    axis_raw = np.array(
        [rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]]
    )
    if theta < SMALL_ANGLE:
        return 0.5 * axis_raw
    return (theta / (2.0 * math.sin(theta))) * axis_raw


def so3_left_jacobian(phi: np.ndarray) -> np.ndarray:
    """Left Jacobian of SO(3): exp(phi + d) ~ exp(J @ d) exp(phi)."""
    phi = np.asarray(phi, dtype=float)
    theta2 = float(phi @ phi)
    k = so3_hat(phi)
    k2 = k @ k
    if theta2 < SMALL_ANGLE * SMALL_ANGLE:
        return np.eye(3) + (0.5 - theta2 / 24.0) * k + (1.0 / 6.0 - theta2 / 120.0) * k2
    theta = math.sqrt(theta2)
    a = (1.0 - math.cos(theta)) / theta2
    b = (theta - math.sin(theta)) / (theta2 * theta)
    return np.eye(3) + a * k + b * k2


def so3_left_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta2 = float(phi @ phi)
    k = so3_hat(phi)
    k2 = k @ k
    if theta2 < SMALL_ANGLE * SMALL_ANGLE:
        return np.eye(3) - 0.5 * k + (1.0 / 12.0 + theta2 / 720.0) * k2
    theta = math.sqrt(theta2)
    coeff = (1.0 - theta * math.sin(theta) / (2.0 * (1.0 - math.cos(theta)))) / theta2
    return np.eye(3) - 0.5 * k + coeff * k2


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Orthogonal polar factor: the closest rotation in Frobenius norm."""
    u, _, vt = np.linalg.svd(m)
    rot = u @ vt
    if np.linalg.det(rot) < 0.0:
        rot = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return rot


def is_rotation(m: np.ndarray, tol: float = 1e-9) -> bool:
    return (
        m.shape == (3, 3)
        and np.linalg.norm(m.T @ m - np.eye(3)) <= tol
        and abs(np.linalg.det(m) - 1.0) <= tol
    )


@dataclass(frozen=True)
class Twist:
    """Element of se(3) split into its rotational and translational parts."""

    phi: np.ndarray
    rho: np.ndarray

    @staticmethod
    def from_vector(xi: np.ndarray) -> "Twist":
        xi = np.asarray(xi, dtype=float)
        return Twist(phi=xi[:3].copy(), rho=xi[3:].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.phi, self.rho])

    def __array__(self, dtype=None, copy=None):
        vec = self.as_vector()
        return vec.astype(dtype) if dtype is not None else vec


def _twist_vector(xi) -> np.ndarray:
    if isinstance(xi, Twist):
        return xi.as_vector()
    return np.asarray(xi, dtype=float)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: orthonormal 3x3 rotation and translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(mat: np.ndarray) -> "Pose":
        mat = np.asarray(mat, dtype=float)
        return Pose(mat[:3, :3].copy(), mat[:3, 3].copy())

    def matrix(self) -> np.ndarray:
        mat = np.eye(4)
        mat[:3, :3] = self.rotation
        mat[:3, 3] = self.translation
        return mat

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt.copy(), -(rt @ self.translation))

    def transform(self, point: np.ndarray) -> np.ndarray:
        """Apply to a 3-point (or an (n, 3) stack of points)."""
        point = np.asarray(point, dtype=float)
        if point.ndim == 1:
            return self.rotation @ point + self.translation
        return point @ self.rotation.T + self.translation

    def renormalized(self) -> "Pose":
        return Pose(nearest_rotation(self.rotation), self.translation.copy())


def se3_hat(xi) -> np.ndarray:
    xi = _twist_vector(xi)
    out = np.zeros((4, 4))
    out[:3, :3] = so3_hat(xi[:3])
    out[:3, 3] = xi[3:]
    return out


def se3_vee(m: np.ndarray) -> np.ndarray:
    return np.concatenate([so3_vee(m[:3, :3]), m[:3, 3]])


def odot(u: np.ndarray) -> np.ndarray:
    """4x6 matrix of a homogeneous point satisfying hat(xi) @ u = odot(u) @ xi."""
    u = np.asarray(u, dtype=float)
    out = np.zeros((4, 6))
    out[:3, :3] = -so3_hat(u[:3])
    out[:3, 3:] = u[3] * np.eye(3)
    return out


def se3_exp(xi) -> Pose:
    """Exponential map of a twist; exact closed form away from zero angle."""
    xi = _twist_vector(xi)
    return Pose(so3_exp(xi[:3]), so3_left_jacobian(xi[:3]) @ xi[3:])


def se3_log(pose: Pose) -> np.ndarray:
    """Principal-branch logarithm as a twist vector.

    Raises AngleNearPi when the rotation angle is within NEAR_PI_MARGIN of pi.
    """
    phi = so3_log(pose.rotation)
    rho = so3_left_jacobian_inv(phi) @ pose.translation
    return np.concatenate([phi, rho])


def adjoint(pose: Pose) -> np.ndarray:
    """6x6 adjoint of a pose in the rotation-first twist ordering."""
    out = np.zeros((6, 6))
    out[:3, :3] = pose.rotation
    out[3:, 3:] = pose.rotation
    out[3:, :3] = so3_hat(pose.translation) @ pose.rotation
    return out


def _se3_q_matrix(phi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Translation-rotation coupling block of the SE(3) left Jacobian."""
    theta2 = float(phi @ phi)
    k = so3_hat(phi)
    p = so3_hat(rho)
    k2 = k @ k
    kp = k @ p
    pk = p @ k
    kpk = kp @ k
    if theta2 < SMALL_ANGLE * SMALL_ANGLE:
        c1 = 1.0 / 6.0 - theta2 / 120.0
        c2 = 1.0 / 24.0 - theta2 / 720.0
        c3 = 1.0 / 120.0 - theta2 / 2520.0
    else:
        theta = math.sqrt(theta2)
        theta4 = theta2 * theta2
        s = math.sin(theta)
        c = math.cos(theta)
        c1 = (theta - s) / (theta2 * theta)
        a = (1.0 - 0.5 * theta2 - c) / theta4
        b = (theta - s - theta2 * theta / 6.0) / (theta4 * theta)
        c2 = -a
        c3 = -0.5 * (a - 3.0 * b)
    return (
        0.5 * p
        + c1 * (kp + pk + kpk)
        + c2 * (k2 @ p + pk @ k - 3.0 * kpk)
        + c3 * (kpk @ k + k @ kpk)
    )


def se3_jacobian(xi, side: str = "left") -> np.ndarray:
    """Left or right Jacobian of SE(3) in the rotation-first ordering.

    The left Jacobian satisfies exp(xi + d) ~ exp(J_left(xi) d) exp(xi) to
    first order; J_right(xi) = J_left(-xi).
    """
    xi = _twist_vector(xi)
    if side == "right":
        xi = -xi
    elif side != "left":
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    jac = np.zeros((6, 6))
    j_rot = so3_left_jacobian(xi[:3])
    jac[:3, :3] = j_rot
    jac[3:, 3:] = j_rot
    jac[3:, :3] = _se3_q_matrix(xi[:3], xi[3:])
    return jac


def se3_jacobian_inv(xi, side: str = "left") -> np.ndarray:
    """Inverse of the SE(3) Jacobian, via the block-triangular structure."""
    xi = _twist_vector(xi)
    if side == "right":
        xi = -xi
    elif side != "left":
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    j_rot_inv = so3_left_jacobian_inv(xi[:3])
    q = _se3_q_matrix(xi[:3], xi[3:])
    out = np.zeros((6, 6))
    out[:3, :3] = j_rot_inv
    out[3:, 3:] = j_rot_inv
    out[3:, :3] = -j_rot_inv @ q @ j_rot_inv
    return out


def left_invariant_error(pose: Pose, pose_ref: Pose) -> np.ndarray:
    """log(T^-1 T_ref) as a twist; zero iff the poses coincide."""
    return se3_log(pose.inverse() @ pose_ref)


def interpolate(
    pose_k: Pose, pose_k1: Pose, t_k: float, t_k1: float, t_i: float
) -> Pose:
    """On-manifold interpolation T_k exp(alpha log(T_k^-1 T_k1)).

    alpha = (t_i - t_k) / (t_k1 - t_k); endpoints are included.
    """
    if t_k1 <= t_k:
        raise OutOfInterval(f"degenerate interval [{t_k}, {t_k1}]")
    if t_i < t_k or t_i > t_k1:
        raise OutOfInterval(f"time {t_i} outside [{t_k}, {t_k1}]")
    alpha = (t_i - t_k) / (t_k1 - t_k)
    xi = se3_log(pose_k.inverse() @ pose_k1)
    return pose_k @ se3_exp(alpha * xi)
