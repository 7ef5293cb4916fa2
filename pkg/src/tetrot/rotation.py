"""Quaternion parametrization of rotations about the origin.

Rotation matrices are plain (3, 3) float arrays; validity is checked where
matrices enter the API.  Quaternions are kept in a canonical form that fixes
the q ~ -q ambiguity, and rotation angles are restricted to [0, pi] (a turn
by -alpha about w equals a turn by alpha about -w).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geom import DEFAULT_TOLERANCES, as_finite_array

__all__ = [
    "AxisAngle",
    "AxisClass",
    "UnitQuaternion",
    "apply",
    "classify_rotation",
    "matrix_to_quat",
    "quat_from_axis_angle",
    "quat_to_axis_angle",
    "quat_to_matrix",
]

_UNIT_NORM_ATOL = 1e-12
_ROTATION_ATOL = 1e-9


class AxisClass(enum.Enum):
    """Position of the rotation axis relative to the projection plane."""

    HORIZONTAL = "horizontal"  # axis lies in the xy-plane
    VERTICAL = "vertical"      # axis is the z-axis
    OBLIQUE = "oblique"
    NO_AXIS = "no-axis"        # identity rotation only


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion a + b i + c j + d k in canonical form.

    Canonical means a >= 0, and if a == 0 the first nonzero of (b, c, d) is
    positive.  Construction canonicalizes the sign but rejects non-unit
    input; use :meth:`normalized` to build from arbitrary components.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        comps = tuple(float(x) for x in (self.a, self.b, self.c, self.d))
        if not all(math.isfinite(x) for x in comps):
            raise ValueError("quaternion components must be finite")
        norm2 = sum(x * x for x in comps)
        if abs(norm2 - 1.0) > _UNIT_NORM_ATOL:
            raise ValueError(f"quaternion norm^2 is {norm2!r}, expected 1")
        for x in comps:
            if x > 0.0:
                break
            if x < 0.0:
                comps = tuple(-y for y in comps)
                break
        for name, value in zip("abcd", comps):
            object.__setattr__(self, name, value)

    @classmethod
    def normalized(cls, a: float, b: float, c: float, d: float) -> "UnitQuaternion":
        norm = math.sqrt(a * a + b * b + c * c + d * d)
        if not (math.isfinite(norm) and norm > 0):
            raise ValueError("cannot normalize a zero or non-finite quaternion")
        return cls(a / norm, b / norm, c / norm, d / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def is_identity(self, angle_abs: float = DEFAULT_TOLERANCES.angle_abs) -> bool:
        return quat_to_axis_angle(self).angle <= angle_abs


@dataclass(frozen=True, eq=False)
class AxisAngle:
    """Rotation axis (unit vector) and angle in [0, pi]."""

    axis: np.ndarray
    angle: float


def _matrix_from_components(a: float, b: float, c: float, d: float) -> np.ndarray:
    n2 = a * a + b * b + c * c + d * d
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * b * c - 2 * a * d, 2 * b * d + 2 * a * c],
        [2 * b * c + 2 * a * d, a * a - b * b + c * c - d * d, 2 * c * d - 2 * a * b],
        [2 * b * d - 2 * a * c, 2 * c * d + 2 * a * b, a * a - b * b - c * c + d * d],
    ]) / n2


def quat_from_axis_angle(axis, angle: float, axis_atol: float = 1e-9) -> UnitQuaternion:
    """Quaternion of the rotation by `angle` radians about unit vector `axis`."""
    w = as_finite_array(axis, (3,), "axis")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > axis_atol:
        raise ValueError(f"axis must be a unit vector, got norm {norm!r}")
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    half = 0.5 * angle
    s = math.sin(half)
    return UnitQuaternion.normalized(math.cos(half), w[0] * s, w[1] * s, w[2] * s)


def quat_to_matrix(q: UnitQuaternion) -> np.ndarray:
    """The 3x3 rotation matrix of q.  Same matrix for q and -q."""
    return _matrix_from_components(q.a, q.b, q.c, q.d)


def quat_to_axis_angle(q: UnitQuaternion) -> AxisAngle:
    """Axis and angle of q; the identity reports axis (0,0,1) and angle 0."""
    vec = np.array([q.b, q.c, q.d])
    s = float(np.linalg.norm(vec))
    angle = 2.0 * math.atan2(s, q.a)
    if s == 0.0:
        return AxisAngle(np.array([0.0, 0.0, 1.0]), 0.0)
    return AxisAngle(vec / s, angle)


def matrix_to_quat(r, atol: float = _ROTATION_ATOL) -> UnitQuaternion:
    """Canonical quaternion of a rotation matrix.

    Raises ValueError unless r.T @ r = I and det r = 1 within atol.
    """
    m = as_finite_array(r, (3, 3), "rotation matrix")
    if not np.allclose(m.T @ m, np.eye(3), atol=atol, rtol=0.0):
        raise ValueError("matrix is not orthogonal within tolerance")
    if abs(np.linalg.det(m) - 1.0) > atol:
        raise ValueError("matrix determinant is not 1 within tolerance")
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0:
        s = 2.0 * math.sqrt(trace + 1.0)
        a = 0.25 * s
        b = (m[2, 1] - m[1, 2]) / s
        c = (m[0, 2] - m[2, 0]) / s
        d = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        a = (m[2, 1] - m[1, 2]) / s
        b = 0.25 * s
        c = (m[0, 1] + m[1, 0]) / s
        d = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        a = (m[0, 2] - m[2, 0]) / s
        b = (m[0, 1] + m[1, 0]) / s
        c = 0.25 * s
        d = (m[1, 2] + m[2, 1]) / s
    else:
        s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        a = (m[1, 0] - m[0, 1]) / s
        b = (m[0, 2] + m[2, 0]) / s
        c = (m[1, 2] + m[2, 1]) / s
        d = 0.25 * s
    return UnitQuaternion.normalized(a, b, c, d)


def classify_rotation(
    q: UnitQuaternion, angle_abs: float = DEFAULT_TOLERANCES.angle_abs
) -> tuple[AxisClass, float]:
    """Axis class and rotation angle of q.

    The identity is classified NO_AXIS with angle 0.  Horizontal means
    |w3| <= angle_abs, vertical means |w1|, |w2| <= angle_abs.
    """
    aa = quat_to_axis_angle(q)
    if aa.angle <= angle_abs:
        return AxisClass.NO_AXIS, 0.0
    w1, w2, w3 = aa.axis
    if abs(w3) <= angle_abs:
        return AxisClass.HORIZONTAL, aa.angle
    if abs(w1) <= angle_abs and abs(w2) <= angle_abs:
        return AxisClass.VERTICAL, aa.angle
    return AxisClass.OBLIQUE, aa.angle


def apply(q: UnitQuaternion, p) -> np.ndarray:
    """Rotate a point (3,) or stack of points (n, 3) by q."""
    r = quat_to_matrix(q)
    return np.asarray(p, dtype=float) @ r.T
