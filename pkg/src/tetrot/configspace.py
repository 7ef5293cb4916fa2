"""Rank analysis of the relabeled projection-match systems.

For a rotation q and a relabeling class, the centred tetrahedra whose
rotated vertices project onto their own projections (relabeled by the
canonical class representative) form a linear subspace of R^9 in the
coordinates (p1, p2, p3); the fourth vertex is -(p1+p2+p3).  This module
builds the 6x9 coefficient matrix of that system, measures its rank and
null space numerically, tabulates the predicted null-space dimension for
every axis/angle case, and samples tetrahedra from the null space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import DEFAULT_TOLERANCES, PermClass, Tetrahedron
from .rotation import (
    AxisClass,
    UnitQuaternion,
    classify_rotation,
    quat_from_axis_angle,
    quat_to_axis_angle,
    quat_to_matrix,
)

__all__ = [
    "CLASSIFICATION_CELLS",
    "CaseCell",
    "MidpointFrame",
    "block_A",
    "build_config_matrix",
    "case_label",
    "config_dimension",
    "fourcycle_lambda",
    "midpoint_frame",
    "minor_sigma_id",
    "null_space_basis",
    "numeric_rank",
    "predicted_dimension",
    "sample_cell_rotation",
    "sample_tetrahedron",
    "verify_fourcycle_relations",
]

_I23 = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
_Z23 = np.zeros((2, 3))

HALF_TURN = math.pi
QUARTER_TURN = math.pi / 2
THIRD_TURN = 2 * math.pi / 3


def block_A(q: UnitQuaternion) -> np.ndarray:
    """Top two rows of the rotation matrix of q, the projected rotation."""
    return quat_to_matrix(q)[:2]


def build_config_matrix(q: UnitQuaternion, perm_class: PermClass) -> np.ndarray:
    """6x9 coefficient matrix of the projection-match system for the class.

    Variables are ordered p1_x, p1_y, p1_z, p2_x, ..., p3_z; rows 2i-1 and
    2i carry the x and y equation of block i.  With A the projected
    rotation and I the 2x3 truncated identity, the block layouts are

        identity         : diag(A-I, A-I, A-I)
        two-cycle        : [[A, -I, 0], [-I, A, 0], [0, 0, A-I]]
        double two-cycle : [[A, -I, 0], [-I, A, 0], [I, I, A+I]]
        three-cycle      : [[A, -I, 0], [0, A, -I], [-I, 0, A]]
        four-cycle       : [[A, -I, 0], [0, A, -I], [I, I, A+I]]

    where the (A+I) rows eliminate the fourth vertex through the centroid
    condition.
    """
    a = block_A(q)
    ai = a - _I23
    if perm_class is PermClass.IDENTITY:
        rows = [[ai, _Z23, _Z23], [_Z23, ai, _Z23], [_Z23, _Z23, ai]]
    elif perm_class is PermClass.TWO_CYCLE:
        rows = [[a, -_I23, _Z23], [-_I23, a, _Z23], [_Z23, _Z23, ai]]
    elif perm_class is PermClass.DOUBLE_TWO_CYCLE:
        rows = [[a, -_I23, _Z23], [-_I23, a, _Z23], [_I23, _I23, a + _I23]]
    elif perm_class is PermClass.THREE_CYCLE:
        rows = [[a, -_I23, _Z23], [_Z23, a, -_I23], [-_I23, _Z23, a]]
    elif perm_class is PermClass.FOUR_CYCLE:
        rows = [[a, -_I23, _Z23], [_Z23, a, -_I23], [_I23, _I23, a + _I23]]
    else:
        raise ValueError(f"unknown permutation class {perm_class!r}")
    return np.block(rows)


def numeric_rank(m, rel_tol: float = DEFAULT_TOLERANCES.rank_rel) -> int:
    """Count of singular values above rel_tol times the largest one."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def null_space_basis(m, rel_tol: float = DEFAULT_TOLERANCES.rank_rel) -> np.ndarray:
    """Orthonormal basis of the null space, one vector per row."""
    m = np.asarray(m, dtype=float)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rel_tol * s[0]))
    return vh[rank:]


def config_dimension(
    q: UnitQuaternion,
    perm_class: PermClass,
    rel_tol: float = DEFAULT_TOLERANCES.rank_rel,
) -> int:
    """Null-space dimension of the projection-match system, 9 - rank."""
    axis_class, _ = classify_rotation(q)
    if axis_class is AxisClass.NO_AXIS:
        raise ValueError("the identity rotation is excluded from dimension analysis")
    return 9 - numeric_rank(build_config_matrix(q, perm_class), rel_tol)


def predicted_dimension(
    perm_class: PermClass,
    axis_class: AxisClass,
    alpha: float,
    angle_abs: float = DEFAULT_TOLERANCES.angle_abs,
) -> int:
    """Predicted null-space dimension for an axis class and angle.

    The table gives 3 in the generic case and a larger value in the special
    cells listed per class.  Requires a non-identity rotation (alpha > 0).
    """
    if axis_class is AxisClass.NO_AXIS or not alpha > angle_abs:
        raise ValueError("rotation must differ from the identity")
    half = abs(alpha - HALF_TURN) <= angle_abs
    quarter = abs(alpha - QUARTER_TURN) <= angle_abs
    third = abs(alpha - THIRD_TURN) <= angle_abs
    horizontal = axis_class is AxisClass.HORIZONTAL
    vertical = axis_class is AxisClass.VERTICAL
    oblique = axis_class is AxisClass.OBLIQUE

    if perm_class is PermClass.IDENTITY:
        return 6 if horizontal else 3
    if perm_class is PermClass.TWO_CYCLE:
        if horizontal:
            return 6 if half else 5
        if vertical and half:
            return 5
        if oblique and half:
            return 4
        return 3
    if perm_class is PermClass.DOUBLE_TWO_CYCLE:
        if horizontal:
            return 6 if half else 4
        if vertical and half:
            return 7
        if oblique and half:
            return 5
        return 3
    if perm_class is PermClass.THREE_CYCLE:
        if horizontal:
            return 4
        if vertical and third:
            return 5
        return 3
    if perm_class is PermClass.FOUR_CYCLE:
        if vertical:
            return 5 if (half or quarter) else 3
        # a half-turn about any non-vertical axis leaves rank 5
        return 4 if half else 3
    raise ValueError(f"unknown permutation class {perm_class!r}")


def case_label(axis_class: AxisClass, alpha: float, angle_abs: float = DEFAULT_TOLERANCES.angle_abs) -> str:
    """Geometric label of a rotation's case cell, e.g. 'vertical-half-turn'."""
    if axis_class is AxisClass.NO_AXIS:
        return "identity"
    name = axis_class.value
    if abs(alpha - HALF_TURN) <= angle_abs:
        return f"{name}-half-turn"
    if abs(alpha - QUARTER_TURN) <= angle_abs:
        return f"{name}-quarter-turn"
    if abs(alpha - THIRD_TURN) <= angle_abs:
        return f"{name}-third-turn"
    return name


def minor_sigma_id(q: UnitQuaternion) -> float:
    """Classification discriminant of the identity-class system.

    Eight times the determinant of the 6x6 submatrix in columns
    (1, 2, 4, 5, 7, 8) of the half-scaled identity-class coefficient
    matrix.  Equals 8*d**6 for a unit quaternion and vanishes exactly when
    the rotation axis is horizontal.
    """
    m = build_config_matrix(q, PermClass.IDENTITY) / 2.0
    sub = m[:, [0, 1, 3, 4, 6, 7]]
    return 8.0 * float(np.linalg.det(sub))


def sample_tetrahedron(
    q: UnitQuaternion,
    perm_class: PermClass,
    seed,
    rel_tol: float = DEFAULT_TOLERANCES.rank_rel,
) -> Tetrahedron:
    """Draw a random member of the null space as a tetrahedron.

    Coefficients are drawn uniformly from the unit sphere of the null space
    and the result is scaled to unit RMS vertex norm, so invariant checks
    are scale free.  `seed` may be an int or a numpy Generator.  The
    projection of the rotated result matches the projection of the result
    itself under the canonical permutation of the class.
    """
    config_dimension(q, perm_class, rel_tol)  # rejects the identity rotation
    basis = null_space_basis(build_config_matrix(q, perm_class), rel_tol)
    if basis.shape[0] == 0:
        raise ValueError("the null space is empty, nothing to sample")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    coeffs = rng.standard_normal(basis.shape[0])
    norm = np.linalg.norm(coeffs)
    while norm == 0.0:
        coeffs = rng.standard_normal(basis.shape[0])
        norm = np.linalg.norm(coeffs)
    vec = (coeffs / norm) @ basis
    p123 = vec.reshape(3, 3)
    verts = np.vstack([p123, -p123.sum(axis=0)])
    rms = math.sqrt(float(np.mean(np.sum(verts * verts, axis=1))))
    return Tetrahedron(verts / rms)


@dataclass(frozen=True, eq=False)
class MidpointFrame:
    """Midpoints of the three edges from the first vertex.

    For a centred tetrahedron these determine the vertices linearly:
    p1 = n2+n3+n4, p2 = n2-n3-n4, p3 = -n2+n3-n4, p4 = -n2-n3+n4.
    """

    n2: np.ndarray
    n3: np.ndarray
    n4: np.ndarray

    def vertices(self) -> np.ndarray:
        return np.vstack([
            self.n2 + self.n3 + self.n4,
            self.n2 - self.n3 - self.n4,
            -self.n2 + self.n3 - self.n4,
            -self.n2 - self.n3 + self.n4,
        ])


def midpoint_frame(tetra: Tetrahedron) -> MidpointFrame:
    """Edge midpoints (p1+pi)/2, i = 2, 3, 4, in the centred combination form."""
    p1, p2, p3, p4 = tetra.vertices
    return MidpointFrame(
        n2=(p1 + p2 - p3 - p4) / 4.0,
        n3=(p1 - p2 + p3 - p4) / 4.0,
        n4=(p1 - p2 - p3 + p4) / 4.0,
    )


def verify_fourcycle_relations(
    tetra: Tetrahedron, q: UnitQuaternion, tol: float = DEFAULT_TOLERANCES.geom_abs
) -> bool:
    """Check the midpoint identities of four-cycle ambiguous tetrahedra.

    A member of the four-cycle null space satisfies, up to vertical shifts,
    phi(n2) = -n4, phi(n3) = -n3 and phi(n4) = n2.  The check compares the
    first two coordinates of each identity against tol.
    """
    r = quat_to_matrix(q)
    f = midpoint_frame(tetra)
    residual = max(
        float(np.max(np.abs((r @ f.n2 + f.n4)[:2]))),
        float(np.max(np.abs((r @ f.n3 + f.n3)[:2]))),
        float(np.max(np.abs((r @ f.n4 - f.n2)[:2]))),
    )
    return residual <= tol


def fourcycle_lambda(tetra: Tetrahedron, q: UnitQuaternion) -> tuple[float, float]:
    """Measured and predicted offset of the projected n3 midpoint.

    For a genuine four-cycle member with an oblique axis and angle in
    (0, pi), the image of n3 under the parallel projection along +z onto
    the plane through the origin orthogonal to the axis has norm
    ||proj(c3)|| * tan(alpha/2), where c3 is the orthogonal projection of
    n3 onto the axis line.  Returns (measured, predicted).
    """
    axis_class, alpha = classify_rotation(q)
    if axis_class is not AxisClass.OBLIQUE:
        raise ValueError("the offset scalar is defined for oblique axes only")
    if not alpha < HALF_TURN - DEFAULT_TOLERANCES.angle_abs:
        raise ValueError("the offset scalar requires an angle strictly below a half turn")
    w = quat_to_axis_angle(q).axis
    n3 = midpoint_frame(tetra).n3
    c3 = float(n3 @ w) * w
    e3 = np.array([0.0, 0.0, 1.0])

    def proj(x: np.ndarray) -> np.ndarray:
        return x - (float(x @ w) / w[2]) * e3

    measured = float(np.linalg.norm(proj(n3)))
    predicted = float(np.linalg.norm(proj(c3))) * math.tan(alpha / 2.0)
    return measured, predicted


@dataclass(frozen=True)
class CaseCell:
    """One sampling cell of the dimension table.

    `angle` is either an exact special angle in radians or a (lo, hi)
    sampling range; `expected_dim` is the table value for the cell.
    """

    perm_class: PermClass
    axis_class: AxisClass
    angle: float | tuple[float, float]
    expected_dim: int

    def label(self) -> str:
        if isinstance(self.angle, tuple):
            angle = f"angle in ({self.angle[0]:.2f}, {self.angle[1]:.2f})"
        else:
            angle = case_label(self.axis_class, self.angle).split("-", 1)[-1]
        return f"{self.perm_class.value} / {self.axis_class.value} / {angle}"


_GENERIC = (0.1, 3.0)        # clear of 0 and of the half-turn
_FULL_RANGE = (0.1, math.pi)  # classes whose horizontal cell does not split

CLASSIFICATION_CELLS: tuple[CaseCell, ...] = (
    CaseCell(PermClass.IDENTITY, AxisClass.OBLIQUE, _GENERIC, 3),
    CaseCell(PermClass.IDENTITY, AxisClass.HORIZONTAL, _FULL_RANGE, 6),
    CaseCell(PermClass.TWO_CYCLE, AxisClass.OBLIQUE, _GENERIC, 3),
    CaseCell(PermClass.TWO_CYCLE, AxisClass.HORIZONTAL, _GENERIC, 5),
    CaseCell(PermClass.TWO_CYCLE, AxisClass.HORIZONTAL, HALF_TURN, 6),
    CaseCell(PermClass.TWO_CYCLE, AxisClass.VERTICAL, HALF_TURN, 5),
    CaseCell(PermClass.TWO_CYCLE, AxisClass.OBLIQUE, HALF_TURN, 4),
    CaseCell(PermClass.DOUBLE_TWO_CYCLE, AxisClass.OBLIQUE, _GENERIC, 3),
    CaseCell(PermClass.DOUBLE_TWO_CYCLE, AxisClass.HORIZONTAL, _GENERIC, 4),
    CaseCell(PermClass.DOUBLE_TWO_CYCLE, AxisClass.HORIZONTAL, HALF_TURN, 6),
    CaseCell(PermClass.DOUBLE_TWO_CYCLE, AxisClass.VERTICAL, HALF_TURN, 7),
    CaseCell(PermClass.DOUBLE_TWO_CYCLE, AxisClass.OBLIQUE, HALF_TURN, 5),
    CaseCell(PermClass.THREE_CYCLE, AxisClass.OBLIQUE, _GENERIC, 3),
    CaseCell(PermClass.THREE_CYCLE, AxisClass.HORIZONTAL, _FULL_RANGE, 4),
    CaseCell(PermClass.THREE_CYCLE, AxisClass.VERTICAL, THIRD_TURN, 5),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.OBLIQUE, _GENERIC, 3),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.VERTICAL, QUARTER_TURN, 5),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.VERTICAL, HALF_TURN, 5),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.OBLIQUE, HALF_TURN, 4),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.HORIZONTAL, _GENERIC, 3),
    CaseCell(PermClass.FOUR_CYCLE, AxisClass.HORIZONTAL, HALF_TURN, 4),
)


def sample_cell_rotation(cell: CaseCell, rng: np.random.Generator) -> UnitQuaternion:
    """Random rotation inside a case cell, well clear of the cell boundaries."""
    if cell.axis_class is AxisClass.VERTICAL:
        axis = np.array([0.0, 0.0, 1.0])
    elif cell.axis_class is AxisClass.HORIZONTAL:
        theta = rng.uniform(0.0, 2.0 * math.pi)
        axis = np.array([math.cos(theta), math.sin(theta), 0.0])
    else:
        z = rng.uniform(0.15, 0.85) * rng.choice([-1.0, 1.0])
        theta = rng.uniform(0.0, 2.0 * math.pi)
        rad = math.sqrt(1.0 - z * z)
        axis = np.array([rad * math.cos(theta), rad * math.sin(theta), z])
    if isinstance(cell.angle, tuple):
        alpha = rng.uniform(*cell.angle)
    else:
        alpha = cell.angle
    return quat_from_axis_angle(axis, alpha)
