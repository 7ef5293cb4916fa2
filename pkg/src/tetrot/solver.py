"""Rotation recovery from a tetrahedron and a projection of its rotated image.

Two independent routes are provided for the labeled problem.  The linear
route exploits that the first two rows of the rotation matrix satisfy
r1 . p_i = x_i and r2 . p_i = y_i for the first three vertices (the fourth
equation is implied by the centroid condition).  The geometric route
reconstructs the projected circumcircle of the first three vertices as an
ellipse through six constructible points and lifts it back to space.  The
unlabeled solver enumerates the surviving vertex relabelings and runs the
labeled solver on each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geom import (
    ALL_PERMUTATIONS,
    DEFAULT_TOLERANCES,
    IDENTITY_PERMUTATION,
    Permutation4,
    ProjectionQuad,
    Tetrahedron,
    Tolerances,
    as_finite_array,
)
from .rotation import UnitQuaternion, matrix_to_quat, quat_to_matrix

__all__ = [
    "Circle3D",
    "CollinearPointsError",
    "Conic",
    "DegenerateChordError",
    "DegenerateTetrahedronError",
    "DegenerateViewError",
    "SolveCandidate",
    "circumcircle3",
    "dedupe_rotations",
    "fit_conic",
    "labeled_solve",
    "prune_permutations",
    "reconstruct_geometric",
    "unlabeled_solve",
]

# Orthonormality acceptance for solved matrix rows; looser than machine
# precision to absorb the conditioning of near-planar tetrahedra.  The
# residual check against the observed projection is the final gate.
_ORTHO_ATOL = 1e-7
_SNAP_ATOL = 1e-6


class DegenerateTetrahedronError(ValueError):
    """Vertex set spans less than a plane; no rotation is recoverable."""


class CollinearPointsError(ValueError):
    """Points in degenerate position for a circle or conic construction."""


class DegenerateViewError(ValueError):
    """The projected circumcircle does not fit a usable ellipse."""


class DegenerateChordError(ValueError):
    """A chord of the reconstruction collapses; the ratio transfer is ill posed."""


@dataclass(frozen=True, eq=False)
class SolveCandidate:
    """One compatible rotation: relabeling, rotation, and its fit residual."""

    sigma: Permutation4
    rotation: UnitQuaternion
    matrix: np.ndarray
    residual: float
    planar_ambiguous: bool


@dataclass(frozen=True, eq=False)
class Circle3D:
    """Circle in space given by center, radius and unit normal."""

    center: np.ndarray
    radius: float
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class Conic:
    """Plane conic A x^2 + B xy + C y^2 + D x + E y + F = 0.

    Coefficients are normalized to unit Euclidean norm with the first
    nonzero coefficient positive.
    """

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        v = as_finite_array(self.coefficients, (6,), "coefficients")
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError("conic coefficients must not all vanish")
        v = v / norm
        for x in v:
            if abs(x) > 1e-12:
                if x < 0:
                    v = -v
                break
        v.flags.writeable = False
        object.__setattr__(self, "coefficients", v)

    def is_ellipse(self) -> bool:
        a, b, c = self.coefficients[:3]
        return bool(b * b - 4.0 * a * c < 0.0)


def _projection_residual(vertices: np.ndarray, r: np.ndarray, points: np.ndarray) -> float:
    proj = (vertices @ r.T)[:, :2]
    return float(np.max(np.linalg.norm(proj - points, axis=1)))


def _candidate(
    tetra: Tetrahedron,
    target: ProjectionQuad,
    r: np.ndarray,
    planar: bool,
    tol: Tolerances,
) -> SolveCandidate | None:
    """Snap a near-rotation to an exact one and gate it on the residual."""
    try:
        q = matrix_to_quat(r, atol=_SNAP_ATOL)
    except ValueError:
        return None
    snapped = quat_to_matrix(q)
    residual = _projection_residual(tetra.vertices, snapped, target.points)
    if residual > tol.geom_abs:
        return None
    snapped.flags.writeable = False
    return SolveCandidate(IDENTITY_PERMUTATION, q, snapped, residual, planar)


def labeled_solve(
    tetra: Tetrahedron,
    quad: ProjectionQuad,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[SolveCandidate]:
    """Rotations mapping vertex i onto projection point i, for all i.

    A full-dimensional tetrahedron admits at most one candidate; a planar
    one admits up to two (completions of the in-plane row components along
    the plane normal), flagged planar_ambiguous.  An empty list means the
    quad is not realizable.  Vertex sets spanning less than a plane are
    rejected.
    """
    p3 = tetra.vertices[:3]
    _, s, vt = np.linalg.svd(p3)
    if s[0] == 0.0 or s[1] <= tol.rank_rel * s[0]:
        raise DegenerateTetrahedronError("vertices span less than a plane")
    x = quad.points[:3, 0]
    y = quad.points[:3, 1]

    if s[2] > tol.rank_rel * s[0]:
        r1 = np.linalg.solve(p3, x)
        r2 = np.linalg.solve(p3, y)
        if (
            abs(np.linalg.norm(r1) - 1.0) > _ORTHO_ATOL
            or abs(np.linalg.norm(r2) - 1.0) > _ORTHO_ATOL
            or abs(float(r1 @ r2)) > _ORTHO_ATOL
        ):
            return []
        matrices = [np.vstack([r1, r2, np.cross(r1, r2)])]
        planar = False
    else:
        matrices = _planar_completions(p3, vt, x, y, tol)
        planar = True

    out = []
    for m in matrices:
        cand = _candidate(tetra, quad, m, planar, tol)
        if cand is not None:
            out.append(cand)
    return _merge_close(out, tol.dedupe)


def _planar_completions(
    p3: np.ndarray, vt: np.ndarray, x: np.ndarray, y: np.ndarray, tol: Tolerances
) -> list[np.ndarray]:
    """Row completions for a planar vertex set.

    The in-plane components v1, v2 of the first two matrix rows are fixed
    by the data; the out-of-plane components (s, t) satisfy s^2 = 1-|v1|^2,
    t^2 = 1-|v2|^2 and v1.v2 + s t = 0, which leaves at most two sign
    choices.
    """
    basis = vt[:2]
    normal = vt[2]
    coords = p3 @ basis.T
    v1b, *_ = np.linalg.lstsq(coords, x, rcond=None)
    v2b, *_ = np.linalg.lstsq(coords, y, rcond=None)
    v1 = v1b @ basis
    v2 = v2b @ basis
    s2 = 1.0 - float(v1 @ v1)
    t2 = 1.0 - float(v2 @ v2)
    if s2 < -_ORTHO_ATOL or t2 < -_ORTHO_ATOL:
        return []
    s0 = math.sqrt(max(s2, 0.0))
    t0 = math.sqrt(max(t2, 0.0))
    cross = float(v1 @ v2)
    matrices = []
    for sgn_s in (1.0, -1.0):
        for sgn_t in (1.0, -1.0):
            s, t = sgn_s * s0, sgn_t * t0
            if abs(cross + s * t) > _ORTHO_ATOL:
                continue
            r1 = v1 + s * normal
            r2 = v2 + t * normal
            m = np.vstack([r1, r2, np.cross(r1, r2)])
            if all(np.linalg.norm(m - seen) > tol.dedupe for seen in matrices):
                matrices.append(m)
    return matrices


def circumcircle3(p, q, r, rel_tol: float = DEFAULT_TOLERANCES.rank_rel) -> Circle3D:
    """Circle through three non-collinear points in space."""
    a = as_finite_array(p, (3,), "p")
    b = as_finite_array(q, (3,), "q")
    c = as_finite_array(r, (3,), "r")
    d1 = b - a
    d2 = c - a
    normal = np.cross(d1, d2)
    scale = max(float(np.linalg.norm(d1)), float(np.linalg.norm(d2)))
    area = float(np.linalg.norm(normal))
    if scale == 0.0 or area <= rel_tol * scale * scale:
        raise CollinearPointsError("circumcircle needs three non-collinear points")
    gram = np.array([[d1 @ d1, d1 @ d2], [d1 @ d2, d2 @ d2]])
    rhs = 0.5 * np.array([d1 @ d1, d2 @ d2])
    alpha, beta = np.linalg.solve(gram, rhs)
    offset = alpha * d1 + beta * d2
    normal = normal / area
    for x in normal:
        if abs(x) > 1e-12:
            if x < 0:
                normal = -normal
            break
    return Circle3D(center=a + offset, radius=float(np.linalg.norm(offset)), normal=normal)


def fit_conic(points, rel_tol: float = DEFAULT_TOLERANCES.rank_rel) -> Conic:
    """Least-squares conic through five or more plane points.

    The conic is the null vector of the design matrix with rows
    (x^2, xy, y^2, x, y, 1).  Points are shifted and scaled internally for
    conditioning; coefficients are returned in the original frame.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 5:
        raise ValueError("need at least five plane points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    mean = pts.mean(axis=0)
    spread = float(np.sqrt(np.mean(np.sum((pts - mean) ** 2, axis=1))))
    if spread == 0.0:
        raise CollinearPointsError("coincident points do not determine a conic")
    norm_pts = (pts - mean) / spread
    xs, ys = norm_pts[:, 0], norm_pts[:, 1]
    design = np.column_stack([xs * xs, xs * ys, ys * ys, xs, ys, np.ones_like(xs)])
    _, s, vh = np.linalg.svd(design)
    if s[-2] <= rel_tol * s[0]:
        raise CollinearPointsError("points in degenerate position, conic is not unique")
    a, b, c, d, e, f = vh[-1]
    # undo the normalization x = (X - mx)/w, y = (Y - my)/w
    w = spread
    mx, my = mean
    coeffs = np.array([
        a,
        b,
        c,
        w * d - 2 * a * mx - b * my,
        w * e - 2 * c * my - b * mx,
        a * mx * mx + b * mx * my + c * my * my - w * d * mx - w * e * my + w * w * f,
    ])
    return Conic(coeffs)


def _ellipse_geometry(conic: Conic) -> tuple[np.ndarray, float, float, np.ndarray]:
    """Center, semi-major, semi-minor and major-axis direction of an ellipse."""
    if not conic.is_ellipse():
        raise DegenerateViewError("fitted conic is not an ellipse")
    a, b, c, d, e, f = conic.coefficients
    if a + c < 0:
        a, b, c, d, e, f = -conic.coefficients
    center = np.linalg.solve(np.array([[2 * a, b], [b, 2 * c]]), np.array([-d, -e]))
    cx, cy = center
    level = -(a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f)
    if level <= 0:
        raise DegenerateViewError("conic has no real ellipse points")
    quad = np.array([[a, b / 2], [b / 2, c]])
    eigvals, eigvecs = np.linalg.eigh(quad)
    r_major = math.sqrt(level / eigvals[0])
    r_minor = math.sqrt(level / eigvals[1])
    return center, r_major, r_minor, eigvecs[:, 0]


def _frame(points: np.ndarray) -> np.ndarray:
    """Right-handed orthonormal frame adapted to three non-collinear points."""
    e1 = points[1] - points[0]
    e1 = e1 / np.linalg.norm(e1)
    e2 = points[2] - points[0]
    e2 = e2 - (e2 @ e1) * e1
    e2 = e2 / np.linalg.norm(e2)
    return np.column_stack([e1, e2, np.cross(e1, e2)])


def reconstruct_geometric(
    tetra: Tetrahedron,
    quad: ProjectionQuad,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[SolveCandidate]:
    """Labeled recovery through the projected-circumcircle construction.

    Steps: circumscribe the first three vertices; transfer each vertex
    chord through its opposite edge midpoint to a second circle point; map
    the six points to the projection by the invariant chord ratio; fit the
    ellipse they span; lift it to the two circle planes that project onto
    it (mirror images in the projection plane); extend each lift to a
    rigid image of the whole tetrahedron and keep the lifts whose induced
    linear map is a rotation reproducing the observed projection.

    Requires a full-dimensional tetrahedron and a non-degenerate view.
    Agrees with labeled_solve where both apply.
    """
    if not tetra.full_dimensional(tol.rank_rel):
        raise DegenerateTetrahedronError("geometric reconstruction needs a full-dimensional tetrahedron")
    p3 = tetra.vertices[:3]
    p4 = tetra.vertices[3]
    circle = circumcircle3(*p3, rel_tol=tol.rank_rel)

    u3 = quad.points[:3]
    e1, e2 = u3[1] - u3[0], u3[2] - u3[0]
    area2 = abs(float(e1[0] * e2[1] - e1[1] * e2[0]))
    uscale = max(float(np.linalg.norm(u3[1] - u3[0])), float(np.linalg.norm(u3[2] - u3[0])))
    if uscale == 0.0 or area2 <= tol.rank_rel * uscale * uscale:
        raise CollinearPointsError("projected points are collinear")

    six = [u3[0], u3[1], u3[2]]
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        mid3 = 0.5 * (p3[j] + p3[k])
        chord = mid3 - p3[i]
        chord_len = float(np.linalg.norm(chord))
        if chord_len <= tol.rank_rel * circle.radius:
            raise DegenerateChordError("vertex coincides with the opposite edge midpoint")
        # second intersection of the chord line with the circle, as the
        # affine parameter along p_i -> mid; parameters transfer to the
        # projection unchanged
        ratio = -2.0 * float((p3[i] - circle.center) @ chord) / (chord_len * chord_len)
        mid2 = 0.5 * (quad.points[j] + quad.points[k])
        if float(np.linalg.norm(mid2 - quad.points[i])) <= tol.rank_rel * uscale:
            raise DegenerateChordError("projected chord collapses to a point")
        six.append(quad.points[i] + ratio * (mid2 - quad.points[i]))

    conic = fit_conic(six, rel_tol=tol.rank_rel)
    center2, r_major, r_minor, dir_major = _ellipse_geometry(conic)
    tilt = min(r_minor / r_major, 1.0)
    if tilt <= 1e-6:
        raise DegenerateViewError("projected circumcircle is seen edge on")
    minor_dir = np.array([-dir_major[1], dir_major[0]])
    horiz = math.sqrt(max(1.0 - tilt * tilt, 0.0))

    out: list[SolveCandidate] = []
    for sign in (1.0, -1.0):
        normal = np.array([sign * horiz * minor_dir[0], sign * horiz * minor_dir[1], tilt])
        # lift each projected vertex to the plane through (center2, 0)
        lifted = np.empty((3, 3))
        lifted[:, :2] = u3
        lifted[:, 2] = (center2 - u3) @ normal[:2] / normal[2]
        rigid = _frame(lifted) @ _frame(p3).T
        image4 = lifted[0] + rigid @ (p4 - p3[0])
        images = np.vstack([lifted, image4])
        images = images - images.mean(axis=0)
        r = np.linalg.solve(p3, images[:3]).T
        cand = _candidate(tetra, quad, r, planar=False, tol=tol)
        if cand is not None:
            out.append(cand)
    return _merge_close(out, tol.dedupe)


def prune_permutations(
    vertices,
    quad: ProjectionQuad,
    tol_abs: float = DEFAULT_TOLERANCES.geom_abs,
) -> list[Permutation4]:
    """Relabelings not excluded by the norm test.

    A projection never exceeds the norm of its source point, so sigma can
    only match when ||u_sigma(i)|| <= ||p_i|| for every i.  Operates on the
    coordinates as given, without recentring.
    """
    v = as_finite_array(vertices, (4, 3), "vertices")
    vertex_norms = np.linalg.norm(v, axis=1)
    point_norms = np.linalg.norm(quad.points, axis=1)
    allowed = point_norms[None, :] <= vertex_norms[:, None] + tol_abs
    survivors = []
    for sigma in ALL_PERMUTATIONS:
        idx = sigma.zero_based()
        if all(allowed[i, idx[i]] for i in range(4)):
            survivors.append(sigma)
    return survivors


def unlabeled_solve(
    tetra: Tetrahedron,
    quad: ProjectionQuad,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[SolveCandidate]:
    """All rotations compatible with the projection under some relabeling.

    Runs the labeled solver on every relabeling that survives the norm
    pruning, so at most 24 branches contribute.  Near-identical rotations
    are merged per relabeling; the result is ordered by relabeling and
    residual.  An empty list means no rotation is compatible.
    """
    out: list[SolveCandidate] = []
    for sigma in prune_permutations(tetra.vertices, quad, tol.geom_abs):
        reordered = ProjectionQuad(quad.points[list(sigma.zero_based())])
        for cand in labeled_solve(tetra, reordered, tol):
            out.append(replace(cand, sigma=sigma))
    return dedupe_rotations(out, tol.dedupe)


def dedupe_rotations(
    candidates: list[SolveCandidate],
    dedupe_tol: float = DEFAULT_TOLERANCES.dedupe,
) -> list[SolveCandidate]:
    """Merge candidates with the same relabeling and nearly equal matrices.

    Within each relabeling, matrices closer than dedupe_tol in Frobenius
    norm collapse to the representative with the smallest residual.  The
    output is sorted by relabeling images, then residual.
    """
    by_sigma: dict[tuple[int, int, int, int], list[SolveCandidate]] = {}
    for cand in candidates:
        by_sigma.setdefault(cand.sigma.images, []).append(cand)
    merged: list[SolveCandidate] = []
    for images in sorted(by_sigma):
        kept: list[SolveCandidate] = []
        for cand in sorted(by_sigma[images], key=lambda c: c.residual):
            if all(np.linalg.norm(cand.matrix - k.matrix) >= dedupe_tol for k in kept):
                kept.append(cand)
        merged.extend(kept)
    return merged


def _merge_close(candidates: list[SolveCandidate], dedupe_tol: float) -> list[SolveCandidate]:
    kept: list[SolveCandidate] = []
    for cand in sorted(candidates, key=lambda c: c.residual):
        if all(np.linalg.norm(cand.matrix - k.matrix) >= dedupe_tol for k in kept):
            kept.append(cand)
    return kept
