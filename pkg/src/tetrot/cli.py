"""Command-line front end: JSON in, JSON out.

Commands
    solve        recover rotations from a tetrahedron file and a projection file
    analyze      rank and dimension report for one rotation and relabeling class
    sample       draw ambiguous tetrahedra from a null space
    verify-dims  sweep the dimension table against random rotations
    reproduce    replay a bundled worked instance and check the expected values

Exit codes: 0 success / match, 1 semantic failure (no solution or mismatch),
2 usage or parse error.  Identical arguments, including the seed, produce
byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .configspace import (
    CLASSIFICATION_CELLS,
    case_label,
    config_dimension,
    numeric_rank,
    build_config_matrix,
    predicted_dimension,
    sample_cell_rotation,
    sample_tetrahedron,
)
from .geom import (
    CANONICAL_PERMUTATION,
    IDENTITY_PERMUTATION,
    PermClass,
    ProjectionQuad,
    Tetrahedron,
    Tolerances,
    project,
    quad_match,
)
from .instances import four_cycle_instance, norm_prune_instance, planar_instance
from .rotation import AxisClass, UnitQuaternion, apply, classify_rotation, quat_from_axis_angle
from .solver import SolveCandidate, labeled_solve, prune_permutations, unlabeled_solve

__all__ = ["RunConfig", "main"]

_REPRODUCE_NAMES = ("four-cycle", "norm-prune", "planar", "uniqueness-sweep")


@dataclass(frozen=True)
class RunConfig:
    """Resolved command invocation: tolerances, trial count and seed."""

    command: str
    tolerances: Tolerances
    trials: int
    seed: int
    fmt: str

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def _load_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def parse_tetrahedron(obj) -> Tetrahedron:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise ValueError('tetrahedron input must be {"vertices": [[x, y, z] * 4]}')
    return Tetrahedron(obj["vertices"])


def parse_projection(obj) -> ProjectionQuad:
    if not isinstance(obj, dict) or "points" not in obj:
        raise ValueError('projection input must be {"points": [[x, y] * 4]}')
    return ProjectionQuad(obj["points"])


def parse_rotation(obj) -> UnitQuaternion:
    if isinstance(obj, dict) and "quaternion" in obj:
        comps = obj["quaternion"]
        if len(comps) != 4:
            raise ValueError("quaternion must have four components")
        return UnitQuaternion.normalized(*(float(x) for x in comps))
    if isinstance(obj, dict) and "axis" in obj and "angle_rad" in obj:
        axis = np.asarray(obj["axis"], dtype=float)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise ValueError("rotation axis must be nonzero")
        return quat_from_axis_angle(axis / norm, float(obj["angle_rad"]))
    raise ValueError('rotation input must carry "quaternion" or "axis" + "angle_rad"')


def _tolerances(args: argparse.Namespace) -> Tolerances:
    return Tolerances(
        rank_rel=args.tol_rank,
        geom_abs=args.tol_geom,
        angle_abs=args.tol_angle,
    )


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        tolerances=_tolerances(args),
        trials=getattr(args, "trials", 1),
        seed=args.seed,
        fmt=args.format,
    )


def _candidate_json(cand: SolveCandidate) -> dict:
    return {
        "sigma": list(cand.sigma.images),
        "quaternion": list(cand.rotation.as_array()),
        "matrix": cand.matrix.tolist(),
        "residual": cand.residual,
        "planar_ambiguous": cand.planar_ambiguous,
    }


def _emit(report: dict) -> None:
    print(json.dumps(report, indent=2))


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _config(args)
    tetra = parse_tetrahedron(_load_json(args.tetrahedron))
    quad = parse_projection(_load_json(args.projection))
    if args.labeled:
        candidates = labeled_solve(tetra, quad, config.tolerances)
    else:
        candidates = unlabeled_solve(tetra, quad, config.tolerances)
    _emit({
        "command": "solve",
        "labeled": bool(args.labeled),
        "candidates": [_candidate_json(c) for c in candidates],
    })
    return 0 if candidates else 1


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = _config(args)
    rotation = parse_rotation(_load_json(args.rotation))
    perm_class = PermClass(args.perm_class)
    axis_class, alpha = classify_rotation(rotation, config.tolerances.angle_abs)
    if axis_class is AxisClass.NO_AXIS:
        raise ValueError("the identity rotation cannot be analyzed")
    rank = numeric_rank(build_config_matrix(rotation, perm_class), config.tolerances.rank_rel)
    computed = 9 - rank
    predicted = predicted_dimension(perm_class, axis_class, alpha, config.tolerances.angle_abs)
    _emit({
        "command": "analyze",
        "perm_class": perm_class.value,
        "axis_class": axis_class.value,
        "angle_rad": alpha,
        "case": case_label(axis_class, alpha, config.tolerances.angle_abs),
        "rank": rank,
        "computed_dim": computed,
        "predicted_dim": predicted,
    })
    return 0 if computed == predicted else 1


def _cmd_sample(args: argparse.Namespace) -> int:
    config = _config(args)
    rotation = parse_rotation(_load_json(args.rotation))
    perm_class = PermClass(args.perm_class)
    sigma = CANONICAL_PERMUTATION[perm_class]
    samples = []
    all_ok = True
    for trial in range(config.trials):
        rng = np.random.default_rng([config.seed, trial])
        tetra = sample_tetrahedron(rotation, perm_class, rng, config.tolerances.rank_rel)
        shadow = project(tetra)
        rotated = ProjectionQuad(apply(rotation, tetra.vertices)[:, :2])
        reordered = shadow.points[list(sigma.zero_based())]
        residual = float(np.max(np.linalg.norm(rotated.points - reordered, axis=1)))
        ok = residual <= config.tolerances.geom_abs
        all_ok = all_ok and ok
        samples.append({
            "vertices": tetra.vertices.tolist(),
            "match_residual": residual,
            "ok": ok,
        })
    _emit({
        "command": "sample",
        "perm_class": perm_class.value,
        "sigma": list(sigma.images),
        "quaternion": list(rotation.as_array()),
        "seed": config.seed,
        "samples": samples,
    })
    return 0 if all_ok else 1


def _cmd_verify_dims(args: argparse.Namespace) -> int:
    config = _config(args)
    cells = []
    total_mismatches = 0
    for index, cell in enumerate(CLASSIFICATION_CELLS):
        mismatches = 0
        for trial in range(config.trials):
            rng = np.random.default_rng([config.seed, index, trial])
            rotation = sample_cell_rotation(cell, rng)
            computed = config_dimension(rotation, cell.perm_class, config.tolerances.rank_rel)
            if computed != cell.expected_dim:
                mismatches += 1
        total_mismatches += mismatches
        cells.append({
            "cell": cell.label(),
            "expected_dim": cell.expected_dim,
            "trials": config.trials,
            "mismatches": mismatches,
        })
    _emit({
        "command": "verify-dims",
        "seed": config.seed,
        "cells": cells,
        "ok": total_mismatches == 0,
    })
    return 0 if total_mismatches == 0 else 1


def _cmd_reproduce(args: argparse.Namespace) -> int:
    config = _config(args)
    name = args.name
    if name == "four-cycle":
        return _reproduce_four_cycle(config)
    if name == "norm-prune":
        return _reproduce_norm_prune(config)
    if name == "planar":
        return _reproduce_planar(config)
    if name == "uniqueness-sweep":
        return _reproduce_uniqueness_sweep(config)
    raise ValueError(f"unknown instance name {name!r}")


def _reproduce_four_cycle(config: RunConfig) -> int:
    inst = four_cycle_instance()
    rotated = apply(inst.rotation, inst.tetrahedron.vertices)
    vertex_err = float(np.max(np.abs(rotated - inst.rotated_vertices)))
    candidates = unlabeled_solve(inst.tetrahedron, inst.projection, config.tolerances)
    matrix_err = math.inf
    for cand in candidates:
        if cand.sigma == inst.sigma:
            matrix_err = min(matrix_err, float(np.linalg.norm(cand.matrix - inst.matrix)))
    ok = vertex_err <= 1e-12 and matrix_err <= 1e-10
    _emit({
        "command": "reproduce",
        "name": "four-cycle",
        "expected_rotated_vertices": inst.rotated_vertices.tolist(),
        "computed_rotated_vertices": rotated.tolist(),
        "max_vertex_error": vertex_err,
        "expected_sigma": list(inst.sigma.images),
        "matrix_error": matrix_err,
        "candidates": len(candidates),
        "ok": ok,
    })
    return 0 if ok else 1


def _reproduce_norm_prune(config: RunConfig) -> int:
    inst = norm_prune_instance()
    survivors = prune_permutations(inst.vertices, inst.projection, config.tolerances.geom_abs)
    ok = survivors == [IDENTITY_PERMUTATION]
    _emit({
        "command": "reproduce",
        "name": "norm-prune",
        "survivors": [list(s.images) for s in survivors],
        "ok": ok,
    })
    return 0 if ok else 1


def _reproduce_planar(config: RunConfig) -> int:
    inst = planar_instance()
    candidates = unlabeled_solve(inst.tetrahedron, inst.projection, config.tolerances)
    swap = [c for c in candidates if c.sigma == inst.swap_sigma]
    errors = []
    for expected in inst.matrices:
        best = min(
            (float(np.linalg.norm(c.matrix - expected)) for c in swap),
            default=math.inf,
        )
        errors.append(best)
    ok = len(swap) == 2 and max(errors, default=math.inf) <= 1e-10
    _emit({
        "command": "reproduce",
        "name": "planar",
        "swap_sigma": list(inst.swap_sigma.images),
        "swap_candidates": [_candidate_json(c) for c in swap],
        "matrix_errors": errors,
        "ok": ok,
    })
    return 0 if ok else 1


def _reproduce_uniqueness_sweep(config: RunConfig) -> int:
    spurious = 0
    identity = np.eye(3)
    for trial in range(config.trials):
        rng = np.random.default_rng([config.seed, trial])
        tetra = Tetrahedron(rng.standard_normal((4, 3)))
        while not tetra.full_dimensional(config.tolerances.rank_rel):
            tetra = Tetrahedron(rng.standard_normal((4, 3)))
        candidates = unlabeled_solve(tetra, project(tetra), config.tolerances)
        for cand in candidates:
            if cand.residual <= 1e-8 and float(np.linalg.norm(cand.matrix - identity)) > 1e-6:
                spurious += 1
    _emit({
        "command": "reproduce",
        "name": "uniqueness-sweep",
        "trials": config.trials,
        "spurious_non_identity": spurious,
        "ok": spurious == 0,
    })
    return 0 if spurious == 0 else 1


def _add_common(parser: argparse.ArgumentParser, trials_default: int | None = None) -> None:
    parser.add_argument("--tol-rank", type=float, default=Tolerances().rank_rel,
                        help="relative singular-value cutoff for rank decisions")
    parser.add_argument("--tol-geom", type=float, default=Tolerances().geom_abs,
                        help="absolute tolerance for projected-point matches")
    parser.add_argument("--tol-angle", type=float, default=Tolerances().angle_abs,
                        help="tolerance for axis components and special angles")
    parser.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
    if trials_default is not None:
        parser.add_argument("--trials", type=int, default=trials_default,
                            help="number of random trials or samples")
    parser.add_argument("--format", choices=["json"], default="json",
                        help="report format (only json)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tetrot",
        description="Recover tetrahedron rotations from orthographic projections "
                    "and analyze the relabeling ambiguities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="recover rotations from tetrahedron and projection files")
    solve.add_argument("--tetrahedron", required=True, help='JSON file {"vertices": ...} or -')
    solve.add_argument("--projection", required=True, help='JSON file {"points": ...} or -')
    solve.add_argument("--labeled", action="store_true",
                       help="match projection point i to vertex i instead of trying all relabelings")
    _add_common(solve)
    solve.set_defaults(func=_cmd_solve)

    analyze = sub.add_parser("analyze", help="rank and dimension report for one rotation")
    analyze.add_argument("--rotation", required=True,
                         help='JSON file {"quaternion": ...} or {"axis": ..., "angle_rad": ...} or -')
    analyze.add_argument("--perm-class", required=True, choices=[c.value for c in PermClass])
    _add_common(analyze)
    analyze.set_defaults(func=_cmd_analyze)

    sample = sub.add_parser("sample", help="draw ambiguous tetrahedra for a rotation and class")
    sample.add_argument("--rotation", required=True)
    sample.add_argument("--perm-class", required=True, choices=[c.value for c in PermClass])
    _add_common(sample, trials_default=1)
    sample.set_defaults(func=_cmd_sample)

    verify = sub.add_parser("verify-dims", help="sweep the dimension table with random rotations")
    _add_common(verify, trials_default=100)
    verify.set_defaults(func=_cmd_verify_dims)

    reproduce = sub.add_parser("reproduce", help="replay a bundled worked instance")
    reproduce.add_argument("name", choices=_REPRODUCE_NAMES)
    _add_common(reproduce, trials_default=100)
    reproduce.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
