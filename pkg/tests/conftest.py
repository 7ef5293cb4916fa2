"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from tetrot import Tetrahedron, UnitQuaternion


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    vec = rng.standard_normal(4)
    norm = np.linalg.norm(vec)
    while norm < 1e-6:
        vec = rng.standard_normal(4)
        norm = np.linalg.norm(vec)
    return UnitQuaternion.normalized(*vec)


def random_full_dim_tetrahedron(rng: np.random.Generator, min_ratio: float = 1e-6) -> Tetrahedron:
    while True:
        tetra = Tetrahedron(rng.standard_normal((4, 3)))
        s = np.linalg.svd(tetra.vertices[:3], compute_uv=False)
        if s[2] > min_ratio * s[0]:
            return tetra
