"""Rotation sample sets: exact Euler grids, the icosahedral group and FPS sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harmonics import rotation_angle, rotations_from_euler


@dataclass(frozen=True)
class RotationSampleSet:
    """Rotations (n, 3, 3) with nonnegative weights summing to one."""

    rotations: np.ndarray
    weights: np.ndarray
    kind: str
    param: int = 0
    euler: np.ndarray | None = None  # (n, 3) ZYZ angles when known exactly

    def __post_init__(self):
        if len(self.rotations) != len(self.weights):
            raise ValueError("rotations and weights differ in length")
        self.rotations.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return len(self.weights)


def exact_euler_grid(B: int) -> RotationSampleSet:
    """Product quadrature exact for every band-limited integrand of degree below 2B.

    Uses 2B uniform angles for alpha and gamma and B Gauss-Legendre nodes in
    cos(beta); total weight 1 (normalized Haar measure).
    """
    if B < 1:
        raise ValueError("band limit B must be >= 1")
    x, w = np.polynomial.legendre.leggauss(B)
    betas = np.arccos(x)[::-1]
    wb = w[::-1] / 2.0
    ang = np.arange(2 * B) * (math.pi / B)
    a, b, g = np.meshgrid(ang, betas, ang, indexing="ij")
    wa = np.broadcast_to(wb[None, :, None], a.shape) / (2 * B) ** 2
    euler = np.stack([a.ravel(), b.ravel(), g.ravel()], axis=1)
    rots = rotations_from_euler(euler[:, 0], euler[:, 1], euler[:, 2])
    return RotationSampleSet(rots, np.ascontiguousarray(wa.ravel()), "grid", B, euler)


def _axis_rotation(axis, angle: float) -> np.ndarray:
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    k = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _canonical_key(r: np.ndarray) -> tuple:
    return tuple(np.round(r, 6).ravel() + 0.0)


def icosahedral_group() -> RotationSampleSet:
    """The 60 rotations of the icosahedron with vertices (0, +-1, +-phi) and cyclic shifts.

    Generated by closure from the five-fold rotation about the vertex
    (0, 1, phi) and the half-turn about the z axis. Elements are sorted by
    rotation angle then lexicographically, so the identity comes first.
    """
    phi = (1 + math.sqrt(5)) / 2
    gens = [_axis_rotation((0.0, 1.0, phi), 2 * math.pi / 5), _axis_rotation((0.0, 0.0, 1.0), math.pi)]
    elems = {_canonical_key(np.eye(3)): np.eye(3)}
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                p = g @ a
                key = _canonical_key(p)
                if key not in elems:
                    elems[key] = p
                    nxt.append(p)
        frontier = nxt
    rots = sorted(elems.values(), key=lambda r: (round(float(rotation_angle(r)), 9), _canonical_key(r)))
    arr = np.array(rots)
    return RotationSampleSet(arr, np.full(len(arr), 1.0 / len(arr)), "ico", len(arr))


def geodesic_distance(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Angle of ``r1^T r2``; broadcasts over leading axes."""
    tr = np.einsum("...ij,...ij->...", r1, r2)
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


FPS_POOL_BAND = 16


def fps_rotations(n: int, seed: int = 0) -> RotationSampleSet:
    """Greedy farthest point sampling of ``n`` rotations.

    The first sample is the identity; the others come from the nodes of
    ``exact_euler_grid(16)``. The seed only shuffles the candidate order,
    which decides ties between equally distant candidates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    pool = exact_euler_grid(FPS_POOL_BAND)
    order = np.random.default_rng(seed).permutation(len(pool))
    cand = pool.rotations[order]
    chosen = [np.eye(3)]
    mind = geodesic_distance(cand, np.eye(3))
    for _ in range(1, n):
        i = int(np.argmax(mind))
        chosen.append(cand[i])
        mind = np.minimum(mind, geodesic_distance(cand, cand[i]))
    arr = np.array(chosen)
    return RotationSampleSet(arr, np.full(n, 1.0 / n), "fps", n)


def fps_min_distances(s: RotationSampleSet) -> np.ndarray:
    """Distance of each sample (after the first) to the samples chosen before it."""
    r = s.rotations
    return np.array([geodesic_distance(r[:i], r[i]).min() for i in range(1, len(r))])
