"""Bounding volume hierarchy over mesh triangles.

Build is plain Python (median split on the longest centroid axis); the
flat node arrays are traversed by numba-jitted kernels.  A brute-force
intersector over all triangles backs the correctness tests.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

RAY_EPS = 1e-6
_LEAF_SIZE = 4
_STACK_DEPTH = 64


class BvhArrays(NamedTuple):
    node_lo: np.ndarray  # (N,3) f64
    node_hi: np.ndarray  # (N,3) f64
    node_left: np.ndarray  # (N,) i32, -1 for leaf
    node_right: np.ndarray  # (N,) i32
    node_start: np.ndarray  # (N,) i32 offset into tri_order
    node_count: np.ndarray  # (N,) i32
    tri_order: np.ndarray  # (T,) i32


def build_bvh(vertices: np.ndarray, triangles: np.ndarray) -> BvhArrays:
    tri_pts = vertices[triangles]  # (T,3,3)
    lo_all = tri_pts.min(axis=1)
    hi_all = tri_pts.max(axis=1)
    centroids = tri_pts.mean(axis=1)

    node_lo, node_hi = [], []
    node_left, node_right = [], []
    node_start, node_count = [], []
    order: list[int] = []

    def new_node() -> int:
        node_lo.append(np.zeros(3))
        node_hi.append(np.zeros(3))
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)
        return len(node_lo) - 1

    def build(idx: np.ndarray) -> int:
        me = new_node()
        node_lo[me] = lo_all[idx].min(axis=0)
        node_hi[me] = hi_all[idx].max(axis=0)
        if idx.size <= _LEAF_SIZE:
            node_start[me] = len(order)
            node_count[me] = idx.size
            order.extend(int(i) for i in idx)
            return me
        c = centroids[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        sorted_idx = idx[np.argsort(c[:, axis], kind="mergesort")]
        mid = idx.size // 2
        node_left[me] = build(sorted_idx[:mid])
        node_right[me] = build(sorted_idx[mid:])
        return me

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        build(np.arange(len(triangles)))
    finally:
        sys.setrecursionlimit(limit)

    return BvhArrays(
        node_lo=np.ascontiguousarray(node_lo, dtype=np.float64),
        node_hi=np.ascontiguousarray(node_hi, dtype=np.float64),
        node_left=np.array(node_left, dtype=np.int32),
        node_right=np.array(node_right, dtype=np.int32),
        node_start=np.array(node_start, dtype=np.int32),
        node_count=np.array(node_count, dtype=np.int32),
        tri_order=np.array(order, dtype=np.int32),
    )


@njit(cache=True, inline="always")
def _ray_triangle(ox, oy, oz, dx, dy, dz, v0, v1, v2):
    """Moller-Trumbore; returns (t, u, v) with t < 0 on miss."""
    e1x, e1y, e1z = v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2]
    e2x, e2y, e2z = v2[0] - v0[0], v2[1] - v0[1], v2[2] - v0[2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < 1e-14:
        return -1.0, 0.0, 0.0
    inv = 1.0 / det
    tx, ty, tz = ox - v0[0], oy - v0[1], oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -1e-9 or u > 1.0 + 1e-9:
        return -1.0, 0.0, 0.0
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -1e-9 or u + v > 1.0 + 1e-9:
        return -1.0, 0.0, 0.0
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t <= RAY_EPS:
        return -1.0, 0.0, 0.0
    return t, u, v


@njit(cache=True, inline="always")
def _slab_test(ox, oy, oz, idx, idy, idz, lo, hi, tmax):
    t0 = (lo[0] - ox) * idx
    t1 = (hi[0] - ox) * idx
    tn = min(t0, t1)
    tf = max(t0, t1)
    t0 = (lo[1] - oy) * idy
    t1 = (hi[1] - oy) * idy
    tn = max(tn, min(t0, t1))
    tf = min(tf, max(t0, t1))
    t0 = (lo[2] - oz) * idz
    t1 = (hi[2] - oz) * idz
    tn = max(tn, min(t0, t1))
    tf = min(tf, max(t0, t1))
    return tf >= tn and tf > RAY_EPS and tn < tmax


@njit(cache=True)
def ray_bvh(
    ox, oy, oz, dx, dy, dz,
    verts, tris,
    node_lo, node_hi, node_left, node_right, node_start, node_count, tri_order,
):
    """Nearest hit along the ray.  Returns (t, tri_index, u, v); t<0 on miss."""
    big = 1e30
    idx = 1.0 / dx if abs(dx) > 1e-300 else (big if dx >= 0 else -big)
    idy = 1.0 / dy if abs(dy) > 1e-300 else (big if dy >= 0 else -big)
    idz = 1.0 / dz if abs(dz) > 1e-300 else (big if dz >= 0 else -big)

    best_t = big
    best_tri = -1
    best_u = 0.0
    best_v = 0.0

    stack = np.empty(_STACK_DEPTH, dtype=np.int32)
    sp = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not _slab_test(ox, oy, oz, idx, idy, idz, node_lo[node], node_hi[node], best_t):
            continue
        if node_left[node] < 0:
            s = node_start[node]
            for k in range(node_count[node]):
                tri = tri_order[s + k]
                t, u, v = _ray_triangle(
                    ox, oy, oz, dx, dy, dz,
                    verts[tris[tri, 0]], verts[tris[tri, 1]], verts[tris[tri, 2]],
                )
                if 0.0 < t < best_t:
                    best_t = t
                    best_tri = tri
                    best_u = u
                    best_v = v
        else:
            stack[sp] = node_left[node]
            sp += 1
            stack[sp] = node_right[node]
            sp += 1
    if best_tri < 0:
        return -1.0, -1, 0.0, 0.0
    return best_t, best_tri, best_u, best_v


@njit(cache=True)
def ray_brute_force(ox, oy, oz, dx, dy, dz, verts, tris):
    """All-triangles nearest hit; independent oracle for ray_bvh."""
    best_t = 1e30
    best_tri = -1
    best_u = 0.0
    best_v = 0.0
    for tri in range(tris.shape[0]):
        t, u, v = _ray_triangle(
            ox, oy, oz, dx, dy, dz,
            verts[tris[tri, 0]], verts[tris[tri, 1]], verts[tris[tri, 2]],
        )
        if 0.0 < t < best_t:
            best_t = t
            best_tri = tri
            best_u = u
            best_v = v
    if best_tri < 0:
        return -1.0, -1, 0.0, 0.0
    return best_t, best_tri, best_u, best_v
