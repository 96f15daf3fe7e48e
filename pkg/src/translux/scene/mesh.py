"""Triangle meshes: OBJ subset I/O, icosphere generation, watertightness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import normalize


class MeshError(ValueError):
    pass


@dataclass
class Mesh:
    """Indexed triangle mesh in object space with unit vertex normals."""

    vertices: np.ndarray  # (V, 3) float64
    normals: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int32
    object_to_world_rot: np.ndarray = field(default_factory=lambda: np.eye(3))
    object_to_world_off: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int32)

    @property
    def world_vertices(self) -> np.ndarray:
        return self.vertices @ self.object_to_world_rot.T + self.object_to_world_off

    @property
    def world_normals(self) -> np.ndarray:
        return self.normals @ self.object_to_world_rot.T

    def object_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def world_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        wv = self.world_vertices
        return wv.min(axis=0), wv.max(axis=0)

    def bounding_radius(self) -> float:
        lo, hi = self.object_bounds()
        center = 0.5 * (lo + hi)
        return float(np.max(np.linalg.norm(self.vertices - center, axis=1)))

    def world_to_object(self, p_world: np.ndarray) -> np.ndarray:
        return (np.asarray(p_world) - self.object_to_world_off) @ self.object_to_world_rot

    def dir_world_to_object(self, d_world: np.ndarray) -> np.ndarray:
        return np.asarray(d_world) @ self.object_to_world_rot

    def surface_areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def check_watertight(mesh: Mesh) -> None:
    """Every undirected edge must be shared by exactly two triangles, and
    each directed edge must appear exactly once (orientability)."""
    tris = mesh.triangles
    directed = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(a), int(b))
            if key in directed:
                raise MeshError(f"mesh not orientable: directed edge {key} repeated")
            directed[key] = True
    for (a, b) in directed:
        if (b, a) not in directed:
            raise MeshError(
                f"mesh not watertight: edge ({a},{b}) lacks an opposing triangle"
            )


def compute_vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    normals = np.zeros_like(vertices)
    v = vertices
    for tri in triangles:
        n = np.cross(v[tri[1]] - v[tri[0]], v[tri[2]] - v[tri[0]])
        for idx in tri:
            normals[idx] += n
    lens = np.linalg.norm(normals, axis=1, keepdims=True)
    lens[lens == 0] = 1.0
    return normals / lens


def load_obj(path) -> Mesh:
    """ASCII OBJ subset: v / vn / f records, triangles or fan-triangulated."""
    verts, vnorms, faces, face_norms = [], [], [], []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: malformed vertex")
                verts.append([float(x) for x in parts[1:4]])
            elif tag == "vn":
                vnorms.append([float(x) for x in parts[1:4]])
            elif tag == "f":
                corner_v, corner_n = [], []
                for token in parts[1:]:
                    fields = token.split("/")
                    corner_v.append(int(fields[0]) - 1)
                    if len(fields) >= 3 and fields[2]:
                        corner_n.append(int(fields[2]) - 1)
                for k in range(1, len(corner_v) - 1):
                    faces.append([corner_v[0], corner_v[k], corner_v[k + 1]])
                    if corner_n:
                        face_norms.append([corner_n[0], corner_n[k], corner_n[k + 1]])
            # other records (vt, usemtl, ...) ignored
    if not verts or not faces:
        raise MeshError(f"{path}: no geometry found")
    vertices = np.array(verts, dtype=np.float64)
    triangles = np.array(faces, dtype=np.int32)
    if vnorms and face_norms and len(face_norms) == len(faces):
        # re-index so normals align with vertices (OBJ allows mismatched indices)
        src = np.array(vnorms, dtype=np.float64)
        normals = np.zeros_like(vertices)
        for tri, ntri in zip(triangles, face_norms):
            for vi, ni in zip(tri, ntri):
                normals[vi] = src[ni]
        lens = np.linalg.norm(normals, axis=1, keepdims=True)
        lens[lens == 0] = 1.0
        normals = normals / lens
    else:
        normals = compute_vertex_normals(vertices, triangles)
    return Mesh(vertices, normals, triangles)


def save_obj(path, mesh: Mesh) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for v in mesh.vertices:
            f.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for n in mesh.normals:
            f.write(f"vn {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}\n")
        for t in mesh.triangles:
            a, b, c = (int(x) + 1 for x in t)
            f.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")


def make_icosphere(subdivisions: int = 3, radius: float = 1.0) -> Mesh:
    """Unit icosahedron subdivided `subdivisions` times, projected to a sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts = normalize(verts)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in verts]
    cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key in cache:
            return cache[key]
        m = normalize(0.5 * (verts[a] + verts[b]))
        verts.append(m)
        cache[key] = len(verts) - 1
        return cache[key]

    for _ in range(subdivisions):
        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = new_faces

    v = np.array(verts) * radius
    n = np.array(verts)
    return Mesh(v, n, np.array(faces, dtype=np.int32))


def make_box(half_extents, center=(0.0, 0.0, 0.0)) -> Mesh:
    """Axis-aligned box with outward normals (12 triangles, watertight)."""
    hx, hy, hz = half_extents
    cx, cy, cz = center
    corners = np.array(
        [
            [sx * hx + cx, sy * hy + cy, sz * hz + cz]
            for sx in (-1, 1)
            for sy in (-1, 1)
            for sz in (-1, 1)
        ]
    )
    # corner index = sx*4 + sy*2 + sz with (-1 -> 0, 1 -> 1)
    quads = [
        (0, 1, 3, 2),  # -x
        (6, 7, 5, 4),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    tris = []
    for a, b, c, d in quads:
        tris += [(a, b, c), (a, c, d)]
    tris = np.array(tris, dtype=np.int32)
    normals = compute_vertex_normals(corners, tris)
    return Mesh(corners, normals, tris)
