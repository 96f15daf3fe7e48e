"""Scene description file: a fixed JSON schema with sections

    mesh | medium | camera | lights | envmap | render

Example
-------
{
  "mesh":   {"type": "icosphere", "subdivisions": 3, "radius": 1.0},
  "medium": {"type": "value_noise", "sigma_t": [3, 3.5, 4], "sigma_amp": [2, 2, 2],
             "albedo": [0.9, 0.88, 0.85], "g": 0.4, "eta": 1.3,
             "frequency": 1.5, "octaves": 3, "noise_seed": 7},
  "camera": {"position": [0, -3.2, 0.6], "look_at": [0, 0, 0], "up": [0, 0, 1],
             "fov_deg": 45, "resolution": [128, 128]},
  "lights": [{"type": "directional", "direction": [0, 1, -1], "radiance": [1, 1, 1]}],
  "envmap": {"type": "gradient", "zenith": [0.9, 0.95, 1.1], "horizon": [0.5, 0.4, 0.3]},
  "render": {"spp": 64, "max_depth": 64, "rr_start": 8, "separate_specular": false}
}

`mesh.type` is "icosphere" or "obj" (ASCII OBJ subset, v/vn/f); an optional
rigid placement is given by "translate", "rotate_axis", "rotate_angle_deg".
`envmap.type` is "pfm", "constant", "gradient", "sh" (nine l<=2 coefficients
per channel), or "single_texel".  All fields are validated at load; the
medium majorant is verified by stratified sampling over the mesh bounds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..core import normalize
from .bvh import BvhArrays, build_bvh
from .camera import Camera, CameraError
from .envmap import EnvironmentMap, EnvmapError, constant_env, gradient_env, single_texel_env
from .media import MediumError, MediumField
from .mesh import Mesh, MeshError, check_watertight, load_obj, make_box, make_icosphere


class SceneError(ValueError):
    pass


@dataclass
class DirectionalLight:
    direction: np.ndarray  # from the light toward the scene, unit
    radiance: np.ndarray

    def __post_init__(self):
        self.direction = normalize(np.asarray(self.direction, dtype=np.float64))
        self.radiance = np.asarray(self.radiance, dtype=np.float64)
        if np.any(self.radiance < 0):
            raise SceneError("lights.radiance: must be nonnegative")


class FlatScene(NamedTuple):
    """Plain-array view of a scene for the numba kernels."""

    verts: np.ndarray
    vnorms: np.ndarray
    tris: np.ndarray
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_order: np.ndarray
    w2o_rot: np.ndarray
    w2o_off: np.ndarray
    med: np.ndarray
    env_pix: np.ndarray
    env_row_cdf: np.ndarray
    env_col_cdf: np.ndarray


@dataclass
class Hit:
    position: np.ndarray  # world space
    normal: np.ndarray  # interpolated shading normal, outward, unit
    distance: float
    inside: bool  # ray origin was inside the surface (backface hit)
    tri_index: int


@dataclass
class Scene:
    mesh: Mesh
    medium: MediumField
    camera: Camera
    lights: list[DirectionalLight]
    envmap: EnvironmentMap | None
    render: dict
    config: dict = field(default_factory=dict, repr=False)

    _flat_cache: FlatScene | None = field(default=None, repr=False, compare=False)
    _bvh_cache: BvhArrays | None = field(default=None, repr=False, compare=False)

    def config_hash(self) -> bytes:
        text = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).digest()

    def intersect(self, origin: np.ndarray, direction: np.ndarray) -> Hit | None:
        """Nearest surface hit with t > epsilon, or None."""
        from .bvh import ray_bvh

        fs = self.flat()
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        t, tri, u, v = ray_bvh(
            o[0], o[1], o[2], d[0], d[1], d[2],
            fs.verts, fs.tris,
            fs.node_lo, fs.node_hi, fs.node_left, fs.node_right,
            fs.node_start, fs.node_count, fs.tri_order,
        )
        if tri < 0:
            return None
        ia, ib, ic = fs.tris[tri]
        geo_n = np.cross(fs.verts[ib] - fs.verts[ia], fs.verts[ic] - fs.verts[ia])
        geo_n /= np.linalg.norm(geo_n)
        shade_n = (1.0 - u - v) * fs.vnorms[ia] + u * fs.vnorms[ib] + v * fs.vnorms[ic]
        shade_n /= np.linalg.norm(shade_n)
        return Hit(
            position=o + t * d,
            normal=shade_n,
            distance=float(t),
            inside=bool(np.dot(d, geo_n) > 0.0),
            tri_index=int(tri),
        )

    def bvh(self) -> BvhArrays:
        if self._bvh_cache is None:
            self._bvh_cache = build_bvh(self.mesh.world_vertices, self.mesh.triangles)
        return self._bvh_cache

    def flat(self) -> FlatScene:
        if self._flat_cache is not None:
            return self._flat_cache
        bvh = self.bvh()
        rot = self.mesh.object_to_world_rot
        off = self.mesh.object_to_world_off
        if self.envmap is not None:
            env_pix = self.envmap.pixels
            env_row = self.envmap.row_cdf
            env_col = self.envmap.col_cdf
        else:
            env_pix = np.zeros((1, 1, 3), dtype=np.float64)
            env_row = np.zeros(2, dtype=np.float64)
            env_col = np.zeros((1, 2), dtype=np.float64)
        wn = self.mesh.world_normals
        self._flat_cache = FlatScene(
            verts=np.ascontiguousarray(self.mesh.world_vertices),
            vnorms=np.ascontiguousarray(wn / np.linalg.norm(wn, axis=1, keepdims=True)),
            tris=self.mesh.triangles,
            node_lo=bvh.node_lo,
            node_hi=bvh.node_hi,
            node_left=bvh.node_left,
            node_right=bvh.node_right,
            node_start=bvh.node_start,
            node_count=bvh.node_count,
            tri_order=bvh.tri_order,
            w2o_rot=np.ascontiguousarray(rot.T),
            w2o_off=np.ascontiguousarray(-rot.T @ off),
            med=self.medium.params(),
            env_pix=env_pix,
            env_row_cdf=env_row,
            env_col_cdf=env_col,
        )
        return self._flat_cache


def _require(section: dict, key: str, ctx: str):
    if key not in section:
        raise SceneError(f"{ctx}.{key}: missing required field")
    return section[key]


def _rotation_matrix(axis, angle_deg: float) -> np.ndarray:
    axis = normalize(np.asarray(axis, dtype=np.float64))
    a = np.deg2rad(angle_deg)
    k = np.array(
        [
            [0, -axis[2], axis[1]],
            [axis[2], 0, -axis[0]],
            [-axis[1], axis[0], 0],
        ]
    )
    return np.eye(3) + np.sin(a) * k + (1 - np.cos(a)) * (k @ k)


def _build_mesh(section: dict, base_dir: Path) -> Mesh:
    kind = _require(section, "type", "mesh")
    if kind == "icosphere":
        mesh = make_icosphere(
            subdivisions=int(section.get("subdivisions", 3)),
            radius=float(section.get("radius", 1.0)),
        )
    elif kind == "box":
        mesh = make_box(section.get("half_extents", [1.0, 1.0, 1.0]))
    elif kind == "obj":
        path = base_dir / _require(section, "path", "mesh")
        if not path.exists():
            raise SceneError(f"mesh.path: file not found: {path}")
        mesh = load_obj(path)
    else:
        raise SceneError(f"mesh.type: unknown kind {kind!r}")
    if "rotate_axis" in section or "rotate_angle_deg" in section:
        mesh.object_to_world_rot = _rotation_matrix(
            section.get("rotate_axis", [0, 0, 1]),
            float(section.get("rotate_angle_deg", 0.0)),
        )
    if "translate" in section:
        mesh.object_to_world_off = np.asarray(section["translate"], dtype=np.float64)
    try:
        check_watertight(mesh)
    except MeshError as e:
        raise SceneError(f"mesh: {e}") from e
    return mesh


def _build_medium(section: dict) -> MediumField:
    kind = _require(section, "type", "medium")
    _require(section, "eta", "medium")
    _require(section, "sigma_t", "medium")
    _require(section, "albedo", "medium")
    try:
        return MediumField(
            kind=kind,
            sigma_t=np.asarray(section["sigma_t"], dtype=np.float64),
            sigma_amp=np.asarray(section.get("sigma_amp", [0, 0, 0]), dtype=np.float64),
            albedo=np.asarray(section["albedo"], dtype=np.float64),
            albedo_amp=np.asarray(section.get("albedo_amp", [0, 0, 0]), dtype=np.float64),
            g=float(section.get("g", 0.0)),
            eta=float(section["eta"]),
            frequency=float(section.get("frequency", 1.0)),
            octaves=int(section.get("octaves", 1)),
            stripe_frequency=float(section.get("stripe_frequency", 6.0)),
            turbulence=float(section.get("turbulence", 2.0)),
            noise_seed=int(section.get("noise_seed", 0)),
            sigma_t_max_explicit=(
                np.asarray(section["sigma_t_max"], dtype=np.float64)
                if "sigma_t_max" in section
                else None
            ),
        )
    except MediumError as e:
        raise SceneError(str(e)) from e


def _build_camera(section: dict) -> Camera:
    res = _require(section, "resolution", "camera")
    if "fov_deg" in section:
        fov = np.deg2rad(float(section["fov_deg"]))
    else:
        fov = float(_require(section, "fov", "camera"))
    try:
        return Camera(
            position=np.asarray(_require(section, "position", "camera"), dtype=np.float64),
            look_at=np.asarray(_require(section, "look_at", "camera"), dtype=np.float64),
            up=np.asarray(section.get("up", [0, 0, 1]), dtype=np.float64),
            fov=fov,
            width=int(res[0]),
            height=int(res[1]),
        )
    except CameraError as e:
        raise SceneError(str(e)) from e


def _build_envmap(section: dict | None, base_dir: Path) -> EnvironmentMap | None:
    if section is None:
        return None
    kind = _require(section, "type", "envmap")
    try:
        if kind == "pfm":
            from ..imaging.pfm import read_pfm

            path = base_dir / _require(section, "path", "envmap")
            if not path.exists():
                raise SceneError(f"envmap.path: file not found: {path}")
            return EnvironmentMap(read_pfm(path).astype(np.float64))
        if kind == "constant":
            return constant_env(
                section.get("value", [1, 1, 1]),
                width=int(section.get("width", 16)),
                height=int(section.get("height", 8)),
            )
        if kind == "gradient":
            return gradient_env(
                _require(section, "zenith", "envmap"),
                _require(section, "horizon", "envmap"),
                nadir=section.get("nadir"),
                width=int(section.get("width", 64)),
                height=int(section.get("height", 32)),
                axis=section.get("axis", (0.0, 0.0, 1.0)),
            )
        if kind == "sh":
            from ..prt.sh import sh_env

            return sh_env(
                np.asarray(_require(section, "coeffs", "envmap"), dtype=np.float64),
                width=int(section.get("width", 64)),
                height=int(section.get("height", 32)),
            )
        if kind == "single_texel":
            return single_texel_env(
                int(_require(section, "row", "envmap")),
                int(_require(section, "col", "envmap")),
                section.get("value", [1, 1, 1]),
                width=int(section.get("width", 16)),
                height=int(section.get("height", 8)),
            )
    except EnvmapError as e:
        raise SceneError(str(e)) from e
    raise SceneError(f"envmap.type: unknown kind {kind!r}")


def _build_lights(sections: list | None) -> list[DirectionalLight]:
    lights = []
    for i, sec in enumerate(sections or []):
        kind = _require(sec, "type", f"lights[{i}]")
        if kind != "directional":
            raise SceneError(f"lights[{i}].type: unknown kind {kind!r}")
        lights.append(
            DirectionalLight(
                direction=np.asarray(_require(sec, "direction", f"lights[{i}]"), dtype=np.float64),
                radiance=np.asarray(sec.get("radiance", [1, 1, 1]), dtype=np.float64),
            )
        )
    return lights


_RENDER_DEFAULTS = {
    "spp": 16,
    "max_depth": 256,
    "rr_start": 8,
    "separate_specular": False,
    "roughness": 0.0,
}


def scene_from_config(config: dict, base_dir: Path | str = ".") -> Scene:
    base_dir = Path(base_dir)
    if "mesh" not in config:
        raise SceneError("mesh: missing required section")
    if "medium" not in config:
        raise SceneError("medium: missing required section")
    if "camera" not in config:
        raise SceneError("camera: missing required section")
    mesh = _build_mesh(config["mesh"], base_dir)
    medium = _build_medium(config["medium"])
    camera = _build_camera(config["camera"])
    lights = _build_lights(config.get("lights"))
    envmap = _build_envmap(config.get("envmap"), base_dir)
    render = dict(_RENDER_DEFAULTS)
    render.update(config.get("render", {}))
    if render["spp"] < 1:
        raise SceneError("render.spp: must be >= 1")
    if render["max_depth"] < 2:
        raise SceneError("render.max_depth: must be >= 2")

    lo, hi = mesh.object_bounds()
    try:
        medium.validate_majorant(lo, hi)
    except MediumError as e:
        raise SceneError(str(e)) from e

    wlo, whi = mesh.world_bounds()
    if np.all(camera.position >= wlo) and np.all(camera.position <= whi):
        raise SceneError("camera.position: lies inside the object bounding box")

    return Scene(
        mesh=mesh,
        medium=medium,
        camera=camera,
        lights=lights,
        envmap=envmap,
        render=render,
        config=config,
    )


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise SceneError(f"{path}:{e.lineno}: parse error: {e.msg}") from e
    return scene_from_config(config, base_dir=path.parent)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scene.config, f, indent=2, sort_keys=True)
        f.write("\n")
