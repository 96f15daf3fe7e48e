"""Training data generation and the NBSD dataset format.

Each record is one observation of the object's distant-light subsurface
response under a unit-radiance directional light:

    (x_o.xyz, omega_o.theta/phi, omega_i.theta/phi, L_r.rgb)

packed as 10 little-endian float32.  File header: magic "NBSD",
version u32 = 1, record count u64, then the 32-byte scene-config hash.
Records are assigned to train/val/test splits by hashing their content,
so splits are stable under concatenation and reordering.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import RngStream, dir_to_spherical, normalize, uniform_sphere_dir
from ..core.rng import mix64_vec, U64
from ..scene import Camera, Scene
from .config import PathConfig
from .reference import render_reference

MAGIC = b"NBSD"
VERSION = 1
RECORD_FLOATS = 10

SPLIT_TRAIN = 0
SPLIT_VAL = 1
SPLIT_TEST = 2


class DatasetError(ValueError):
    pass


@dataclass
class Dataset:
    records: np.ndarray  # (N, 10) float32
    scene_hash: bytes

    @property
    def positions(self) -> np.ndarray:
        return self.records[:, 0:3]

    @property
    def omega_o(self) -> np.ndarray:
        return self.records[:, 3:5]

    @property
    def omega_i(self) -> np.ndarray:
        return self.records[:, 5:7]

    @property
    def radiance(self) -> np.ndarray:
        return self.records[:, 7:10]

    def split_labels(self) -> np.ndarray:
        return record_split_labels(self.records)

    def split(self, label: int) -> "Dataset":
        mask = self.split_labels() == label
        return Dataset(self.records[mask], self.scene_hash)


def record_split_labels(records: np.ndarray) -> np.ndarray:
    """Content-hash split: 5% test, 5% validation, 90% train."""
    raw = np.ascontiguousarray(records, dtype="<f4").view(np.uint32).astype(np.uint64)
    h = np.full(raw.shape[0], U64(0x9E3779B97F4A7C15), dtype=np.uint64)
    for col in range(raw.shape[1]):
        h = mix64_vec(h ^ (raw[:, col] + U64(0xD1B54A32D192ED03)))
    bucket = h % U64(100)
    labels = np.full(raw.shape[0], SPLIT_TRAIN, dtype=np.int8)
    labels[bucket < 10] = SPLIT_VAL
    labels[bucket < 5] = SPLIT_TEST
    return labels


def write_dataset(path, records: np.ndarray, scene_hash: bytes) -> None:
    records = np.ascontiguousarray(records, dtype="<f4")
    if records.ndim != 2 or records.shape[1] != RECORD_FLOATS:
        raise DatasetError(f"records must be (N, {RECORD_FLOATS}), got {records.shape}")
    if len(scene_hash) != 32:
        raise DatasetError("scene hash must be 32 bytes")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", records.shape[0]))
        f.write(scene_hash)
        f.write(records.tobytes())


def read_dataset(path) -> Dataset:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise DatasetError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise DatasetError(f"{path}: unsupported version {version}")
        (count,) = struct.unpack("<Q", f.read(8))
        scene_hash = f.read(32)
        payload = f.read(count * RECORD_FLOATS * 4)
        if len(payload) != count * RECORD_FLOATS * 4:
            raise DatasetError(f"{path}: truncated payload")
    records = np.frombuffer(payload, dtype="<f4").reshape(count, RECORD_FLOATS)
    return Dataset(records.copy(), scene_hash)


def sample_view(scene: Scene, rng: RngStream, resolution: int) -> tuple[np.ndarray, Camera]:
    """Random light direction and camera pose for one training image.

    The light direction is uniform on the sphere; the camera sits at 3x
    the bounding radius from the object center, looking at it.
    """
    u = rng.uniform(4)
    omega_e = uniform_sphere_dir(u[0], u[1])
    cam_dir = uniform_sphere_dir(u[2], u[3])
    lo, hi = scene.mesh.world_bounds()
    center = 0.5 * (lo + hi)
    radius = scene.mesh.bounding_radius()
    pos = center + cam_dir * 3.0 * radius
    up = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(normalize(pos - center), up)) > 0.999:
        up = np.array([1.0, 0.0, 0.0])
    cam = Camera(
        position=pos,
        look_at=center,
        up=up,
        fov=scene.camera.fov,
        width=resolution,
        height=resolution,
    )
    return omega_e, cam


def gen_training_data(
    scene: Scene,
    n_images: int,
    resolution: int,
    cfg: PathConfig,
    seed: int,
    out_path=None,
) -> Dataset:
    """Render n_images under random directional lights and record every
    center-ray hit with its subsurface-only radiance."""
    from ..scene import DirectionalLight

    if n_images < 1:
        raise DatasetError("n_images must be >= 1")
    chunks = []
    w2o_rot = scene.mesh.object_to_world_rot.T
    for i in range(n_images):
        rng = RngStream(seed, i, 0)
        omega_e, cam = sample_view(scene, rng, resolution)
        light = DirectionalLight(direction=omega_e, radiance=np.ones(3))
        view_cfg = PathConfig(
            spp=cfg.spp,
            max_depth=cfg.max_depth,
            rr_start=cfg.rr_start,
            separate_specular=True,
            roughness=cfg.roughness,
            jitter=False,
        )
        frame = render_reference(scene, light, view_cfg, seed=seed * 1000003 + i, camera=cam)
        mask = frame.hit
        if not np.any(mask):
            continue
        x_o = frame.x_object[mask]
        # direction from the surface point toward the camera, object space
        cam_obj = scene.mesh.world_to_object(cam.position)
        wo = normalize(cam_obj[None, :] - x_o)
        theta_o, phi_o = dir_to_spherical(wo)
        wi_obj = normalize(-(omega_e @ w2o_rot.T))
        theta_i, phi_i = dir_to_spherical(wi_obj)
        lr = frame.subsurface[mask]
        n = x_o.shape[0]
        rec = np.empty((n, RECORD_FLOATS), dtype=np.float32)
        rec[:, 0:3] = x_o
        rec[:, 3] = theta_o
        rec[:, 4] = phi_o
        rec[:, 5] = theta_i
        rec[:, 6] = phi_i
        rec[:, 7:10] = lr
        chunks.append(rec)
    records = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, RECORD_FLOATS), np.float32)
    ds = Dataset(records, scene.config_hash())
    if out_path is not None:
        write_dataset(out_path, ds.records, ds.scene_hash)
    return ds
