from .bvh import build_bvh, ray_brute_force, ray_bvh
from .camera import Camera, CameraError
from .envmap import (
    EnvironmentMap,
    EnvmapError,
    constant_env,
    gradient_env,
    single_texel_env,
)
from .media import MediumError, MediumField
from .mesh import (
    Mesh,
    MeshError,
    check_watertight,
    load_obj,
    make_box,
    make_icosphere,
    save_obj,
)
from .scenefile import (
    DirectionalLight,
    FlatScene,
    Scene,
    SceneError,
    load_scene,
    save_scene,
    scene_from_config,
)

__all__ = [
    "Camera",
    "CameraError",
    "DirectionalLight",
    "EnvironmentMap",
    "EnvmapError",
    "FlatScene",
    "MediumError",
    "MediumField",
    "Mesh",
    "MeshError",
    "Scene",
    "SceneError",
    "build_bvh",
    "check_watertight",
    "constant_env",
    "gradient_env",
    "load_obj",
    "load_scene",
    "make_box",
    "make_icosphere",
    "ray_brute_force",
    "ray_bvh",
    "save_obj",
    "save_scene",
    "scene_from_config",
    "single_texel_env",
]
