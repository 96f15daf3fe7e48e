from .mathutils import (
    Frame,
    dir_to_spherical,
    is_unit,
    make_frame,
    normalize,
    reflect,
    refract,
    spherical_to_dir,
    uniform_sphere_dir,
)
from .optics import (
    box_muller,
    fresnel_dielectric,
    hg_phase,
    sample_hg_cos,
)
from .rng import RngStream, mix64_vec, stream_keys_vec, uniforms_from_keys

__all__ = [
    "Frame",
    "RngStream",
    "box_muller",
    "dir_to_spherical",
    "fresnel_dielectric",
    "hg_phase",
    "is_unit",
    "make_frame",
    "mix64_vec",
    "normalize",
    "reflect",
    "refract",
    "sample_hg_cos",
    "spherical_to_dir",
    "stream_keys_vec",
    "uniform_sphere_dir",
    "uniforms_from_keys",
]
