from .flip import flip_error_map, flip_mean
from .metrics import luminance, mse, ssim
from .pfm import PfmError, read_pfm, write_pfm
from .tonemap import srgb_decode, srgb_encode, tonemap_srgb, tonemap_unit, write_png

__all__ = [
    "PfmError",
    "flip_error_map",
    "flip_mean",
    "luminance",
    "mse",
    "read_pfm",
    "srgb_decode",
    "srgb_encode",
    "ssim",
    "tonemap_srgb",
    "tonemap_unit",
    "write_pfm",
    "write_png",
]
