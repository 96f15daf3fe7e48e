"""LDR FLIP perceptual image difference.

Implements the published low-dynamic-range pipeline: YCxCz opponent
decomposition, contrast-sensitivity spatial filtering, Hunt-adjusted
L*a*b* color differences with the HyAB metric and error redistribution,
plus edge/point feature differences on the achromatic channel.  The
`flip_mean` of an error map summarizes per-pixel perceived error.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .tonemap import srgb_decode, tonemap_unit

# exponents and redistribution knobs
_QC = 0.7
_QF = 0.5
_PC = 0.4
_PT = 0.95

# sRGB (D65) to XYZ
_RGB2XYZ = np.array(
    [
        [0.41239080, 0.35758434, 0.18048079],
        [0.21263901, 0.71516868, 0.07219232],
        [0.01933082, 0.11919478, 0.95053215],
    ]
)
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)
_WHITE = _RGB2XYZ @ np.ones(3)

# CSF fit parameters per opponent channel: (a1, b1, a2, b2)
_CSF = {
    "A": (1.0, 0.0047, 0.0, 1e-5),
    "RG": (1.0, 0.0053, 0.0, 1e-5),
    "BY": (34.1, 0.04, 13.5, 0.025),
}
_FEATURE_WIDTH = 0.082


def _linrgb_to_ycxcz(rgb: np.ndarray) -> np.ndarray:
    xyz = rgb @ _RGB2XYZ.T / _WHITE
    y = 116.0 * xyz[..., 1] - 16.0
    cx = 500.0 * (xyz[..., 0] - xyz[..., 1])
    cz = 200.0 * (xyz[..., 1] - xyz[..., 2])
    return np.stack([y, cx, cz], axis=-1)


def _ycxcz_to_linrgb(ycxcz: np.ndarray) -> np.ndarray:
    yn = (ycxcz[..., 0] + 16.0) / 116.0
    xn = ycxcz[..., 1] / 500.0 + yn
    zn = yn - ycxcz[..., 2] / 200.0
    xyz = np.stack([xn, yn, zn], axis=-1) * _WHITE
    return xyz @ _XYZ2RGB.T


def _linrgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    xyz = np.clip(rgb, 0.0, 1.0) @ _RGB2XYZ.T / _WHITE
    delta = 6.0 / 29.0
    f = np.where(xyz > delta**3, np.cbrt(xyz), xyz / (3 * delta**2) + 4.0 / 29.0)
    l = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([l, a, b], axis=-1)


def _hunt_adjust(lab: np.ndarray) -> np.ndarray:
    out = lab.copy()
    out[..., 1] *= 0.01 * lab[..., 0]
    out[..., 2] *= 0.01 * lab[..., 0]
    return out


def _hyab(lab1: np.ndarray, lab2: np.ndarray) -> np.ndarray:
    d = lab1 - lab2
    return np.abs(d[..., 0]) + np.linalg.norm(d[..., 1:], axis=-1)


def _csf_kernel(ppd: float, params: tuple[float, float, float, float]) -> np.ndarray:
    a1, b1, a2, b2 = params
    max_b = max(b for p in _CSF.values() for b in (p[1], p[3]))
    radius = int(np.ceil(3.0 * np.sqrt(max_b / (2.0 * np.pi**2)) * ppd))
    deg = np.arange(-radius, radius + 1, dtype=np.float64) / ppd
    d2 = deg[:, None] ** 2 + deg[None, :] ** 2
    g = a1 * np.sqrt(np.pi / b1) * np.exp(-np.pi**2 * d2 / b1)
    g += a2 * np.sqrt(np.pi / b2) * np.exp(-np.pi**2 * d2 / b2)
    return g / g.sum()


def _feature_kernels(ppd: float) -> tuple[np.ndarray, np.ndarray]:
    sd = 0.5 * _FEATURE_WIDTH * ppd
    radius = int(np.ceil(3.0 * sd))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    gx, gy = np.meshgrid(x, x, indexing="xy")
    g = np.exp(-(gx**2 + gy**2) / (2 * sd**2))
    edge = -gx * g / sd**2
    point = (gx**2 / sd**4 - 1.0 / sd**2) * g

    def balance(k: np.ndarray) -> np.ndarray:
        k = k.copy()
        pos = k[k > 0].sum()
        neg = -k[k < 0].sum()
        k[k > 0] /= pos
        k[k < 0] /= neg
        return k

    return balance(edge), balance(point)


def hyab_redistributed(ref_rgb: np.ndarray, test_rgb: np.ndarray) -> np.ndarray:
    """Color error of the FLIP pipeline from filtered linear-RGB values.

    Exposed separately so constant-image cases can be evaluated in closed
    form (spatial filtering is the identity on constants).
    """
    lab_r = _hunt_adjust(_linrgb_to_lab(ref_rgb))
    lab_t = _hunt_adjust(_linrgb_to_lab(test_rgb))
    de = _hyab(lab_r, lab_t) ** _QC

    green = _hunt_adjust(_linrgb_to_lab(np.array([0.0, 1.0, 0.0])))
    blue = _hunt_adjust(_linrgb_to_lab(np.array([0.0, 0.0, 1.0])))
    cmax = _hyab(green, blue) ** _QC

    knee = _PC * cmax
    return np.where(
        de < knee,
        de * (_PT / knee),
        _PT + (de - knee) / (cmax - knee) * (1.0 - _PT),
    )


def flip_error_map(ref_srgb: np.ndarray, test_srgb: np.ndarray, ppd: float = 67.0) -> np.ndarray:
    """Per-pixel FLIP error in [0,1] for two sRGB-encoded unit-range images."""
    ref_srgb = np.asarray(ref_srgb, dtype=np.float64)
    test_srgb = np.asarray(test_srgb, dtype=np.float64)
    if ref_srgb.shape != test_srgb.shape:
        raise ValueError(f"image dimensions differ: {ref_srgb.shape} vs {test_srgb.shape}")

    ycc_r = _linrgb_to_ycxcz(srgb_decode(ref_srgb))
    ycc_t = _linrgb_to_ycxcz(srgb_decode(test_srgb))

    filt_r = np.empty_like(ycc_r)
    filt_t = np.empty_like(ycc_t)
    for c, name in enumerate(("A", "RG", "BY")):
        k = _csf_kernel(ppd, _CSF[name])
        filt_r[..., c] = ndimage.convolve(ycc_r[..., c], k, mode="reflect")
        filt_t[..., c] = ndimage.convolve(ycc_t[..., c], k, mode="reflect")
    rgb_r = np.clip(_ycxcz_to_linrgb(filt_r), 0.0, 1.0)
    rgb_t = np.clip(_ycxcz_to_linrgb(filt_t), 0.0, 1.0)

    err_c = hyab_redistributed(rgb_r, rgb_t)

    # features from the unfiltered achromatic channel, rescaled to [0,1]
    lum_r = (ycc_r[..., 0] + 16.0) / 116.0
    lum_t = (ycc_t[..., 0] + 16.0) / 116.0
    edge_k, point_k = _feature_kernels(ppd)

    def magnitude(img: np.ndarray, k: np.ndarray) -> np.ndarray:
        fx = ndimage.convolve(img, k, mode="reflect")
        fy = ndimage.convolve(img, k.T, mode="reflect")
        return np.hypot(fx, fy)

    d_edge = np.abs(magnitude(lum_r, edge_k) - magnitude(lum_t, edge_k))
    d_point = np.abs(magnitude(lum_r, point_k) - magnitude(lum_t, point_k))
    err_f = (np.maximum(d_edge, d_point) / np.sqrt(2.0)) ** _QF

    return np.clip(err_c, 0.0, 1.0) ** (1.0 - err_f)


def flip_mean(a: np.ndarray, b: np.ndarray, ppd: float = 67.0, exposure: float = 1.0) -> float:
    """Mean FLIP between two HDR images after sRGB tonemapping."""
    return float(
        flip_error_map(tonemap_unit(a, exposure), tonemap_unit(b, exposure), ppd).mean()
    )
