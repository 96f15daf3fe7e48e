"""Fresnel reflectance, the Henyey-Greenstein phase function, and the
Box-Muller transform.  Scalar variants are numba-jitted so the render
kernels can inline them; the module-level functions accept arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def fresnel_dielectric_scalar(cos_theta_i: float, eta: float) -> float:
    """Unpolarized Fresnel reflectance for a smooth dielectric interface.

    cos_theta_i >= 0 is measured on the incident side; eta is the relative
    index (transmitted over incident).  Returns 1 on total internal
    reflection.
    """
    if eta == 1.0:
        return 0.0  # index matched: no interface
    cos_i = min(max(cos_theta_i, 0.0), 1.0)
    sin2_t = (1.0 - cos_i * cos_i) / (eta * eta)
    if sin2_t >= 1.0:
        return 1.0
    cos_t = np.sqrt(1.0 - sin2_t)
    r_par = (eta * cos_i - cos_t) / (eta * cos_i + cos_t)
    r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t)
    return 0.5 * (r_par * r_par + r_perp * r_perp)


def fresnel_dielectric(cos_theta_i, eta: float):
    """Array-friendly wrapper around `fresnel_dielectric_scalar`."""
    if eta == 1.0:
        out = np.zeros_like(np.asarray(cos_theta_i, dtype=np.float64))
        return float(out) if out.ndim == 0 else out
    cos_i = np.clip(np.asarray(cos_theta_i, dtype=np.float64), 0.0, 1.0)
    sin2_t = (1.0 - cos_i * cos_i) / (eta * eta)
    tir = sin2_t >= 1.0
    cos_t = np.sqrt(np.maximum(0.0, 1.0 - sin2_t))
    r_par = (eta * cos_i - cos_t) / (eta * cos_i + cos_t)
    r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t)
    r = 0.5 * (r_par * r_par + r_perp * r_perp)
    out = np.where(tir, 1.0, r)
    return float(out) if out.ndim == 0 else out


@njit(cache=True, inline="always")
def hg_phase_scalar(cos_theta: float, g: float) -> float:
    """Henyey-Greenstein phase value (per steradian, integrates to 1)."""
    g2 = g * g
    denom = 1.0 + g2 - 2.0 * g * cos_theta
    return (1.0 - g2) / (4.0 * np.pi * denom * np.sqrt(denom))


def hg_phase(cos_theta, g: float):
    g2 = g * g
    cos_theta = np.asarray(cos_theta, dtype=np.float64)
    denom = 1.0 + g2 - 2.0 * g * cos_theta
    out = (1.0 - g2) / (4.0 * np.pi * denom * np.sqrt(denom))
    return float(out) if out.ndim == 0 else out


@njit(cache=True, inline="always")
def sample_hg_cos(u: float, g: float) -> float:
    """Inverse-CDF sample of cos(theta) for the HG phase function."""
    if abs(g) < 1e-4:
        return 1.0 - 2.0 * u
    s = (1.0 - g * g) / (1.0 + g - 2.0 * g * u)
    return (1.0 + g * g - s * s) / (2.0 * g)


@njit(cache=True, inline="always")
def box_muller_scalar(u1: float, u2: float) -> tuple[float, float]:
    r = np.sqrt(-2.0 * np.log(u1))
    a = 2.0 * np.pi * u2
    return r * np.cos(a), r * np.sin(a)


def box_muller(u1, u2):
    """Two independent standard normal deviates from two uniforms (u1 > 0)."""
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    r = np.sqrt(-2.0 * np.log(u1))
    a = 2.0 * np.pi * u2
    z1, z2 = r * np.cos(a), r * np.sin(a)
    if z1.ndim == 0:
        return float(z1), float(z2)
    return z1, z2
