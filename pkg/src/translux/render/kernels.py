"""numba kernels for the reference volumetric path tracer.

Transport model: a watertight mesh bounds a heterogeneous medium behind a
smooth dielectric interface.  Heterogeneity is handled by null-collision
(majorant) tracking; each path tracks a single color channel chosen
uniformly (weight 3).  Directional lights contribute through next-event
estimation at volume scattering vertices, with the straight shadow ray
attenuated by ratio-tracked transmittance and Fresnel transmission at
every interface crossing; environment light contributes when a path
escapes.  Radiance compression factors (eta^2) cancel for light that both
enters and leaves the medium and are omitted throughout.

All randomness is drawn from counter-based streams keyed by
(seed, pixel, sample), so images are bit-identical for a given seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..core.mathutils import _onb_components
from ..core.optics import fresnel_dielectric_scalar, hg_phase_scalar, sample_hg_cos
from ..core.rng import make_state, rng_uniform
from ..scene.bvh import ray_bvh
from ..scene.camera import camera_ray
from ..scene.envmap import env_eval
from ..scene.media import medium_sigma_albedo

_MED_G = 1
_MED_ETA = 2
_MED_SMAJ = 20

MODE_ENV = 0
MODE_DIRECTIONAL = 1

_OFFSET = 1e-6
_MAX_CROSSINGS = 16
_TMIN_THROUGHPUT = 1e-7


@njit(cache=True, inline="always")
def _intersect(fs, ox, oy, oz, dx, dy, dz):
    return ray_bvh(
        ox, oy, oz, dx, dy, dz,
        fs.verts, fs.tris,
        fs.node_lo, fs.node_hi, fs.node_left, fs.node_right,
        fs.node_start, fs.node_count, fs.tri_order,
    )


@njit(cache=True, inline="always")
def _geometric_normal(fs, tri):
    ia, ib, ic = fs.tris[tri, 0], fs.tris[tri, 1], fs.tris[tri, 2]
    ax, ay, az = fs.verts[ia, 0], fs.verts[ia, 1], fs.verts[ia, 2]
    e1x, e1y, e1z = fs.verts[ib, 0] - ax, fs.verts[ib, 1] - ay, fs.verts[ib, 2] - az
    e2x, e2y, e2z = fs.verts[ic, 0] - ax, fs.verts[ic, 1] - ay, fs.verts[ic, 2] - az
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    nz = e1x * e2y - e1y * e2x
    inv = 1.0 / np.sqrt(nx * nx + ny * ny + nz * nz)
    return nx * inv, ny * inv, nz * inv


@njit(cache=True, inline="always")
def _shading_normal(fs, tri, u, v):
    ia, ib, ic = fs.tris[tri, 0], fs.tris[tri, 1], fs.tris[tri, 2]
    w = 1.0 - u - v
    nx = w * fs.vnorms[ia, 0] + u * fs.vnorms[ib, 0] + v * fs.vnorms[ic, 0]
    ny = w * fs.vnorms[ia, 1] + u * fs.vnorms[ib, 1] + v * fs.vnorms[ic, 1]
    nz = w * fs.vnorms[ia, 2] + u * fs.vnorms[ib, 2] + v * fs.vnorms[ic, 2]
    inv = 1.0 / np.sqrt(nx * nx + ny * ny + nz * nz)
    return nx * inv, ny * inv, nz * inv


@njit(cache=True, inline="always")
def _interface_normal(fs, tri, u, v, dx, dy, dz, entering):
    """Shading normal unless it disagrees with the geometric side."""
    nx, ny, nz = _shading_normal(fs, tri, u, v)
    d_dot_n = dx * nx + dy * ny + dz * nz
    if (entering and d_dot_n >= 0.0) or (not entering and d_dot_n <= 0.0):
        nx, ny, nz = _geometric_normal(fs, tri)
    return nx, ny, nz


@njit(cache=True, inline="always")
def _sigma_albedo_world(med, rot, off, px, py, pz, c):
    obx = rot[0, 0] * px + rot[0, 1] * py + rot[0, 2] * pz + off[0]
    oby = rot[1, 0] * px + rot[1, 1] * py + rot[1, 2] * pz + off[1]
    obz = rot[2, 0] * px + rot[2, 1] * py + rot[2, 2] * pz + off[2]
    return medium_sigma_albedo(med, obx, oby, obz, c)


@njit(cache=True, inline="always")
def _reflect(dx, dy, dz, nx, ny, nz):
    k = 2.0 * (dx * nx + dy * ny + dz * nz)
    return dx - k * nx, dy - k * ny, dz - k * nz


@njit(cache=True, inline="always")
def _refract(dx, dy, dz, nx, ny, nz, eta_rel):
    """Refract d across a surface with normal n opposing d (dot(d,n) < 0).

    Returns (ok, tx, ty, tz); ok is False on total internal reflection.
    """
    cos_i = -(dx * nx + dy * ny + dz * nz)
    sin2_t = (1.0 - cos_i * cos_i) / (eta_rel * eta_rel)
    if sin2_t >= 1.0:
        return False, 0.0, 0.0, 0.0
    cos_t = np.sqrt(1.0 - sin2_t)
    k = cos_i / eta_rel - cos_t
    return True, dx / eta_rel + k * nx, dy / eta_rel + k * ny, dz / eta_rel + k * nz


@njit(cache=True, inline="always")
def _rotate_about(dx, dy, dz, cos_t, phi):
    """Direction at angle acos(cos_t) from (dx,dy,dz), azimuth phi."""
    tx, bx = _onb_components(dx, dy, dz)
    sin_t = np.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    cp = np.cos(phi)
    sp = np.sin(phi)
    ox = sin_t * (cp * tx[0] + sp * bx[0]) + cos_t * dx
    oy = sin_t * (cp * tx[1] + sp * bx[1]) + cos_t * dy
    oz = sin_t * (cp * tx[2] + sp * bx[2]) + cos_t * dz
    inv = 1.0 / np.sqrt(ox * ox + oy * oy + oz * oz)
    return ox * inv, oy * inv, oz * inv


@njit(cache=True, inline="always")
def _perturb(dx, dy, dz, roughness, state):
    if roughness <= 0.0:
        return dx, dy, dz
    cos_t = 1.0 - rng_uniform(state) * (1.0 - np.cos(roughness))
    phi = 2.0 * np.pi * rng_uniform(state)
    return _rotate_about(dx, dy, dz, cos_t, phi)


@njit(cache=True)
def free_flight_kernel(med, rot, off, ox, oy, oz, dx, dy, dz, tmax, c, state):
    """Null-collision distance sample along [0, tmax); -1 if no collision."""
    sig_maj = med[_MED_SMAJ + c]
    if sig_maj <= 0.0:
        return -1.0
    t = 0.0
    while True:
        t -= np.log(1.0 - rng_uniform(state)) / sig_maj
        if t >= tmax:
            return -1.0
        sigma, _ = _sigma_albedo_world(
            med, rot, off, ox + t * dx, oy + t * dy, oz + t * dz, c
        )
        if rng_uniform(state) * sig_maj < sigma:
            return t


@njit(cache=True)
def transmittance_kernel(med, rot, off, ox, oy, oz, dx, dy, dz, tmax, c, state):
    """Ratio-tracking transmittance estimate over [0, tmax)."""
    sig_maj = med[_MED_SMAJ + c]
    if sig_maj <= 0.0:
        return 1.0
    tr = 1.0
    t = 0.0
    while True:
        t -= np.log(1.0 - rng_uniform(state)) / sig_maj
        if t >= tmax:
            return tr
        sigma, _ = _sigma_albedo_world(
            med, rot, off, ox + t * dx, oy + t * dy, oz + t * dz, c
        )
        tr *= 1.0 - sigma / sig_maj
        if tr <= _TMIN_THROUGHPUT:
            return 0.0


@njit(cache=True)
def shadow_transmittance(fs, px, py, pz, lx, ly, lz, inside, c, state):
    """Transmittance from p toward a distant light along (lx,ly,lz).

    Crosses the object interface as many times as needed, applying medium
    transmittance inside and Fresnel transmission at each crossing.  The
    shadow ray travels in a straight line (refraction bending ignored).
    """
    eta = fs.med[_MED_ETA]
    tr = 1.0
    for _ in range(_MAX_CROSSINGS):
        t, tri, u, v = _intersect(fs, px, py, pz, lx, ly, lz)
        if tri < 0:
            if inside:
                return 0.0  # open boundary; treat as blocked
            return tr
        if inside:
            tr *= transmittance_kernel(
                fs.med, fs.w2o_rot, fs.w2o_off, px, py, pz, lx, ly, lz, t, c, state
            )
            if tr <= _TMIN_THROUGHPUT:
                return 0.0
        gnx, gny, gnz = _geometric_normal(fs, tri)
        cos_x = abs(lx * gnx + ly * gny + lz * gnz)
        eta_rel = 1.0 / eta if inside else eta
        r = fresnel_dielectric_scalar(cos_x, eta_rel)
        tr *= 1.0 - r
        if tr <= _TMIN_THROUGHPUT:
            return 0.0
        inside = not inside
        px += (t + _OFFSET) * lx
        py += (t + _OFFSET) * ly
        pz += (t + _OFFSET) * lz
    return 0.0


@njit(cache=True)
def walk_radiance(
    fs, px, py, pz, dx, dy, dz, inside, c,
    mode, ltx, lty, ltz, light_rad,
    max_depth, rr_start, roughness, state, scale, out_l,
):
    """Accumulate radiance carried back along a path into out_l (RGB).

    `lt` points from the scene toward the light (= -omega_e).  For
    chromatic media c selects the tracked channel (the caller applies the
    3x selection weight through `scale`); c = -1 tracks a channel-uniform
    medium once and fills all three channels.
    """
    g = fs.med[_MED_G]
    eta = fs.med[_MED_ETA]
    ct = 0 if c < 0 else c  # channel used for sigma/albedo lookups
    tp = scale
    for depth in range(max_depth):
        t, tri, u, v = _intersect(fs, px, py, pz, dx, dy, dz)
        if inside:
            if tri < 0:
                return  # numeric leak through the boundary; drop
            ts = free_flight_kernel(
                fs.med, fs.w2o_rot, fs.w2o_off, px, py, pz, dx, dy, dz, t, ct, state
            )
            if ts >= 0.0:
                # real scattering vertex
                px += ts * dx
                py += ts * dy
                pz += ts * dz
                _, albedo = _sigma_albedo_world(
                    fs.med, fs.w2o_rot, fs.w2o_off, px, py, pz, ct
                )
                tp *= albedo
                if tp <= _TMIN_THROUGHPUT:
                    return
                if mode == MODE_DIRECTIONAL:
                    cos_sh = dx * ltx + dy * lty + dz * ltz
                    phase = hg_phase_scalar(cos_sh, g)
                    tr = shadow_transmittance(fs, px, py, pz, ltx, lty, ltz, True, ct, state)
                    if tr > 0.0:
                        if c < 0:
                            for ch in range(3):
                                out_l[ch] += tp * phase * tr * light_rad[ch]
                        else:
                            out_l[c] += tp * phase * tr * light_rad[c]
                cos_t = sample_hg_cos(rng_uniform(state), g)
                phi = 2.0 * np.pi * rng_uniform(state)
                dx, dy, dz = _rotate_about(dx, dy, dz, cos_t, phi)
            else:
                # boundary from inside: reflect back in or refract out
                nx, ny, nz = _interface_normal(fs, tri, u, v, dx, dy, dz, False)
                cos_i = dx * nx + dy * ny + dz * nz  # > 0 exiting
                r = fresnel_dielectric_scalar(cos_i, 1.0 / eta)
                px += t * dx
                py += t * dy
                pz += t * dz
                if rng_uniform(state) < r:
                    dx, dy, dz = _reflect(dx, dy, dz, nx, ny, nz)
                else:
                    ok, ox2, oy2, oz2 = _refract(dx, dy, dz, -nx, -ny, -nz, 1.0 / eta)
                    if not ok:
                        dx, dy, dz = _reflect(dx, dy, dz, nx, ny, nz)
                    else:
                        dx, dy, dz = ox2, oy2, oz2
                        inside = False
                dx, dy, dz = _perturb(dx, dy, dz, roughness, state)
                px += _OFFSET * dx
                py += _OFFSET * dy
                pz += _OFFSET * dz
        else:
            if tri < 0:
                if mode == MODE_ENV:
                    if c < 0:
                        for ch in range(3):
                            out_l[ch] += tp * env_eval(fs.env_pix, dx, dy, dz, ch)
                    else:
                        out_l[c] += tp * env_eval(fs.env_pix, dx, dy, dz, c)
                return
            nx, ny, nz = _interface_normal(fs, tri, u, v, dx, dy, dz, True)
            cos_i = -(dx * nx + dy * ny + dz * nz)
            r = fresnel_dielectric_scalar(cos_i, eta)
            px += t * dx
            py += t * dy
            pz += t * dz
            if rng_uniform(state) < r:
                dx, dy, dz = _reflect(dx, dy, dz, nx, ny, nz)
            else:
                ok, ox2, oy2, oz2 = _refract(dx, dy, dz, nx, ny, nz, eta)
                if not ok:
                    dx, dy, dz = _reflect(dx, dy, dz, nx, ny, nz)
                else:
                    dx, dy, dz = ox2, oy2, oz2
                    inside = True
            dx, dy, dz = _perturb(dx, dy, dz, roughness, state)
            px += _OFFSET * dx
            py += _OFFSET * dy
            pz += _OFFSET * dz
        if depth >= rr_start:
            ps = min(max(tp, 0.05), 0.95)
            if rng_uniform(state) >= ps:
                return
            tp /= ps
    return


@njit(cache=True)
def primary_sample(
    fs, ox, oy, oz, dx, dy, dz, c,
    mode, ltx, lty, ltz, light_rad,
    max_depth, rr_start, roughness, state, scale, out_sub, out_spec,
):
    """One camera sample, accumulated into out_sub/out_spec (RGB).

    The first-interface mirror reflection is traced as a deterministic
    split so it can be reported (or excluded) separately from the
    subsurface transport.  Returns the hit flag.
    """
    t, tri, u, v = _intersect(fs, ox, oy, oz, dx, dy, dz)
    if tri < 0:
        if mode == MODE_ENV:
            if c < 0:
                for ch in range(3):
                    out_sub[ch] += scale * env_eval(fs.env_pix, dx, dy, dz, ch)
            else:
                out_sub[c] += scale * env_eval(fs.env_pix, dx, dy, dz, c)
        return False
    eta = fs.med[_MED_ETA]
    nx, ny, nz = _interface_normal(fs, tri, u, v, dx, dy, dz, True)
    cos_i = -(dx * nx + dy * ny + dz * nz)
    r = fresnel_dielectric_scalar(cos_i, eta)
    hx = ox + t * dx
    hy = oy + t * dy
    hz = oz + t * dz

    if r > 0.0:
        mx, my, mz = _reflect(dx, dy, dz, nx, ny, nz)
        mx, my, mz = _perturb(mx, my, mz, roughness, state)
        walk_radiance(
            fs, hx + _OFFSET * mx, hy + _OFFSET * my, hz + _OFFSET * mz,
            mx, my, mz, False, c,
            mode, ltx, lty, ltz, light_rad,
            max_depth, rr_start, roughness, state, scale * r, out_spec,
        )

    if r < 1.0:
        ok, rx, ry, rz = _refract(dx, dy, dz, nx, ny, nz, eta)
        if ok:
            rx, ry, rz = _perturb(rx, ry, rz, roughness, state)
            walk_radiance(
                fs, hx + _OFFSET * rx, hy + _OFFSET * ry, hz + _OFFSET * rz,
                rx, ry, rz, True, c,
                mode, ltx, lty, ltz, light_rad,
                max_depth, rr_start, roughness, state, scale * (1.0 - r), out_sub,
            )
    return True


@njit(cache=True)
def render_kernel(
    fs, cam, width, height,
    mode, light_dir, light_rad, chromatic,
    spp, max_depth, rr_start, roughness, jitter, seed,
    out_sub, out_spec, out_hit, out_xo, out_no, out_t,
):
    """Full-frame reference render.

    Outputs (all per pixel): mean subsurface layer, mean first-mirror
    layer, center-ray hit flag, object-space hit position and shading
    normal, and center-ray hit distance.  `chromatic` enables
    single-channel spectral tracking (needed when the medium differs per
    channel); channel-uniform media track all channels jointly.
    """
    ltx, lty, ltz = -light_dir[0], -light_dir[1], -light_dir[2]
    for py in range(height):
        for px in range(width):
            pixel_id = py * width + px
            # deterministic center-ray hit record for dataset generation
            cox, coy, coz, cdx, cdy, cdz = camera_ray(
                cam, width, height, px + 0.5, py + 0.5
            )
            t, tri, u, v = _intersect(fs, cox, coy, coz, cdx, cdy, cdz)
            if tri >= 0:
                out_hit[py, px] = True
                hx = cox + t * cdx
                hy = coy + t * cdy
                hz = coz + t * cdz
                out_xo[py, px, 0] = (
                    fs.w2o_rot[0, 0] * hx + fs.w2o_rot[0, 1] * hy + fs.w2o_rot[0, 2] * hz + fs.w2o_off[0]
                )
                out_xo[py, px, 1] = (
                    fs.w2o_rot[1, 0] * hx + fs.w2o_rot[1, 1] * hy + fs.w2o_rot[1, 2] * hz + fs.w2o_off[1]
                )
                out_xo[py, px, 2] = (
                    fs.w2o_rot[2, 0] * hx + fs.w2o_rot[2, 1] * hy + fs.w2o_rot[2, 2] * hz + fs.w2o_off[2]
                )
                snx, sny, snz = _shading_normal(fs, tri, u, v)
                out_no[py, px, 0] = fs.w2o_rot[0, 0] * snx + fs.w2o_rot[0, 1] * sny + fs.w2o_rot[0, 2] * snz
                out_no[py, px, 1] = fs.w2o_rot[1, 0] * snx + fs.w2o_rot[1, 1] * sny + fs.w2o_rot[1, 2] * snz
                out_no[py, px, 2] = fs.w2o_rot[2, 0] * snx + fs.w2o_rot[2, 1] * sny + fs.w2o_rot[2, 2] * snz
                out_t[py, px] = t
            else:
                out_hit[py, px] = False
                out_t[py, px] = -1.0

            acc_sub = np.zeros(3)
            acc_spec = np.zeros(3)
            for s in range(spp):
                state = make_state(seed, pixel_id, s)
                if jitter:
                    jx = rng_uniform(state)
                    jy = rng_uniform(state)
                else:
                    jx = 0.5
                    jy = 0.5
                ox, oy, oz, dx, dy, dz = camera_ray(cam, width, height, px + jx, py + jy)
                if chromatic:
                    c = int(rng_uniform(state) * 3.0)
                    if c > 2:
                        c = 2
                    scale = 3.0
                else:
                    c = -1
                    scale = 1.0
                primary_sample(
                    fs, ox, oy, oz, dx, dy, dz, c,
                    mode, ltx, lty, ltz, light_rad,
                    max_depth, rr_start, roughness, state, scale, acc_sub, acc_spec,
                )
            for c in range(3):
                out_sub[py, px, c] = acc_sub[c] / spp
                out_spec[py, px, c] = acc_spec[c] / spp
