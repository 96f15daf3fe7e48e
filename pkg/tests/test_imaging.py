import numpy as np
import pytest
from skimage.metrics import structural_similarity as skimage_ssim

from translux.imaging import (
    PfmError,
    flip_error_map,
    flip_mean,
    luminance,
    mse,
    read_pfm,
    ssim,
    tonemap_srgb,
    tonemap_unit,
    write_pfm,
)
from translux.imaging.flip import hyab_redistributed
from translux.imaging.tonemap import srgb_encode


def random_hdr(shape, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return (rng.random(shape) * scale).astype(np.float32)


# ---------------------------------------------------------------------- PFM


def test_pfm_round_trip_bitwise(tmp_path):
    img = random_hdr((17, 23, 3), 0, 4.0)
    p = tmp_path / "a.pfm"
    write_pfm(p, img)
    back = read_pfm(p)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, img)
    # write -> read -> write produces identical bytes
    p2 = tmp_path / "b.pfm"
    write_pfm(p2, back)
    assert p.read_bytes() == p2.read_bytes()


def test_pfm_single_texel(tmp_path):
    img = np.array([[[0.5, 0.25, 1.0]]], dtype=np.float32)
    p = tmp_path / "one.pfm"
    write_pfm(p, img)
    np.testing.assert_array_equal(read_pfm(p), img)


def test_pfm_rejects_big_endian(tmp_path):
    p = tmp_path / "be.pfm"
    p.write_bytes(b"PF\n2 2\n1.0\n" + b"\x00" * 48)
    with pytest.raises(PfmError, match="big-endian"):
        read_pfm(p)


def test_pfm_rejects_truncation(tmp_path):
    p = tmp_path / "short.pfm"
    p.write_bytes(b"PF\n4 4\n-1.0\n" + b"\x00" * 10)
    with pytest.raises(PfmError, match="truncated"):
        read_pfm(p)


# ------------------------------------------------------------------ tonemap


def test_tonemap_endpoints():
    img = np.array([[[0.0, 1.0, 2.0]]])
    out = tonemap_srgb(img, 1.0)
    assert out[0, 0, 0] == 0
    assert out[0, 0, 1] == 255
    assert out[0, 0, 2] == 255  # clamped


def test_tonemap_half_matches_srgb_formula():
    # hand evaluation of the sRGB piecewise transfer at 0.5
    expected = 1.055 * 0.5 ** (1 / 2.4) - 0.055
    out = tonemap_srgb(np.full((1, 1, 3), 0.5), 1.0)
    assert out[0, 0, 0] == int(expected * 255 + 0.5)


def test_tonemap_linear_segment():
    x = 0.002
    assert tonemap_unit(np.array([x]))[0] == pytest.approx(12.92 * x, rel=1e-12)


# ---------------------------------------------------------------------- MSE


def test_mse_identical_zero():
    a = random_hdr((8, 8, 3), 1)
    assert mse(a, a) == 0.0


def test_mse_unit_difference():
    a = np.zeros((5, 7, 3))
    b = np.ones((5, 7, 3))
    assert mse(a, b) == 1.0


def test_mse_matches_naive_loop():
    a = random_hdr((6, 9, 3), 2)
    b = random_hdr((6, 9, 3), 3)
    acc = 0.0
    for y in range(6):
        for x in range(9):
            for c in range(3):
                acc += (float(a[y, x, c]) - float(b[y, x, c])) ** 2
    assert mse(a, b) == pytest.approx(acc / (6 * 9 * 3), abs=1e-12)


def test_mse_dim_mismatch():
    with pytest.raises(ValueError):
        mse(np.zeros((2, 2, 3)), np.zeros((3, 2, 3)))


# --------------------------------------------------------------------- SSIM


def test_ssim_identical_is_one():
    a = random_hdr((32, 32, 3), 4)
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)


def test_ssim_against_reference_implementation():
    a = random_hdr((48, 40, 3), 5)
    b = np.clip(a + random_hdr((48, 40, 3), 6, 0.3) - 0.15, 0, None)
    la = luminance(tonemap_unit(a))
    lb = luminance(tonemap_unit(b))
    ref = skimage_ssim(
        la,
        lb,
        data_range=1.0,
        gaussian_weights=True,
        sigma=1.5,
        use_sample_covariance=False,
    )
    assert ssim(a, b) == pytest.approx(ref, abs=2e-4)


def test_ssim_checkerboard_vs_reference():
    yy, xx = np.mgrid[0:24, 0:24]
    a = ((yy + xx) % 2).astype(np.float64)
    b = 1.0 - a
    img_a = np.repeat(a[:, :, None], 3, axis=2)
    img_b = np.repeat(b[:, :, None], 3, axis=2)
    la, lb = luminance(tonemap_unit(img_a)), luminance(tonemap_unit(img_b))
    ref = skimage_ssim(
        la, lb, data_range=1.0, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False,
    )
    assert ssim(img_a, img_b) == pytest.approx(ref, abs=2e-4)


def test_ssim_prefers_blur_to_noise():
    # downsampled-noise pair scores higher than full-res noise pair
    rng = np.random.default_rng(7)
    base = np.clip(0.5 + 0.0 * rng.random((64, 64, 3)), 0, 1)
    noisy = np.clip(base + rng.normal(0, 0.2, base.shape), 0, 1)
    full = ssim(base, noisy)
    small_a = base[::2, ::2] * 0.25 + base[1::2, ::2] * 0.25 + base[::2, 1::2] * 0.25 + base[1::2, 1::2] * 0.25
    small_b = noisy[::2, ::2] * 0.25 + noisy[1::2, ::2] * 0.25 + noisy[::2, 1::2] * 0.25 + noisy[1::2, 1::2] * 0.25
    assert ssim(small_a, small_b) > full


def test_ssim_symmetry():
    a = random_hdr((32, 32, 3), 8)
    b = random_hdr((32, 32, 3), 9)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_too_small_raises():
    with pytest.raises(ValueError):
        ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))


# --------------------------------------------------------------------- FLIP


def test_flip_identical_zero():
    a = random_hdr((24, 24, 3), 10)
    assert flip_mean(a, a) == pytest.approx(0.0, abs=1e-9)


def test_flip_black_vs_white_closed_form():
    # For constant images the CSF filters are the identity and the feature
    # detectors respond with zero, so FLIP reduces to the redistributed
    # HyAB difference of the two (Hunt-adjusted) colors.
    black = np.zeros((16, 16, 3))
    white = np.ones((16, 16, 3))
    expected = float(hyab_redistributed(np.zeros(3), np.ones(3)))
    got = flip_mean(black, white)
    assert got == pytest.approx(expected, abs=1e-6)
    # Interior of the map is exactly the constant error.
    emap = flip_error_map(srgb_encode(black), srgb_encode(white))
    np.testing.assert_allclose(emap, expected, atol=1e-9)


def test_flip_monotone_in_noise_amplitude():
    rng = np.random.default_rng(11)
    base = np.clip(0.4 + 0.2 * rng.random((48, 48, 3)), 0, 1)
    noise = rng.normal(0, 1, base.shape)
    vals = [
        flip_mean(base, np.clip(base + amp * noise, 0, 1))
        for amp in (0.2, 0.1, 0.05)
    ]
    assert vals[0] > vals[1] > vals[2]


def test_flip_symmetric():
    a = random_hdr((32, 32, 3), 12)
    b = random_hdr((32, 32, 3), 13)
    assert flip_mean(a, b) == pytest.approx(flip_mean(b, a), abs=1e-12)


def test_flip_range():
    a = random_hdr((24, 24, 3), 14)
    b = random_hdr((24, 24, 3), 15)
    emap = flip_error_map(srgb_encode(a), srgb_encode(b))
    assert np.all(emap >= 0.0) and np.all(emap <= 1.0)
