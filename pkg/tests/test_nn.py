import numpy as np
import pytest

import translux.nn as nn
from translux.core import spherical_to_dir, uniform_sphere_dir
from translux.nn.mlp import MlpModel, _init_model
from translux.render.dataset import Dataset

BOUNDS = (np.array([-1.0, -1.0, -1.0]), np.array([1.0, 1.0, 1.0]))


def toy_model(seed=3, dtype=np.float64):
    return _init_model([512, 16, 16, 3], [(1, 2)], 7, nn.KIND_APPEARANCE, seed, 18.0, 1.0, dtype)


def make_dataset(n, target_fn, seed=0):
    rng = np.random.default_rng(seed)
    pos = uniform_sphere_dir(rng.random(n), rng.random(n))
    wo = np.stack([np.arccos(1 - 2 * rng.random(n)), 2 * np.pi * rng.random(n)], axis=1)
    wi = np.stack([np.arccos(1 - 2 * rng.random(n)), 2 * np.pi * rng.random(n)], axis=1)
    lr = target_fn(pos, wo, wi)
    rec = np.concatenate([pos, wo, wi, lr], axis=1).astype(np.float32)
    return Dataset(rec, bytes(32))


# ------------------------------------------------------------------ fourier


def test_fourier_zero_input():
    f = nn.FourierFeatureMap.create(7, seed=0)
    out = f(np.zeros((1, 7)))
    np.testing.assert_allclose(out[0, :256], 1.0, atol=1e-7)
    np.testing.assert_allclose(out[0, 256:], 0.0, atol=1e-7)


@pytest.mark.parametrize("n", [2, 5, 7])
def test_fourier_output_length(n):
    f = nn.FourierFeatureMap.create(n, seed=1)
    assert f(np.zeros((4, n))).shape == (4, 512)
    assert f.matrix.shape == (256, n)


def test_fourier_scalar_recomputation():
    f = nn.FourierFeatureMap.create(7, seed=2, dtype=np.float64)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.random(7)
        out = f(x[None])[0]
        k = rng.integers(0, 256)
        gx = float(f.matrix[k] @ x)
        assert out[k] == pytest.approx(np.cos(2 * np.pi * gx), abs=1e-9)
        assert out[256 + k] == pytest.approx(np.sin(2 * np.pi * gx), abs=1e-9)


def test_fourier_statistics():
    f = nn.FourierFeatureMap.create(7, seed=3, dtype=np.float64)
    assert f.matrix.mean() == pytest.approx(18.0, abs=0.1)
    assert f.matrix.std() == pytest.approx(1.0, abs=0.05)


# ----------------------------------------------------------------- encoding


def test_encode_center():
    x = nn.encode_input(np.zeros(3), [np.pi / 2, np.pi], [np.pi / 2, np.pi], BOUNDS)
    np.testing.assert_allclose(x[0], [0, 0, 0, 0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_encode_corner():
    x = nn.encode_input(np.array([1.0, -1.0, 1.0]), [0, 0], [0, 0], BOUNDS)
    np.testing.assert_allclose(x[0, :3], [1, -1, 1], atol=1e-12)


def test_encode_direction_round_trip():
    from translux.nn.encoding import decode_direction_slot

    theta, phi = 1.234, 4.321
    x = nn.encode_input(np.zeros(3), [theta, phi], None, BOUNDS)
    assert x.shape[1] == nn.IMPORTANCE_INPUT_DIM
    t2, p2 = decode_direction_slot(x[0, 3:5])
    assert abs(t2 - theta) < 1e-6 and abs(p2 - phi) < 1e-6


# ------------------------------------------------------------------ forward


def test_forward_zero_weights():
    m = toy_model()
    for w in m.weights:
        w[:] = 0
    for b in m.biases:
        b[:] = 0
    out = m.forward(np.random.default_rng(0).random((5, 7)))
    np.testing.assert_array_equal(out, np.zeros((5, 3)))


def test_single_linear_layer_is_matvec():
    m = _init_model([512, 3], [], 7, nn.KIND_APPEARANCE, 5, 18.0, 1.0, np.float64)
    rng = np.random.default_rng(1)
    x = rng.random((4, 7))
    feats = m.fourier(x)
    np.testing.assert_allclose(m.forward(x), feats @ m.weights[0] + m.biases[0], rtol=1e-12)


def test_relu_gates_contribution():
    # hand-built 2-neuron check: flipping the sign of a pre-activation
    # weight zeroes that neuron's contribution
    m = _init_model([512, 2, 1], [], 7, nn.KIND_APPEARANCE, 7, 18.0, 1.0, np.float64)
    x = np.random.default_rng(2).random((1, 7))
    feats = m.fourier(x)
    m.weights[0][:] = 0
    m.biases[0][:] = np.array([1.0, -1.0])  # neuron 0 on, neuron 1 off
    m.weights[1][:] = np.array([[2.0], [5.0]])
    m.biases[1][:] = 0
    assert m.forward(x)[0, 0] == pytest.approx(2.0, abs=1e-12)
    m.biases[0][:] = np.array([-1.0, -1.0])  # both gated off
    assert m.forward(x)[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_forward_bit_deterministic():
    m = nn.make_appearance_model(0)
    x = np.random.default_rng(3).random((64, 7)).astype(np.float32)
    np.testing.assert_array_equal(m.forward(x), m.forward(x))


def test_importance_head_positive():
    m = nn.make_importance_model(0)
    x = np.random.default_rng(4).random((128, 5)).astype(np.float32)
    sigma = m.forward(x)
    assert np.all(sigma > 0)
    assert np.all(sigma >= nn.SIGMA_FLOOR)


def test_skip_width_mismatch_rejected():
    with pytest.raises(ValueError, match="mismatched widths"):
        _init_model([512, 16, 8, 3], [(1, 2)], 7, nn.KIND_APPEARANCE, 0, 18.0, 1.0, np.float64)


# ----------------------------------------------------------------- backward


def test_gradcheck_toy_net():
    # every parameter within 1e-4 relative of central finite differences
    m = toy_model()
    rng = np.random.default_rng(5)
    x = rng.random((32, 7))
    y = rng.random((32, 3))
    aw, ab = nn.analytic_gradients(m, x, y)
    fd = nn.finite_diff_gradients(m, x, y)
    werr, _ = nn.max_relative_error(aw, fd.grads_w, fd.kink_w)
    berr, _ = nn.max_relative_error(ab, fd.grads_b, fd.kink_b)
    assert werr < 1e-4 and berr < 1e-4


def test_zero_loss_zero_grads():
    m = toy_model()
    x = np.random.default_rng(6).random((16, 7))
    y = m.forward(x)  # targets equal predictions
    gw, gb = nn.analytic_gradients(m, x, y)
    assert all(np.allclose(g, 0) for g in gw)
    assert all(np.allclose(g, 0) for g in gb)


def test_output_bias_gradient_closed_form():
    m = toy_model()
    rng = np.random.default_rng(7)
    x = rng.random((16, 7))
    y = rng.random((16, 3))
    pred = m.forward(x)
    _, gb = nn.analytic_gradients(m, x, y)
    expected = 2.0 * (pred - y).sum(axis=0) / x.shape[0]
    np.testing.assert_allclose(gb[-1], expected, rtol=1e-10)


def test_gradients_flow_through_skip():
    # removing the skip must change layer-1 gradients
    m = toy_model()
    rng = np.random.default_rng(8)
    x = rng.random((8, 7))
    y = rng.random((8, 3))
    gw_with, _ = nn.analytic_gradients(m, x, y)
    m2 = MlpModel(m.fourier, [w.copy() for w in m.weights],
                  [b.copy() for b in m.biases], [], m.kind)
    gw_without, _ = nn.analytic_gradients(m2, x, y)
    assert not np.allclose(gw_with[0], gw_without[0])


# --------------------------------------------------------------------- adam


def test_adam_zero_gradient_no_change():
    m = toy_model()
    before = [w.copy() for w in m.weights]
    state = nn.AdamState.for_model(m)
    zeros_w = [np.zeros_like(w) for w in m.weights]
    zeros_b = [np.zeros_like(b) for b in m.biases]
    nn.adam_step(m, zeros_w, zeros_b, state, 1, nn.TrainConfig())
    for w0, w1 in zip(before, m.weights):
        np.testing.assert_array_equal(w0, w1)


def test_adam_first_step_is_signed_lr():
    # on f(w) = w^2 the first Adam step is ~ -lr * sign(grad)
    cfg = nn.TrainConfig(learning_rate=0.1)
    m = _init_model([512, 1], [], 7, nn.KIND_APPEARANCE, 0, 18.0, 1.0, np.float64)
    m.weights[0][:] = 0
    m.biases[0][:] = 1.0  # scalar parameter w = bias, f = w^2
    state = nn.AdamState.for_model(m)
    gw = [np.zeros_like(m.weights[0])]
    gb = [np.array([2.0])]  # df/dw at w=1
    nn.adam_step(m, gw, gb, state, 1, cfg)
    assert m.biases[0][0] == pytest.approx(1.0 - 0.1, rel=1e-6)


def test_adam_scale_invariant_first_step():
    cfg = nn.TrainConfig(learning_rate=0.05)
    vals = []
    for g in (1e-3, 1e3):
        m = _init_model([512, 1], [], 7, nn.KIND_APPEARANCE, 0, 18.0, 1.0, np.float64)
        m.biases[0][:] = 0.0
        state = nn.AdamState.for_model(m)
        nn.adam_step(m, [np.zeros_like(m.weights[0])], [np.array([g])], state, 1, cfg)
        vals.append(abs(m.biases[0][0]))
    assert vals[0] == pytest.approx(vals[1], rel=1e-6)


def test_cosine_decay_endpoints():
    cfg = nn.TrainConfig(learning_rate=1e-3, lr_min=1e-4)
    assert cfg.lr_at(1, 100) == pytest.approx(1e-3)
    assert cfg.lr_at(100, 100) == pytest.approx(1e-4)


# ----------------------------------------------------------------- training


def test_train_constant_function():
    c = np.array([0.3, 0.5, 0.7])
    ds = make_dataset(20000, lambda p, wo, wi: np.tile(c, (p.shape[0], 1)), seed=1)
    model = nn.make_appearance_model(seed=0)
    cfg = nn.TrainConfig(batch_size=2048, epochs=50, seed=0)
    model, history = nn.train_appearance(ds, model, cfg, BOUNDS)
    test = ds.split(2)
    pred = model.forward(nn.encode_dataset(test, BOUNDS)[0])
    assert np.all(np.abs(pred - c) < 1e-3)
    assert history[-1].val_loss < history[0].val_loss


def cosine_target(pos, wo, wi):
    # distant-light response oracle: clamped cosine about the surface
    # normal (the normal of a unit sphere is the position itself)
    wi_dir = spherical_to_dir(wi[:, 0], wi[:, 1])
    cos = np.sum(wi_dir * pos, axis=1)
    val = np.maximum(cos, 0.0) / np.pi
    return np.tile(val[:, None], (1, 3))


def test_train_cosine_lobe():
    ds = make_dataset(60000, cosine_target, seed=2)
    model = nn.make_appearance_model(seed=1)
    cfg = nn.TrainConfig(batch_size=2048, epochs=60, seed=1)
    model, history = nn.train_appearance(ds, model, cfg, BOUNDS)
    test = ds.split(2)
    x, y = nn.encode_dataset(test, BOUNDS)
    assert nn.evaluate_l2(model, x, y) <= 1e-4


def test_training_loss_mostly_monotone():
    ds = make_dataset(30000, cosine_target, seed=3)
    model = nn.make_appearance_model(seed=2)
    cfg = nn.TrainConfig(batch_size=2048, epochs=20, seed=2)
    _, history = nn.train_appearance(ds, model, cfg, BOUNDS)
    losses = [h.train_loss for h in history]
    drops = sum(1 for a, b in zip(losses, losses[1:]) if b <= a)
    assert drops / (len(losses) - 1) >= 0.9


def test_train_empty_dataset_raises():
    ds = Dataset(np.zeros((0, 10), np.float32), bytes(32))
    with pytest.raises(nn.TrainingError, match="empty"):
        nn.train_appearance(ds, nn.make_appearance_model(0), nn.TrainConfig(epochs=1), BOUNDS)


def test_fourier_matrix_frozen_by_training():
    ds = make_dataset(5000, cosine_target, seed=4)
    model = nn.make_appearance_model(seed=3)
    g_before = model.fourier.matrix.copy()
    nn.train_appearance(ds, model, nn.TrainConfig(batch_size=1024, epochs=2, seed=0), BOUNDS)
    np.testing.assert_array_equal(model.fourier.matrix, g_before)


# -------------------------------------------------------------------- files


def test_weights_round_trip_bitwise(tmp_path):
    m = nn.make_appearance_model(seed=9)
    p1, p2 = tmp_path / "a.nbrf", tmp_path / "b.nbrf"
    nn.save_weights(m, p1)
    m2 = nn.load_weights(p1)
    nn.save_weights(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    x = np.random.default_rng(0).random((16, 7)).astype(np.float32)
    np.testing.assert_array_equal(m.forward(x), m2.forward(x))
    assert m2.skips == [(1, 3), (2, 4)]
    assert m2.kind == nn.KIND_APPEARANCE


def test_weights_file_size_formula(tmp_path):
    for maker in (nn.make_appearance_model, nn.make_importance_model):
        m = maker(seed=1)
        p = tmp_path / "m.nbrf"
        nn.save_weights(m, p)
        assert p.stat().st_size == nn.expected_file_size(m)


def test_weights_total_under_budget():
    total = nn.expected_file_size(nn.make_appearance_model(0)) + nn.expected_file_size(
        nn.make_importance_model(0)
    )
    assert total <= 4 * 2**20


def test_weights_bad_magic(tmp_path):
    p = tmp_path / "bad.nbrf"
    p.write_bytes(b"JUNK" + bytes(100))
    with pytest.raises(nn.WeightsError, match="bad.nbrf"):
        nn.load_weights(p)


def test_weights_truncation(tmp_path):
    m = nn.make_importance_model(seed=2)
    p = tmp_path / "t.nbrf"
    nn.save_weights(m, p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) // 2])
    with pytest.raises(nn.WeightsError, match="truncated"):
        nn.load_weights(p)


def test_production_architectures():
    m = nn.make_appearance_model(0)
    assert m.layer_dims == [512, 128, 128, 128, 128, 3]
    assert m.skips == [(1, 3), (2, 4)]
    mi = nn.make_importance_model(0)
    assert mi.layer_dims == [512, 512, 128, 32, 1]
    assert mi.output_dim == 1
