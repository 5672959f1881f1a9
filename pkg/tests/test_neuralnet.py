from itertools import product

import numpy as np
import pytest

from mirrorselect import (
    ConfigurationError,
    InvalidDataError,
    NetConfig,
    RngSeed,
    TrainedNet,
    TrainingError,
    default_hidden_sizes,
    gradient_importance,
    load_net,
    path_importance,
    save_net,
    train,
)


def _random_net(gen, widths, activation="tanh", zero_bias=False):
    sizes = list(widths) + [1]
    weights = [
        gen.standard_normal((a, b)) for a, b in zip(sizes[:-1], sizes[1:])
    ]
    biases = [
        np.zeros(b) if zero_bias else 0.3 * gen.standard_normal(b)
        for b in sizes[1:]
    ]
    return TrainedNet(weights, biases, activation)


def _enumerate_paths(weights, j):
    # brute-force sum over every input-to-output path
    if len(weights) == 1:
        return float(weights[0][j, 0])
    hidden_ranges = [range(w.shape[1]) for w in weights[:-1]]
    total = 0.0
    for combo in product(*hidden_ranges):
        term = weights[0][j, combo[0]]
        for t in range(1, len(weights) - 1):
            term *= weights[t][combo[t - 1], combo[t]]
        term *= weights[-1][combo[-1], 0]
        total += term
    return total


# ---------------------------------------------------------------- config


def test_default_hidden_sizes():
    assert default_hidden_sizes(1) == (4, 4)
    assert default_hidden_sizes(20) == (60, 30)
    with pytest.raises(ConfigurationError):
        default_hidden_sizes(0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"hidden_sizes": ()},
        {"hidden_sizes": (0,)},
        {"activation": "swish"},
        {"epochs": -1},
        {"batch_size": 0},
        {"learning_rate": 0.0},
        {"weight_init_scale": -0.5},
        {"seed": 7},
    ],
)
def test_net_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        NetConfig(**kwargs)


# --------------------------------------------------------------- training


def test_zero_targets_zero_init_flat_trace(gen):
    x = gen.standard_normal((80, 3))
    cfg = NetConfig(hidden_sizes=(4,), epochs=10, batch_size=20,
                    weight_init_scale=0.0, seed=RngSeed(1))
    net = train(x, np.zeros(80), cfg)
    assert net.loss_trace == [0.0] * 11


def test_linear_target_trains_well(gen):
    x = gen.standard_normal(200)
    y = 3.0 * x
    cfg = NetConfig(hidden_sizes=(8,), epochs=300, batch_size=32,
                    learning_rate=1e-2, seed=RngSeed(5))
    net = train(x, y, cfg)
    assert net.loss_trace[-1] < 0.05 * net.loss_trace[0]


def test_training_deterministic(gen):
    x = gen.standard_normal((90, 4))
    y = x[:, 0] - x[:, 2] + 0.1 * gen.standard_normal(90)
    cfg = NetConfig(hidden_sizes=(6, 3), epochs=20, batch_size=30,
                    learning_rate=5e-3, seed=RngSeed(42))
    a = train(x, y, cfg)
    b = train(x, y, cfg)
    assert a.loss_trace == b.loss_trace
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)
    for ba, bb in zip(a.biases, b.biases):
        np.testing.assert_array_equal(ba, bb)


def test_loss_decreases_on_learnable_signal(gen):
    for rep in range(3):
        x = gen.standard_normal((150, 5))
        y = x @ np.array([2.0, -1.0, 0.0, 0.5, 0.0]) + 0.2 * gen.standard_normal(150)
        cfg = NetConfig(hidden_sizes=(10,), epochs=100, batch_size=50,
                        learning_rate=5e-3, seed=RngSeed(rep))
        net = train(x, y, cfg)
        assert len(net.loss_trace) == 101
        assert net.loss_trace[-1] <= net.loss_trace[0]


def test_paired_columns_share_scale(gen):
    x = np.column_stack([
        gen.standard_normal(100),
        5.0 * gen.standard_normal(100),
        gen.standard_normal(100),
    ])
    cfg = NetConfig(hidden_sizes=(4,), epochs=1, batch_size=50, seed=RngSeed(0))
    net = train(x, gen.standard_normal(100), cfg, paired_columns=[(0, 1)])
    s = x.std(axis=0)
    shared = np.sqrt((s[0] ** 2 + s[1] ** 2) / 2.0)
    np.testing.assert_allclose(net.input_scale[0], shared, rtol=1e-12)
    assert net.input_scale[0] == net.input_scale[1]
    np.testing.assert_allclose(net.input_scale[2], s[2], rtol=1e-12)


def test_paired_columns_out_of_range(gen):
    x = gen.standard_normal((50, 2))
    cfg = NetConfig(hidden_sizes=(4,), epochs=1, batch_size=10)
    with pytest.raises(ConfigurationError):
        train(x, x[:, 0], cfg, paired_columns=[(0, 2)])


def test_batch_size_exceeding_rows(gen):
    x = gen.standard_normal((10, 2))
    with pytest.raises(ConfigurationError):
        train(x, x[:, 0], NetConfig(hidden_sizes=(4,), batch_size=11))


def test_non_finite_data_rejected(gen):
    x = gen.standard_normal((20, 2))
    x[3, 1] = np.nan
    with pytest.raises(InvalidDataError):
        train(x, np.zeros(20), NetConfig(hidden_sizes=(4,), batch_size=5))


def test_divergence_raises_with_trace(gen):
    x = gen.standard_normal((64, 3))
    y = gen.standard_normal(64)
    cfg = NetConfig(hidden_sizes=(8,), activation="relu", epochs=60,
                    batch_size=16, learning_rate=1e6, seed=RngSeed(3))
    with pytest.raises(TrainingError) as info, np.errstate(all="ignore"):
        train(x, y, cfg)
    assert info.value.trace is not None
    assert len(info.value.trace) >= 2
    assert not np.isfinite(info.value.trace[-1])


def test_predictions_on_raw_scale(gen):
    x = 4.0 + 2.0 * gen.standard_normal((120, 2))
    y = 10.0 + x[:, 0]
    cfg = NetConfig(hidden_sizes=(8,), epochs=200, batch_size=40,
                    learning_rate=1e-2, seed=RngSeed(6))
    net = train(x, y, cfg)
    pred = net.predict(x)
    assert np.mean((pred - y) ** 2) < 0.25 * np.var(y)


# ------------------------------------------------------------- importances


def test_path_importance_hand_example():
    net = TrainedNet(
        [np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])],
        [np.zeros(2), np.zeros(1)],
    )
    imp = path_importance(net)
    assert imp.kind == "path_product"
    np.testing.assert_allclose(imp.values, [11.0], rtol=0, atol=0)


def test_path_importance_zero_row(gen):
    net = _random_net(gen, (3, 4, 2))
    net.weights[0][1, :] = 0.0
    assert path_importance(net).values[1] == 0.0


def test_path_importance_matches_enumeration(gen):
    for _ in range(20):
        depth = int(gen.integers(1, 4))
        widths = [int(gen.integers(1, 5)) for _ in range(depth + 1)]
        net = _random_net(gen, widths)
        values = path_importance(net).values
        assert len(values) == widths[0]
        for j in range(widths[0]):
            np.testing.assert_allclose(
                values[j], _enumerate_paths(net.weights, j),
                rtol=1e-12, atol=1e-12,
            )


def test_path_importance_no_hidden_layer(gen):
    net = TrainedNet([np.array([[2.0], [-3.0]])], [np.zeros(1)])
    np.testing.assert_array_equal(path_importance(net).values, [2.0, -3.0])


def test_path_importance_linear_in_input_weights(gen):
    net = _random_net(gen, (4, 3))
    base = path_importance(net).values
    scaled = TrainedNet(
        [2.0 * net.weights[0]] + [w.copy() for w in net.weights[1:]],
        [b.copy() for b in net.biases],
        net.activation,
    )
    np.testing.assert_array_equal(path_importance(scaled).values, 2.0 * base)


def test_linear_net_end_to_end_coefficients(gen):
    net = _random_net(gen, (5, 3, 2), activation="identity", zero_bias=True)
    coef = path_importance(net).values
    eye = np.eye(5)
    np.testing.assert_allclose(net.predict(eye) - net.predict(np.zeros(5)),
                               coef, rtol=1e-12, atol=1e-14)


def test_gradient_equals_path_for_identity(gen):
    net = _random_net(gen, (4, 3, 2), activation="identity")
    point = gen.standard_normal(4)
    np.testing.assert_allclose(
        gradient_importance(net, point).values,
        path_importance(net).values,
        rtol=1e-12,
    )


def test_gradient_at_zero_tanh_zero_bias(gen):
    net = _random_net(gen, (3, 4), activation="tanh", zero_bias=True)
    np.testing.assert_allclose(
        gradient_importance(net, np.zeros(3)).values,
        path_importance(net).values,
        rtol=1e-12,
    )


@pytest.mark.parametrize("activation", ["tanh", "relu"])
def test_gradient_matches_finite_differences(gen, activation):
    for _ in range(10):
        depth = int(gen.integers(1, 4))
        widths = [int(gen.integers(2, 8)) for _ in range(depth + 1)]
        net = _random_net(gen, widths, activation=activation)
        point = gen.standard_normal(widths[0])
        grad = gradient_importance(net, point)
        assert grad.kind == "gradient"
        h = 1e-5
        for j in range(widths[0]):
            up = point.copy(); up[j] += h
            dn = point.copy(); dn[j] -= h
            fd = (net.predict(up)[0] - net.predict(dn)[0]) / (2 * h)
            np.testing.assert_allclose(grad.values[j], fd, rtol=1e-4, atol=1e-7)


def test_gradient_includes_scalers(gen):
    x = 3.0 * gen.standard_normal((150, 3)) + 1.0
    y = 2.0 * x[:, 0] - x[:, 1] + 0.1 * gen.standard_normal(150)
    cfg = NetConfig(hidden_sizes=(8,), epochs=100, batch_size=50,
                    learning_rate=1e-2, seed=RngSeed(8))
    net = train(x, y, cfg)
    point = x[0]
    grad = gradient_importance(net, point).values
    h = 1e-5
    for j in range(3):
        up = point.copy(); up[j] += h
        dn = point.copy(); dn[j] -= h
        fd = (net.predict(up)[0] - net.predict(dn)[0]) / (2 * h)
        np.testing.assert_allclose(grad[j], fd, rtol=1e-4, atol=1e-7)


def test_gradient_point_validation(gen):
    net = _random_net(gen, (3, 2))
    with pytest.raises(InvalidDataError):
        gradient_importance(net, np.zeros(4))
    with pytest.raises(InvalidDataError):
        gradient_importance(net, np.array([0.0, np.inf, 0.0]))


# ------------------------------------------------------------- persistence


def test_save_load_round_trip(tmp_path, gen):
    x = gen.standard_normal((70, 3))
    y = x[:, 1] + 0.1 * gen.standard_normal(70)
    cfg = NetConfig(hidden_sizes=(5, 3), epochs=15, batch_size=35,
                    learning_rate=5e-3, seed=RngSeed(9))
    net = train(x, y, cfg)
    path = tmp_path / "net.json"
    save_net(net, path)
    back = load_net(path)
    assert back.activation == net.activation
    assert back.loss_trace == net.loss_trace
    for wa, wb in zip(net.weights, back.weights):
        np.testing.assert_array_equal(wa, wb)
    np.testing.assert_array_equal(back.input_mean, net.input_mean)
    np.testing.assert_array_equal(net.predict(x), back.predict(x))


def test_load_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidDataError):
        load_net(path)
    path.write_text('{"layers": [{"shape": [2, 1]}]}', encoding="utf-8")
    with pytest.raises(InvalidDataError):
        load_net(path)


def test_trained_net_shape_validation():
    with pytest.raises(ConfigurationError):
        TrainedNet([np.zeros((2, 3)), np.zeros((4, 1))],
                   [np.zeros(3), np.zeros(1)])
    with pytest.raises(ConfigurationError):
        TrainedNet([np.zeros((2, 2))], [np.zeros(2)])  # two outputs
    with pytest.raises(ConfigurationError):
        TrainedNet([], [])
