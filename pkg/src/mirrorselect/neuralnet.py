"""Small fully connected regression networks and weight-based feature
importances.

Training is plain minibatch SGD with a fixed learning rate on mean
squared error.  Inputs and targets are standardized internally (columns
declared as mirrored pairs share one scale so the pair stays comparable);
biases are trained but excluded from the importance measures.

Two importances are provided: a path product that multiplies the weight
matrices straight through (activation independent), and the gradient of
the fitted function at a point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidDataError, TrainingError
from .rng import RngSeed

_SCALE_FLOOR = 1e-12


def _relu(s):
    return np.maximum(s, 0.0)


def _drelu(s):
    return (s > 0).astype(float)


def _dtanh(s):
    t = np.tanh(s)
    return 1.0 - t * t


ACTIVATIONS = {
    "tanh": (np.tanh, _dtanh),
    "relu": (_relu, _drelu),
    "identity": (lambda s: s, lambda s: np.ones_like(s)),
}


def default_hidden_sizes(d: int) -> tuple[int, int]:
    """Two hidden layers scaled to the logarithm of the input width."""
    if d < 1:
        raise ConfigurationError(f"input width must be positive, got {d}")
    return (
        max(4, round(20.0 * math.log(d))),
        max(4, round(10.0 * math.log(d))),
    )


@dataclass(frozen=True)
class NetConfig:
    """Architecture and optimization settings.

    ``hidden_sizes=None`` defers to ``default_hidden_sizes`` applied to
    the input width at training time.
    """

    hidden_sizes: tuple[int, ...] | None = None
    activation: str = "tanh"
    epochs: int = 300
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_init_scale: float = 1.0
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        if self.hidden_sizes is not None:
            sizes = tuple(int(s) for s in self.hidden_sizes)
            if not sizes:
                raise ConfigurationError("at least one hidden layer is required")
            if any(s < 1 for s in sizes):
                raise ConfigurationError(f"hidden sizes must be positive: {sizes}")
            object.__setattr__(self, "hidden_sizes", sizes)
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(
                f"unknown activation {self.activation!r}; "
                f"expected one of {sorted(ACTIVATIONS)}"
            )
        if not isinstance(self.epochs, int) or self.epochs < 0:
            raise ConfigurationError(f"epochs must be a nonnegative integer, got {self.epochs}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be a positive integer, got {self.batch_size}")
        lr = float(self.learning_rate)
        if not math.isfinite(lr) or lr <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if not math.isfinite(float(self.weight_init_scale)) or self.weight_init_scale < 0:
            raise ConfigurationError("weight_init_scale must be nonnegative")
        if not isinstance(self.seed, RngSeed):
            raise ConfigurationError("seed must be an RngSeed")


@dataclass(eq=False)
class TrainedNet:
    """Weights, biases and the scalers the net was trained with.

    ``weights[t]`` maps layer t to layer t+1 (shape in_t x out_t); the
    final matrix has one output column.  Scaler fields are None for
    hand-built nets, in which case predictions are raw forward passes.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"
    loss_trace: list[float] = field(default_factory=list)
    input_mean: np.ndarray | None = None
    input_scale: np.ndarray | None = None
    target_mean: float = 0.0
    target_scale: float = 1.0

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ConfigurationError("weights and biases must pair up layer by layer")
        if not self.weights:
            raise ConfigurationError("network needs at least one layer")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float).reshape(-1) for b in self.biases]
        for t, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2:
                raise ConfigurationError(f"weight matrix {t} must be 2-d")
            if b.shape[0] != w.shape[1]:
                raise ConfigurationError(
                    f"bias {t} has length {b.shape[0]}, expected {w.shape[1]}"
                )
            if t + 1 < len(self.weights) and self.weights[t + 1].shape[0] != w.shape[1]:
                raise ConfigurationError(f"layers {t} and {t + 1} do not compose")
        if self.weights[-1].shape[1] != 1:
            raise ConfigurationError("final layer must have a single output")

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def depth(self) -> int:
        """Number of hidden layers."""
        return len(self.weights) - 1

    def _forward_internal(self, a: np.ndarray) -> np.ndarray:
        act, _ = ACTIVATIONS[self.activation]
        for t in range(len(self.weights) - 1):
            a = act(a @ self.weights[t] + self.biases[t])
        return (a @ self.weights[-1] + self.biases[-1])[:, 0]

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.input_width:
            raise InvalidDataError(
                f"input has {x.shape[1]} columns, net expects {self.input_width}"
            )
        if self.input_mean is not None:
            x = (x - self.input_mean) / self.input_scale
        out = self._forward_internal(x)
        return out * self.target_scale + self.target_mean


def _validate_training_data(inputs, targets):
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidDataError(f"inputs must be 2-d, got {x.ndim}-d")
    y = np.asarray(targets, dtype=float).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise InvalidDataError(
            f"inputs have {x.shape[0]} rows but targets have {y.shape[0]}"
        )
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise InvalidDataError("training data contains non-finite values")
    return x, y


def train(
    inputs,
    targets,
    config: NetConfig = NetConfig(),
    paired_columns=None,
) -> TrainedNet:
    """Fit a network to (inputs, targets).

    ``paired_columns`` is an iterable of (i, j) column index pairs that
    must share a standardization scale (the root mean square of the two
    column standard deviations); mirrored halves pass through here so a
    larger perturbation cannot shrink one half's effective weights.

    Raises TrainingError, carrying the loss trace, if the loss leaves the
    finite range.  The trace has one entry before training plus one per
    epoch, all measured on the full data.
    """
    x, y = _validate_training_data(inputs, targets)
    n, d = x.shape
    if n < config.batch_size:
        raise ConfigurationError(
            f"batch_size {config.batch_size} exceeds the {n} available rows"
        )

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    if paired_columns is not None:
        for i, j in paired_columns:
            if not (0 <= i < d and 0 <= j < d):
                raise ConfigurationError(f"paired columns ({i}, {j}) out of range")
            shared = math.sqrt((scale[i] ** 2 + scale[j] ** 2) / 2.0)
            scale[i] = shared
            scale[j] = shared
    scale = np.where(scale < _SCALE_FLOOR, 1.0, scale)
    xs = (x - mean) / scale

    y_mean = float(y.mean())
    y_scale = float(y.std())
    if y_scale < _SCALE_FLOOR:
        y_scale = 1.0
    ys = (y - y_mean) / y_scale

    hidden = config.hidden_sizes
    if hidden is None:
        hidden = default_hidden_sizes(d)
    sizes = [d, *hidden, 1]

    gen = config.seed.generator()
    weights = []
    biases = []
    for a, b in zip(sizes[:-1], sizes[1:]):
        limit = config.weight_init_scale / math.sqrt(a)
        weights.append(gen.uniform(-limit, limit, size=(a, b)))
        biases.append(np.zeros(b))

    act, dact = ACTIVATIONS[config.activation]
    n_layers = len(weights)

    def full_loss() -> float:
        a = xs
        for t in range(n_layers - 1):
            a = act(a @ weights[t] + biases[t])
        out = (a @ weights[-1] + biases[-1])[:, 0]
        return float(np.mean((out - ys) ** 2))

    trace = [full_loss()]
    lr = config.learning_rate
    for _ in range(config.epochs):
        perm = gen.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb = xs[idx]
            yb = ys[idx]
            pres = []
            acts = [xb]
            a = xb
            for t in range(n_layers - 1):
                s = a @ weights[t] + biases[t]
                pres.append(s)
                a = act(s)
                acts.append(a)
            out = (a @ weights[-1] + biases[-1])[:, 0]
            delta = (2.0 / idx.shape[0]) * (out - yb)

            grad_w = [None] * n_layers
            grad_b = [None] * n_layers
            grad_w[-1] = acts[-1].T @ delta[:, None]
            grad_b[-1] = np.array([delta.sum()])
            d_a = delta[:, None] @ weights[-1].T
            for t in range(n_layers - 2, -1, -1):
                d_s = d_a * dact(pres[t])
                grad_w[t] = acts[t].T @ d_s
                grad_b[t] = d_s.sum(axis=0)
                if t > 0:
                    d_a = d_s @ weights[t].T
            for t in range(n_layers):
                weights[t] -= lr * grad_w[t]
                biases[t] -= lr * grad_b[t]
        loss = full_loss()
        trace.append(loss)
        if not math.isfinite(loss):
            raise TrainingError(
                f"loss became non-finite at epoch {len(trace) - 1} "
                f"(learning rate {lr} may be too large)",
                trace=trace,
            )
    return TrainedNet(
        weights,
        biases,
        config.activation,
        trace,
        mean,
        scale,
        y_mean,
        y_scale,
    )


@dataclass(frozen=True)
class ImportanceVector:
    """Per-input importance scores; ``kind`` names the measure."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return self.values.shape[0]


def path_importance(net: TrainedNet) -> ImportanceVector:
    """Product of the weight matrices straight through the net.

    Entry j sums, over all input-to-output paths starting at input j, the
    product of the weights along the path.  Biases and activations do not
    enter, so the score is exact for identity activations and a linear
    proxy otherwise.  Scores live on the net's internal standardized
    scale.
    """
    chain = net.weights[-1]
    for t in range(len(net.weights) - 2, 0, -1):
        chain = net.weights[t] @ chain
    if len(net.weights) == 1:
        values = net.weights[0][:, 0]
    else:
        values = (net.weights[0] @ chain)[:, 0]
    return ImportanceVector(values, "path_product")


def gradient_importance(net: TrainedNet, at_point) -> ImportanceVector:
    """Gradient of ``net.predict`` at one raw-scale input point.

    Exactly the derivative of the prediction, including the effect of the
    internal scalers, so it can be checked against finite differences of
    ``predict``.
    """
    point = np.asarray(at_point, dtype=float).reshape(-1)
    if point.shape[0] != net.input_width:
        raise InvalidDataError(
            f"point has {point.shape[0]} entries, net expects {net.input_width}"
        )
    if not np.all(np.isfinite(point)):
        raise InvalidDataError("evaluation point contains non-finite values")
    v = point
    if net.input_mean is not None:
        v = (v - net.input_mean) / net.input_scale
    act, dact = ACTIVATIONS[net.activation]
    a = v[None, :]
    chain = net.weights[0]
    for t in range(len(net.weights) - 1):
        s = (a @ net.weights[t] + net.biases[t])[0]
        chain = (chain * dact(s)[None, :]) @ net.weights[t + 1]
        a = act(s)[None, :]
    values = chain[:, 0] * net.target_scale
    if net.input_scale is not None:
        values = values / net.input_scale
    return ImportanceVector(values, "gradient")


def save_net(net: TrainedNet, path) -> None:
    """Persist a net as JSON (shapes plus row-major values)."""
    doc = {
        "activation": net.activation,
        "layers": [
            {
                "shape": list(w.shape),
                "weights": [float(v) for v in w.ravel()],
                "biases": [float(v) for v in b],
            }
            for w, b in zip(net.weights, net.biases)
        ],
        "loss_trace": [float(v) for v in net.loss_trace],
        "input_mean": None if net.input_mean is None else [float(v) for v in net.input_mean],
        "input_scale": None if net.input_scale is None else [float(v) for v in net.input_scale],
        "target_mean": float(net.target_mean),
        "target_scale": float(net.target_scale),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_net(path) -> TrainedNet:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise InvalidDataError(f"cannot parse net snapshot {path}: {err}") from err
    try:
        weights = [
            np.array(layer["weights"], dtype=float).reshape(layer["shape"])
            for layer in doc["layers"]
        ]
        biases = [np.array(layer["biases"], dtype=float) for layer in doc["layers"]]
        return TrainedNet(
            weights,
            biases,
            doc["activation"],
            [float(v) for v in doc.get("loss_trace", [])],
            None if doc.get("input_mean") is None else np.array(doc["input_mean"]),
            None if doc.get("input_scale") is None else np.array(doc["input_scale"]),
            float(doc.get("target_mean", 0.0)),
            float(doc.get("target_scale", 1.0)),
        )
    except (KeyError, ValueError) as err:
        raise InvalidDataError(f"malformed net snapshot {path}: {err}") from err
