"""
Small feed-forward classifier predicting clutch engagement from design
parameters, written directly on numpy.

Inputs are standardized with constants stored in the model; hidden layers use
tanh or relu; the single output is logistic. Training minimizes mean binary
cross-entropy with plain mini-batch gradient descent.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TrainingError

ACTIVATIONS = ("tanh", "relu")
GRID_COLUMNS = ("shoe_mass", "preload", "probability", "engaged")


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple = (2, 16, 16, 1)
    hidden_activation: str = "tanh"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 3:
            raise DomainError("need at least one hidden layer")
        if sizes[-1] != 1:
            raise DomainError("output layer must have size 1")
        if min(sizes) < 1:
            raise DomainError("layer sizes must be positive")
        if self.hidden_activation not in ACTIVATIONS:
            raise DomainError(f"hidden_activation must be one of {ACTIVATIONS}")
        object.__setattr__(self, "layer_sizes", sizes)


@dataclass
class MlpModel:
    spec: MlpSpec
    weights: list          # per layer, shape (fan_out, fan_in)
    biases: list           # per layer, shape (fan_out,)
    feature_means: np.ndarray
    feature_stds: np.ndarray

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise DomainError("layer count does not match layer_sizes")
        for w, b, n_in, n_out in zip(self.weights, self.biases, sizes, sizes[1:]):
            if np.shape(w) != (n_out, n_in) or np.shape(b) != (n_out,):
                raise DomainError("weight dimensions do not chain")
        self.feature_means = np.asarray(self.feature_means, dtype=float)
        self.feature_stds = np.asarray(self.feature_stds, dtype=float)
        if self.feature_means.shape != (sizes[0],) or self.feature_stds.shape != (sizes[0],):
            raise DomainError("standardization constants do not match the input size")
        if not np.all(self.feature_stds > 0):
            raise DomainError("feature_stds must be > 0")

    @property
    def n_features(self):
        return self.spec.layer_sizes[0]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 400
    batch_size: int = 32
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not (self.learning_rate > 0 and self.epochs > 0 and self.batch_size > 0):
            raise DomainError("learning_rate, epochs and batch_size must be positive")
        if not 0 < self.validation_fraction < 0.5:
            raise DomainError("validation_fraction must lie in (0, 0.5)")


def init_model(spec, rng, feature_means=None, feature_stds=None):
    """Glorot-uniform weights, zero biases."""
    sizes = spec.layer_sizes
    weights, biases = [], []
    for n_in, n_out in zip(sizes, sizes[1:]):
        limit = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    means = np.zeros(sizes[0]) if feature_means is None else feature_means
    stds = np.ones(sizes[0]) if feature_stds is None else feature_stds
    return MlpModel(spec, weights, biases, means, stds)


def _act(name, z):
    return np.tanh(z) if name == "tanh" else np.maximum(z, 0.0)


def _act_grad(name, z, a):
    return 1.0 - a * a if name == "tanh" else (z > 0).astype(float)


def _sigmoid(z):
    # exp of a non-positive number only
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _check_features(model, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise DomainError(f"expected {model.n_features} features, got shape {np.shape(x)}")
    return x


def _forward(model, x):
    """Logits plus the per-layer cache used by backprop."""
    act = model.spec.hidden_activation
    a = (x - model.feature_means) / model.feature_stds
    cache = [(None, a)]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        # row-wise reduction, so a row's result does not depend on the batch it is in
        z = np.sum(a[:, None, :] * w[None, :, :], axis=-1) + b
        a = z if i == last else _act(act, z)
        cache.append((z, a))
    return a[:, 0], cache


def predict_proba(model, x):
    logits, _ = _forward(model, _check_features(model, x))
    return _sigmoid(logits)


def forward(model, features):
    """Engagement probability for one feature vector."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise DomainError("forward takes a single feature vector")
    return float(predict_proba(model, features)[0])


def loss_and_gradients(model, x, y):
    """Mean binary cross-entropy and its gradients w.r.t. every weight and bias."""
    x = _check_features(model, x)
    y = np.asarray(y, dtype=float)
    logits, cache = _forward(model, x)
    # log(1 + e^z) - y z, evaluated without overflow
    loss = float(np.mean(np.maximum(logits, 0) + np.log1p(np.exp(-np.abs(logits))) - y * logits))

    act = model.spec.hidden_activation
    delta = ((_sigmoid(logits) - y) / len(y))[:, None]
    grad_w = [None] * len(model.weights)
    grad_b = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        a_prev = cache[i][1]
        grad_w[i] = delta.T @ a_prev
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            z_prev, _ = cache[i]
            delta = (delta @ model.weights[i]) * _act_grad(act, z_prev, a_prev)
    return loss, grad_w, grad_b


def _as_arrays(dataset):
    if hasattr(dataset, "features"):
        return dataset.features()
    x, y = dataset
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def classification_metrics(y_true, y_pred):
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    tp = int(np.sum(y_true & y_pred))
    fp = int(np.sum(~y_true & y_pred))
    fn = int(np.sum(y_true & ~y_pred))
    n = len(y_true)
    return {
        "accuracy": float(np.mean(y_true == y_pred)) if n else float("nan"),
        "precision": tp / (tp + fp) if tp + fp else 0.0,
        "recall": tp / (tp + fn) if tp + fn else 0.0,
    }


def train(dataset, spec, cfg, history=None):
    """Fit a classifier; returns (model, metrics).

    `dataset` is an EngagementDataset or an (x, y) pair. A seeded shuffle
    holds out `validation_fraction` of the rows for the reported metrics.
    If `history` is a list, the full training loss after each epoch is
    appended to it.
    """
    x, y = _as_arrays(dataset)
    if x.ndim != 2 or x.shape[1] != spec.layer_sizes[0]:
        raise TrainingError(f"dataset has {x.shape[-1]} features, spec expects {spec.layer_sizes[0]}")
    if len(np.unique(y)) < 2:
        raise TrainingError("dataset contains a single class; nothing to separate")

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(y))
    n_val = max(1, int(round(cfg.validation_fraction * len(y))))
    val, tr = order[:n_val], order[n_val:]
    if len(np.unique(y[tr])) < 2:
        raise TrainingError("training split contains a single class")

    stds = x[tr].std(axis=0)
    stds[stds == 0] = 1.0
    model = init_model(spec, rng, x[tr].mean(axis=0), stds)

    for _ in range(cfg.epochs):
        perm = rng.permutation(tr)
        for start in range(0, len(perm), cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            _, gw, gb = loss_and_gradients(model, x[idx], y[idx])
            for w, b, dw, db in zip(model.weights, model.biases, gw, gb):
                w -= cfg.learning_rate * dw
                b -= cfg.learning_rate * db
        if history is not None:
            history.append(loss_and_gradients(model, x[tr], y[tr])[0])

    metrics = classification_metrics(y[val], predict_proba(model, x[val]) >= 0.5)
    metrics["train_accuracy"] = classification_metrics(y[tr], predict_proba(model, x[tr]) >= 0.5)["accuracy"]
    metrics["train_loss"] = loss_and_gradients(model, x[tr], y[tr])[0]
    metrics["n_train"] = int(len(tr))
    metrics["n_validation"] = int(len(val))
    return model, metrics


def predict_engagement(model, shoe_mass, preload, *extra):
    """True when the predicted engagement probability is >= 0.5 (ties engage)."""
    return forward(model, [shoe_mass, preload, *extra]) >= 0.5


@dataclass(frozen=True)
class GridPrediction:
    shoe_mass: float
    preload: float
    probability: float
    engaged: bool


def decision_grid(model, grid, extra=()):
    """Prediction at every (mass, preload) node of `grid`, row-major."""
    points = grid.points()
    x = np.array([[m, f, *extra] for m, f in points], dtype=float)
    probs = predict_proba(model, x)
    return [GridPrediction(m, f, float(p), bool(p >= 0.5)) for (m, f), p in zip(points, probs)]


def write_decision_grid_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_COLUMNS)
        for r in rows:
            writer.writerow([repr(r.shoe_mass), repr(r.preload), repr(r.probability), int(r.engaged)])


def model_to_dict(model):
    return {
        "spec": {"layer_sizes": list(model.spec.layer_sizes),
                 "hidden_activation": model.spec.hidden_activation,
                 "output": "logistic"},
        "feature_means": [float(v) for v in model.feature_means],
        "feature_stds": [float(v) for v in model.feature_stds],
        "layers": [{"weights": [[float(v) for v in row] for row in w],
                    "biases": [float(v) for v in b]}
                   for w, b in zip(model.weights, model.biases)],
    }


def model_from_dict(data):
    spec = MlpSpec(tuple(data["spec"]["layer_sizes"]), data["spec"]["hidden_activation"])
    weights = [np.array(layer["weights"], dtype=float).reshape(n_out, n_in)
               for layer, n_in, n_out in zip(data["layers"], spec.layer_sizes, spec.layer_sizes[1:])]
    biases = [np.array(layer["biases"], dtype=float) for layer in data["layers"]]
    return MlpModel(spec, weights, biases, np.array(data["feature_means"]), np.array(data["feature_stds"]))


def dumps_model(model):
    # json writes floats with repr, which round-trips exactly
    return json.dumps(model_to_dict(model), indent=1) + "\n"


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
