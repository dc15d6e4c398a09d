"""Trainable detector on pooled entropy-level histograms.

Features are per-channel 5-bin histograms of level indices over the
map, concatenated channel-major. The classifier is a one-hidden-layer
MLP (tanh hidden, sigmoid output) trained with binary cross entropy
under the Adam update rule; gradients are analytic and checked against
finite differences in the tests.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, TrainingError
from .lep import LepMap

PRED_EPS = 1e-7


def featurize(lep: LepMap) -> np.ndarray:
    """Concatenated per-channel level histograms, each summing to 1."""
    levels = lep.levels
    n = levels.shape[0] * levels.shape[1]
    out = np.empty(5 * levels.shape[2], dtype=np.float64)
    for ch in range(levels.shape[2]):
        counts = np.bincount(levels[:, :, ch].ravel(), minlength=5)
        out[ch * 5 : ch * 5 + 5] = counts / n
    return out


def _sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss(preds, labels) -> float:
    """Mean binary cross entropy; predictions clamped to [eps, 1-eps]."""
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if preds.size == 0:
        raise ConfigError("bce_loss needs at least one sample")
    if preds.shape != labels.shape:
        raise DimensionError(f"preds {preds.shape} vs labels {labels.shape}")
    p = np.clip(preds, PRED_EPS, 1.0 - PRED_EPS)
    return float(-(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)).mean())


@dataclass
class TrainSettings:
    seed: int = 0
    epochs: int = 200
    learning_rate: float = 0.002
    batch_size: int = 64
    hidden_dim: int = 16


@dataclass
class DetectorModel:
    """Two affine layers: tanh hidden, sigmoid output."""

    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    metadata: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def to_json(self) -> str:
        doc = {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": float(self.b2),
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DetectorModel":
        doc = json.loads(text)
        model = cls(
            w1=np.asarray(doc["w1"], dtype=np.float64),
            b1=np.asarray(doc["b1"], dtype=np.float64),
            w2=np.asarray(doc["w2"], dtype=np.float64),
            b2=float(doc["b2"]),
            metadata=doc.get("metadata", {}),
        )
        if model.w1.shape != (doc["hidden_dim"], doc["input_dim"]):
            raise ConfigError("model weight dims do not match declared dims")
        if model.b1.shape != (model.hidden_dim,) or model.w2.shape != (model.hidden_dim,):
            raise ConfigError("model bias/output dims do not match declared dims")
        if not (
            np.isfinite(model.w1).all()
            and np.isfinite(model.b1).all()
            and np.isfinite(model.w2).all()
            and np.isfinite(model.b2)
        ):
            raise ConfigError("model weights must be finite")
        return model


def predict(model: DetectorModel, features) -> np.ndarray | float:
    """Detection probability in (0, 1); accepts one vector or a batch."""
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.input_dim:
        raise DimensionError(
            f"feature dim {x.shape[1]} does not match model input {model.input_dim}"
        )
    hidden = np.tanh(x @ model.w1.T + model.b1)
    p = _sigmoid(hidden @ model.w2 + model.b2)
    return float(p[0]) if single else p


def _loss_and_grads(model: DetectorModel, x: np.ndarray, y: np.ndarray):
    """BCE loss plus analytic gradients for every parameter."""
    n = x.shape[0]
    z1 = x @ model.w1.T + model.b1
    hidden = np.tanh(z1)
    z2 = hidden @ model.w2 + model.b2
    p = _sigmoid(z2)
    loss = bce_loss(p, y)

    dz2 = (p - y) / n
    gw2 = hidden.T @ dz2
    gb2 = float(dz2.sum())
    dh = np.outer(dz2, model.w2)
    dz1 = dh * (1.0 - hidden * hidden)
    gw1 = dz1.T @ x
    gb1 = dz1.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


def train(features, labels, settings: TrainSettings | None = None) -> DetectorModel:
    """Mini-batch Adam; deterministic for a fixed seed."""
    settings = settings or TrainSettings()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DimensionError(f"features {x.shape} vs labels {y.shape}")
    if x.shape[0] < 2:
        raise TrainingError("need at least two samples")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise TrainingError("training data must contain both classes")

    rng = np.random.default_rng(settings.seed)
    d = x.shape[1]
    h = settings.hidden_dim
    model = DetectorModel(
        w1=rng.normal(0.0, 1.0 / np.sqrt(d), size=(h, d)),
        b1=np.zeros(h),
        w2=rng.normal(0.0, 1.0 / np.sqrt(h), size=h),
        b2=0.0,
    )

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    params = [model.w1, model.b1, model.w2]
    m = [np.zeros_like(p) for p in params] + [0.0]
    v = [np.zeros_like(p) for p in params] + [0.0]
    lr = settings.learning_rate
    step = 0
    batch = max(1, settings.batch_size)

    for _ in range(settings.epochs):
        order = rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], batch):
            idx = order[start : start + batch]
            _, grads = _loss_and_grads(model, x[idx], y[idx])
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for k, g in enumerate(grads):
                m[k] = beta1 * m[k] + (1.0 - beta1) * g
                v[k] = beta2 * v[k] + (1.0 - beta2) * (g * g)
                update = lr * (m[k] / corr1) / (np.sqrt(v[k] / corr2) + eps)
                if k == 0:
                    model.w1 -= update
                elif k == 1:
                    model.b1 -= update
                elif k == 2:
                    model.w2 -= update
                else:
                    model.b2 -= update

    final_loss = bce_loss(predict(model, x), y)
    model.metadata = {
        "seed": settings.seed,
        "epochs": settings.epochs,
        "learning_rate": settings.learning_rate,
        "batch_size": settings.batch_size,
        "final_loss": final_loss,
    }
    return model
