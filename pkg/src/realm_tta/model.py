"""Toy classifier with hand-derived gradients.

Architecture: ``h = tanh(W x + b)``, ``u = gamma * h + beta``,
``logits = V u + c``. ``W`` is a fixed random matrix; ``gamma``/``beta`` play
the role of normalization-layer affine parameters and are the only entries
touched at adaptation time (subject to ``adapt_mask``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ToyClassifier:
    feature_w: np.ndarray   # (d_feat, d_in), never trained
    feature_b: np.ndarray   # (d_feat,)
    gamma: np.ndarray       # (d_feat,)
    beta: np.ndarray        # (d_feat,)
    head_w: np.ndarray      # (K, d_feat)
    head_b: np.ndarray      # (K,)
    adapt_mask: np.ndarray = None  # bool over concat(gamma, beta)
    seed: int = 0

    def __post_init__(self):
        if self.adapt_mask is None:
            self.adapt_mask = np.ones(2 * self.d_feat, dtype=bool)
        self.adapt_mask = np.asarray(self.adapt_mask, dtype=bool)
        if self.adapt_mask.shape != (2 * self.d_feat,):
            raise ValueError("adapt_mask must cover gamma and beta")

    @property
    def d_in(self) -> int:
        return self.feature_w.shape[1]

    @property
    def d_feat(self) -> int:
        return self.feature_w.shape[0]

    @property
    def n_classes(self) -> int:
        return self.head_w.shape[0]

    @property
    def affine(self) -> np.ndarray:
        """Flat view ``concat(gamma, beta)`` (a copy)."""
        return np.concatenate([self.gamma, self.beta])

    def set_affine(self, theta: np.ndarray) -> None:
        d = self.d_feat
        self.gamma = np.array(theta[:d], dtype=float)
        self.beta = np.array(theta[d:], dtype=float)

    def copy(self) -> "ToyClassifier":
        return ToyClassifier(
            self.feature_w.copy(), self.feature_b.copy(), self.gamma.copy(),
            self.beta.copy(), self.head_w.copy(), self.head_b.copy(),
            self.adapt_mask.copy(), self.seed,
        )

    # -- serialization ------------------------------------------------------
    _ARRAYS = ("feature_w", "feature_b", "gamma", "beta", "head_w", "head_b")

    def to_dict(self) -> dict:
        doc = {"d_in": self.d_in, "d_feat": self.d_feat,
               "n_classes": self.n_classes, "seed": self.seed}
        for name in self._ARRAYS:
            doc[name] = getattr(self, name).tolist()
        doc["adapt_mask"] = self.adapt_mask.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ToyClassifier":
        arrays = {name: np.asarray(doc[name], dtype=float) for name in cls._ARRAYS}
        model = cls(**arrays, adapt_mask=np.asarray(doc["adapt_mask"], dtype=bool),
                    seed=int(doc.get("seed", 0)))
        if (model.d_in, model.d_feat, model.n_classes) != (doc["d_in"], doc["d_feat"], doc["n_classes"]):
            raise ValueError("model document dims disagree with parameter shapes")
        return model

    def save(self, path) -> None:
        # json writes floats with repr, which round-trips float64 exactly
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "ToyClassifier":
        return cls.from_dict(json.loads(Path(path).read_text()))


def init_model(d_in: int = 2, d_feat: int = 32, n_classes: int = 3, seed: int = 0,
               feature_scale: float = 0.2) -> ToyClassifier:
    """Random initialization; ``feature_scale`` is the std of the frozen feature matrix."""
    rng = np.random.default_rng([seed, 101])
    return ToyClassifier(
        feature_w=rng.normal(0.0, feature_scale, size=(d_feat, d_in)),
        feature_b=rng.normal(0.0, 1.0, size=d_feat),
        gamma=np.ones(d_feat),
        beta=np.zeros(d_feat),
        head_w=rng.normal(0.0, 1.0 / np.sqrt(d_feat), size=(n_classes, d_feat)),
        head_b=np.zeros(n_classes),
        seed=seed,
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def _hidden(model: ToyClassifier, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.d_in:
        raise ValueError(f"expected input dim {model.d_in}, got {x.shape[-1]}")
    return np.tanh(x @ model.feature_w.T + model.feature_b)


def forward(model: ToyClassifier, x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(logits, probs)``; works on one sample or a batch of rows."""
    h = _hidden(model, x)
    logits = (model.gamma * h + model.beta) @ model.head_w.T + model.head_b
    return logits, softmax(logits)


def predict(model: ToyClassifier, x) -> np.ndarray:
    return np.argmax(forward(model, x)[0], axis=-1)


def accuracy(model: ToyClassifier, x, y) -> float:
    return float(np.mean(predict(model, x) == np.asarray(y)))


def entropy_loss_and_grad(model: ToyClassifier, x) -> tuple[float, np.ndarray, np.ndarray]:
    """Prediction entropy of one sample and its gradient w.r.t. the masked affine params.

    Returns ``(loss, grad, probs)`` where ``grad`` has one entry per true value
    of ``adapt_mask`` (ordered as in ``concat(gamma, beta)``).
    """
    h = _hidden(model, x)
    if h.ndim != 1:
        raise ValueError("entropy_loss_and_grad takes a single sample")
    logits = (model.gamma * h + model.beta) @ model.head_w.T + model.head_b
    logp = log_softmax(logits)
    p = np.exp(logp)
    loss = float(-np.sum(p * logp))
    # dH/dz_k = -p_k (log p_k + H)
    d_logits = -p * (logp + loss)
    d_u = model.head_w.T @ d_logits
    grad = np.concatenate([d_u * h, d_u])
    return loss, grad[model.adapt_mask], p


@dataclass
class PretrainReport:
    accuracy: float
    epochs: int
    seed: int
    converged: bool
    floor: float
    losses: list = field(default_factory=list)


def pretrain(model: ToyClassifier, x, y, epochs: int = 50, lr: float = 0.1, seed: int = 0,
             batch_size: int = 32, accuracy_floor: float = 0.9) -> tuple[ToyClassifier, PretrainReport]:
    """Cross-entropy minibatch SGD on every trainable array except ``feature_w``.

    Works on a copy; the input model is left untouched. Non-convergence is
    reported through ``PretrainReport.converged``, not raised.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(x) == 0:
        raise ValueError("pretraining set is empty")
    if not lr > 0:
        raise ValueError("lr must be positive")
    m = model.copy()
    rng = np.random.default_rng([seed, 202])
    onehot = np.eye(m.n_classes)[y]
    losses = []
    for _ in range(epochs):
        order = rng.permutation(len(x))
        total = 0.0
        for start in range(0, len(x), batch_size):
            idx = order[start:start + batch_size]
            xb, tb = x[idx], onehot[idx]
            n = len(idx)
            h = np.tanh(xb @ m.feature_w.T + m.feature_b)
            u = m.gamma * h + m.beta
            logits = u @ m.head_w.T + m.head_b
            logp = log_softmax(logits)
            total += float(-np.sum(tb * logp))
            d_logits = (np.exp(logp) - tb) / n
            d_u = d_logits @ m.head_w
            d_z = d_u * m.gamma * (1.0 - h**2)
            m.head_w -= lr * d_logits.T @ u
            m.head_b -= lr * d_logits.sum(0)
            m.gamma -= lr * np.sum(d_u * h, axis=0)
            m.beta -= lr * d_u.sum(0)
            m.feature_b -= lr * d_z.sum(0)
        losses.append(total / len(x))
    acc = accuracy(m, x, y)
    return m, PretrainReport(acc, epochs, seed, acc >= accuracy_floor, accuracy_floor, losses)
