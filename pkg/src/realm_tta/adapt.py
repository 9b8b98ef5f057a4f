"""Online single-sample adaptation: NoAdapt, Tent, EATA and REALM.

One engine owns one model copy and processes samples strictly in order with
batch size one. For every sample the prediction is taken before the update.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from realm_tta import robust_loss
from realm_tta.model import ToyClassifier, entropy_loss_and_grad
from realm_tta.robust_loss import RobustParams

COS_SPACES = ("probs", "centered")
CSV_COLUMNS = ("step", "raw_entropy", "effective_loss", "weight", "s_div", "pred",
               "truth", "updated", "alpha", "lambda", "anomaly")


class Variant(str, Enum):
    NO_ADAPT = "NoAdapt"
    TENT = "Tent"
    EATA = "EATA"
    REALM = "REALM"


@dataclass(frozen=True)
class Strategy:
    variant: Variant = Variant.REALM
    use_squared: bool = False
    use_scale_factor: bool = False
    use_div_gate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is not Variant.REALM and (self.use_squared or self.use_scale_factor):
            raise ValueError("use_squared/use_scale_factor only apply to REALM")
        if self.variant is Variant.EATA and not self.use_div_gate:
            raise ValueError("EATA always uses the diversity gate")


@dataclass(frozen=True)
class OptimizerConfig:
    lr_theta: float = 0.01
    momentum: float = 0.9
    lr_alpha_lambda: float | None = None  # None -> 2 * lr_theta

    def __post_init__(self):
        if not self.lr_theta > 0:
            raise ValueError("lr_theta must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.lr_alpha_lambda is not None and not self.lr_alpha_lambda > 0:
            raise ValueError("lr_alpha_lambda must be positive")

    @property
    def lr_robust(self) -> float:
        return 2.0 * self.lr_theta if self.lr_alpha_lambda is None else self.lr_alpha_lambda


def cosine(a, b) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass
class EmaTracker:
    """Moving average of past predictions used by the diversity gate."""

    decay: float = 0.9
    threshold: float = 0.4
    m: np.ndarray | None = None
    space: str = "centered"

    def __post_init__(self):
        if not 0 < self.decay < 1:
            raise ValueError("EMA decay must lie in (0, 1)")
        if self.space not in COS_SPACES:
            raise ValueError(f"unknown cosine space {self.space!r}")

    def similarity(self, probs) -> float:
        if self.space == "centered":
            k = len(probs)
            return cosine(probs - 1.0 / k, self.m - 1.0 / k)
        return cosine(probs, self.m)


def div_gate(ema: EmaTracker, probs) -> tuple[int, EmaTracker]:
    """Return ``(gate, ema)``; the EMA moves only when the gate opens.

    The first sample always opens the gate and seeds the average. The gate is a
    plain integer, so it multiplies gradients without contributing to them.
    """
    probs = np.asarray(probs, dtype=float)
    if ema.m is None:
        return 1, EmaTracker(ema.decay, ema.threshold, probs.copy(), ema.space)
    if ema.similarity(probs) < ema.threshold:
        m = ema.decay * ema.m + (1.0 - ema.decay) * probs
        return 1, EmaTracker(ema.decay, ema.threshold, m / m.sum(), ema.space)
    return 0, ema


@dataclass
class StepRecord:
    step: int
    raw_entropy: float
    effective_loss: float
    weight: float
    s_div: bool
    pred: int
    truth: int | None
    updated: bool
    alpha: float
    lam: float
    anomaly: bool = False

    def row(self) -> list:
        return [self.step, repr(self.raw_entropy), repr(self.effective_loss), repr(self.weight),
                int(self.s_div), self.pred, "" if self.truth is None else self.truth,
                int(self.updated), repr(self.alpha), repr(self.lam), int(self.anomaly)]


class AdaptEngine:
    def __init__(self, model: ToyClassifier, strategy: Strategy | None = None,
                 robust_params: RobustParams | None = None,
                 optimizer: OptimizerConfig | None = None,
                 ema: EmaTracker | None = None):
        self.model = model.copy()
        self.strategy = strategy or Strategy()
        params = robust_params or RobustParams(lam=0.4 * math.log(model.n_classes))
        if self.strategy.use_scale_factor:
            # frozen snapshot of the initial scale, never the live lambda
            params = RobustParams(params.alpha, params.lam, params.lam)
        self.robust_params = params
        self.opt = optimizer or OptimizerConfig()
        self.ema = ema or EmaTracker()
        self.velocity = np.zeros(int(model.adapt_mask.sum()))
        self.steps_seen = 0
        self.updates_applied = 0

    def _sgd(self, grad: np.ndarray) -> None:
        self.velocity = self.opt.momentum * self.velocity + grad
        theta = self.model.affine
        theta[self.model.adapt_mask] -= self.opt.lr_theta * self.velocity
        self.model.set_affine(theta)

    def _gate(self, probs) -> int:
        gate, self.ema = div_gate(self.ema, probs)
        return gate

    def step(self, x, truth: int | None = None) -> StepRecord:
        variant = self.strategy.variant
        params = self.robust_params
        loss, grad, probs = entropy_loss_and_grad(self.model, x)
        pred = int(np.argmax(probs))
        rec = StepRecord(self.steps_seen, loss, 0.0, 0.0, True, pred, truth, False,
                         params.alpha, params.lam)
        self.steps_seen += 1
        if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
            rec.anomaly, rec.s_div = True, False
            return rec

        if variant is Variant.NO_ADAPT:
            return rec

        if variant is Variant.TENT:
            rec.weight, rec.effective_loss = 1.0, loss
            self._sgd(grad)
            rec.updated = True

        elif variant is Variant.EATA:
            w_ent = float(robust_loss.s_ent(loss, params.lam))
            # diversity gate is consulted (and the EMA moved) only for reliable samples
            gate = self._gate(probs) if w_ent > 0 else 0
            rec.s_div = bool(gate)
            rec.weight = w_ent * gate
            rec.effective_loss = rec.weight * loss
            if rec.weight > 0:
                self._sgd(rec.weight * grad)
                rec.updated = True

        else:
            gate = self._gate(probs) if self.strategy.use_div_gate else 1
            rec.s_div = bool(gate)
            squared = self.strategy.use_squared
            rho = robust_loss.rho_squared if squared else robust_loss.rho_general
            value = float(rho(loss, params))
            d_dx, d_da, d_dl = robust_loss.rho_grad(loss, params, squared=squared)
            if not all(math.isfinite(v) for v in (value, d_dx, d_da, d_dl)):
                rec.anomaly = True
                return rec
            rec.effective_loss = gate * value
            rec.weight = gate * d_dx
            if gate:
                self._sgd(d_dx * grad)
                lr = self.opt.lr_robust
                self.robust_params = params.projected(params.alpha - lr * d_da,
                                                      params.lam - lr * d_dl)
                rec.updated = rec.weight > 0

        if rec.updated:
            self.updates_applied += 1
        return rec


@dataclass
class CollapseReport:
    windows: list
    collapsed: bool


def detect_collapse(preds, truth=None, window: int = 200, frac_threshold: float = 0.9) -> CollapseReport:
    """Flag non-overlapping windows where one class takes ``frac_threshold`` of predictions.

    The overall verdict ignores the first window and any window whose true
    labels are themselves that concentrated.
    """
    if window < 10:
        raise ValueError("window must be at least 10")
    preds = np.asarray(preds)
    windows, collapsed = [], False
    for i, start in enumerate(range(0, len(preds), window)):
        chunk = preds[start:start + window]
        is_col = bool(np.bincount(chunk).max() / len(chunk) >= frac_threshold)
        windows.append(is_col)
        if i == 0 or not is_col:
            continue
        if truth is not None:
            t = np.asarray(truth)[start:start + window]
            if np.bincount(t).max() / len(t) >= frac_threshold:
                continue
        collapsed = True
    return CollapseReport(windows, collapsed)


@dataclass
class RunSummary:
    strategy: str
    steps: int
    updates: int
    anomalies: int
    final_alpha: float
    final_lambda: float
    collapsed: bool
    collapse_windows: list
    online_accuracy: list | None = None
    final_accuracy: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_curve: bool = False) -> dict:
        doc = {
            "strategy": self.strategy, "steps": self.steps, "updates": self.updates,
            "anomalies": self.anomalies, "final_alpha": self.final_alpha,
            "final_lambda": self.final_lambda, "collapsed": self.collapsed,
            "collapse_windows": self.collapse_windows,
        }
        if self.final_accuracy is not None:
            doc["final_accuracy"] = self.final_accuracy
            if include_curve:
                doc["online_accuracy"] = self.online_accuracy
        doc.update(self.extra)
        return doc


def run_stream(engine: AdaptEngine, xs, truth=None, window: int = 200,
               frac_threshold: float = 0.9) -> tuple[list[StepRecord], RunSummary]:
    xs = np.asarray(xs, dtype=float)
    if len(xs) == 0:
        raise ValueError("stream is empty")
    labels = None if truth is None or len(truth) == 0 else np.asarray(truth, dtype=int)
    records = [engine.step(x, None if labels is None else int(labels[i]))
               for i, x in enumerate(xs)]
    preds = np.array([r.pred for r in records])
    report = detect_collapse(preds, labels, window=window, frac_threshold=frac_threshold)
    summary = RunSummary(
        strategy=engine.strategy.variant.value,
        steps=engine.steps_seen,
        updates=engine.updates_applied,
        anomalies=sum(r.anomaly for r in records),
        final_alpha=engine.robust_params.alpha,
        final_lambda=engine.robust_params.lam,
        collapsed=report.collapsed,
        collapse_windows=report.windows,
    )
    if labels is not None:
        correct = (preds == labels).astype(float)
        curve = np.cumsum(correct) / np.arange(1, len(correct) + 1)
        summary.online_accuracy = curve.tolist()
        summary.final_accuracy = float(curve[-1])
    return records, summary


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(r.row())


def write_summary_json(summary: RunSummary, path, include_curve: bool = False) -> None:
    with open(path, "w") as fh:
        json.dump(summary.to_dict(include_curve), fh, indent=2)
