"""Glue between a ``RunConfig`` and the data, model and adaptation modules."""

from __future__ import annotations

import numpy as np

from realm_tta import data
from realm_tta.adapt import (AdaptEngine, EmaTracker, OptimizerConfig, RunSummary,
                             StepRecord, Strategy, run_stream)
from realm_tta.config import ConfigError, RunConfig
from realm_tta.model import ToyClassifier, accuracy, init_model, pretrain
from realm_tta.robust_loss import RobustParams


def shift_for(cfg: RunConfig) -> data.SyntheticShift:
    try:
        return data.SyntheticShift(
            n_classes=cfg.n_classes, d_in=cfg.d_in, n_source=cfg.n_source,
            n_target=cfg.n_target, blob_separation=cfg.blob_separation,
            corruption=cfg.corruption, severity=cfg.severity, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_data(cfg: RunConfig) -> dict:
    """``{'source', 'target', 'heldout'?}`` pairs of ``(x, y)``, from CSV or synthetic."""
    out = data.make_shift(shift_for(cfg), n_heldout=cfg.n_heldout)
    if cfg.source_csv:
        out["source"] = data.load_csv(cfg.source_csv)
    if cfg.target_csv:
        out["target"] = data.load_csv(cfg.target_csv)
        out.pop("heldout", None)
    return out


def pretrained_model(cfg: RunConfig, source) -> tuple[ToyClassifier, object]:
    x, y = source
    model = init_model(d_in=x.shape[1], d_feat=cfg.d_feat, n_classes=cfg.n_classes,
                       seed=cfg.seed, feature_scale=cfg.feature_scale)
    return pretrain(model, x, y, epochs=cfg.pretrain_epochs, lr=cfg.pretrain_lr,
                    seed=cfg.seed, accuracy_floor=cfg.pretrain_floor)


def make_engine(cfg: RunConfig, model: ToyClassifier) -> AdaptEngine:
    try:
        strategy = Strategy(cfg.strategy, cfg.use_squared, cfg.use_scale_factor,
                            cfg.use_div_gate)
        params = RobustParams(cfg.alpha0, cfg.resolved_lambda0, cfg.scale_c)
        opt = OptimizerConfig(cfg.lr_theta, cfg.momentum, cfg.resolved_lr_alpha_lambda)
        ema = EmaTracker(cfg.ema_decay, cfg.d, space=cfg.cos_space)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    model = model.copy()
    mask = np.ones(2 * model.d_feat, dtype=bool)
    if cfg.freeze_shift:
        mask[model.d_feat:] = False
    model.adapt_mask = mask
    return AdaptEngine(model, strategy, params, opt, ema)


def adapt_on_target(cfg: RunConfig, model: ToyClassifier, sets: dict
                    ) -> tuple[list[StepRecord], RunSummary, AdaptEngine]:
    """Shuffle the target set, stream it through a fresh engine, score held-out data."""
    engine = make_engine(cfg, model)
    x, y = sets["target"]
    stream = data.shuffle_stream(x, y, seed=cfg.seed)
    records, summary = run_stream(engine, stream.x, stream.y, window=cfg.collapse_window,
                                  frac_threshold=cfg.collapse_frac)
    if "heldout" in sets:
        summary.extra["heldout_accuracy"] = accuracy(engine.model, *sets["heldout"])
    return records, summary, engine


def run(cfg: RunConfig):
    """Pretrain on source, then adapt on the target stream. Returns ``(records, summary)``."""
    sets = build_data(cfg)
    model, _ = pretrained_model(cfg, sets["source"])
    records, summary, _ = adapt_on_target(cfg, model, sets)
    return records, summary
