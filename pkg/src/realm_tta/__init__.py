"""Robust-loss online single-sample test-time adaptation on a numpy toy model."""

__version__ = "0.1.0"

from realm_tta.adapt import (AdaptEngine, EmaTracker, OptimizerConfig, RunSummary, StepRecord,
                             Strategy, Variant, detect_collapse, div_gate, run_stream)
from realm_tta.config import ConfigError, RunConfig
from realm_tta.data import SyntheticShift, corrupt, make_blobs, make_shift, shuffle_stream
from realm_tta.model import ToyClassifier, entropy_loss_and_grad, forward, init_model, pretrain
from realm_tta.robust_loss import (DomainError, RobustParams, entropy, g_reg, rho_canonical,
                                   rho_eata, rho_general, rho_grad, rho_prime, rho_prime_inv,
                                   rho_second, rho_squared, s_ent)
from realm_tta.spl import SplObjectiveSample, brute_force_weight, equivalence_check

__all__ = [
    "AdaptEngine", "ConfigError", "DomainError", "EmaTracker", "OptimizerConfig", "RobustParams",
    "RunConfig", "RunSummary", "SplObjectiveSample", "StepRecord", "Strategy", "SyntheticShift",
    "ToyClassifier", "Variant", "brute_force_weight", "corrupt", "detect_collapse", "div_gate",
    "entropy", "entropy_loss_and_grad", "equivalence_check", "forward", "g_reg", "init_model",
    "make_blobs", "make_shift", "pretrain", "rho_canonical", "rho_eata", "rho_general",
    "rho_grad", "rho_prime", "rho_prime_inv", "rho_second", "rho_squared", "run_stream",
    "s_ent", "shuffle_stream",
]
