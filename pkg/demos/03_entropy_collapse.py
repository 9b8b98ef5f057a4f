"""Entropy collapse: Tent at a high learning rate versus REALM on the same stream.

With a large step size, minimizing each sample's entropy drives the model to
predict a single class. The robust loss shrinks the steps from uncertain
samples and the diversity gate skips redundant ones, so REALM stays diverse.

Run: python3 demos/03_entropy_collapse.py
"""

import numpy as np

from realm_tta import RunConfig
from realm_tta.experiment import run

for strategy in ("Tent", "REALM"):
    cfg = RunConfig(strategy=strategy, lr_theta=0.5, seed=7)
    records, summary = run(cfg)
    preds = np.array([r.pred for r in records])
    shares = [np.bincount(preds[i:i + 400], minlength=3) / 400 for i in range(0, 2000, 400)]
    print(f"{strategy}: collapsed={summary.collapsed}  accuracy={summary.final_accuracy:.3f}")
    for i, s in enumerate(shares):
        print(f"  samples {400 * i:4d}-{400 * i + 399:4d} class shares " + " ".join(f"{v:.2f}" for v in s))
