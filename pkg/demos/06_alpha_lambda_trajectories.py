"""Shape and scale are learned online alongside the model.

Prints alpha and lambda along the stream, then a small learning-rate sweep
for the two robust-loss parameters.

Run: python3 demos/06_alpha_lambda_trajectories.py
"""

from realm_tta import RunConfig
from realm_tta.experiment import run

records, summary = run(RunConfig(seed=7))
print("step   alpha    lambda")
for r in records[::250] + [records[-1]]:
    print(f"{r.step:5d}  {r.alpha:.4f}  {r.lam:.4f}")

print("\nlr_alpha_lambda  accuracy  final alpha  final lambda")
for lr in (0.002, 0.02, 0.2):
    s = run(RunConfig(seed=7, lr_alpha_lambda=lr))[1]
    print(f"{lr:<15}  {s.final_accuracy:.4f}    {s.final_alpha:.4f}       {s.final_lambda:.4f}")
