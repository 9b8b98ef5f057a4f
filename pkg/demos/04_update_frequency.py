"""How many samples actually update the model: EATA versus REALM.

EATA drops every sample whose entropy exceeds lambda. REALM keeps them with a
smaller weight, so it learns from more of the stream. Both use the same
diversity gate.

Run: python3 demos/04_update_frequency.py
"""

from realm_tta import RunConfig
from realm_tta.experiment import run

print("seed  EATA  REALM  (of 2000)")
for seed in (7, 11, 13):
    eata = run(RunConfig(strategy="EATA", seed=seed))[1]
    realm = run(RunConfig(strategy="REALM", seed=seed))[1]
    print(f"{seed:4d}  {eata.updates:4d}  {realm.updates:5d}")

# %% Without the gate REALM updates on every sample.
print("\nREALM without diversity gate:", run(RunConfig(use_div_gate=False))[1].updates)

# %% Gate geometry: cosine in raw probability space against a near-uniform average
# never drops below 1/sqrt(3) ~ 0.577 for three classes, so a 0.4 threshold closes
# the gate for good. The centered space (p - 1/K) avoids this.
for space in ("probs", "centered"):
    s = run(RunConfig(cos_space=space))[1]
    print(f"gate in {space!r} space: {s.updates} updates")
