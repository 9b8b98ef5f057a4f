"""The robust loss family and its sample weights.

Run: python3 demos/01_robust_loss_family.py
"""

import numpy as np

from realm_tta import RobustParams, rho_canonical, rho_general, rho_grad, rho_prime

# %% Shape parameter alpha bends the loss away from the identity.
t = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 10.0])
print("t        " + "  ".join(f"{v:7.2f}" for v in t))
for alpha in (2.0, 1.5, 1.0, 0.5, 0.15):
    print(f"rho a={alpha:<4}" + "  ".join(f"{v:7.3f}" for v in rho_canonical(t, alpha)))

# %% The slope rho'(t) is the implicit weight of a sample: 1 at t = 0, decaying after.
print()
for alpha in (1.0, 0.15):
    print(f"weight a={alpha:<4}" + "  ".join(f"{v:7.3f}" for v in rho_prime(t, alpha)))

# %% In the adaptation engine the loss is applied to raw entropy x with scale lambda.
# Confident samples (small x) keep a large weight; uncertain ones are damped, never cut.
params = RobustParams(alpha=0.15, lam=0.4 * np.log(3))
print()
print("entropy  rho      d/dx     d/dalpha  d/dlambda")
for x in (0.01, 0.2, 0.44, 0.8, 1.1):
    d_dx, d_da, d_dl = rho_grad(x, params)
    print(f"{x:<8} {rho_general(x, params):.4f}   {d_dx:.4f}   {d_da:+.4f}   {d_dl:+.4f}")
