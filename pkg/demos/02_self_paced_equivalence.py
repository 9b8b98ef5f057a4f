"""The robust loss as a self-paced learning problem, checked by brute force.

``rho(t) = min_w [w t + g(w)]``; the minimizing w equals ``rho'(t)``. The grid
search below makes no convexity assumption.

Run: python3 demos/02_self_paced_equivalence.py
"""

import numpy as np

from realm_tta import SplObjectiveSample, brute_force_weight, equivalence_check, rho_canonical, rho_prime

for t, alpha in [(0.0, 0.15), (1.0, 1.0), (4.0, 0.5), (10.0, 1.9)]:
    w_star, value = brute_force_weight(SplObjectiveSample(t, alpha))
    print(f"t={t:<5} alpha={alpha:<5} grid w*={w_star:.4f} (rho'={rho_prime(t, alpha):.4f})  "
          f"min={value:.6f} (rho={rho_canonical(t, alpha):.6f})")

report = equivalence_check(np.round(np.arange(0, 101) * 0.1, 10), [0.15, 0.5, 1.0, 1.5, 1.9])
print(f"\nfull grid 101 x 5: pass={report.passed}  max value dev {report.max_value_dev:.1e}  "
      f"max weight dev {report.max_w_dev:.1e}")
