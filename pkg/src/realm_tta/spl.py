"""Self-paced-learning view of the robust loss.

The robust loss ``rho_canonical(t)`` equals ``min_w [w * t + g_reg(w)]`` over
``w in (0, 1]``. This module gives the closed-form weights and an exhaustive
grid-search oracle that checks the identity without relying on convexity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from realm_tta import robust_loss


@dataclass(frozen=True)
class SplObjectiveSample:
    t: float
    alpha: float
    w_grid_resolution: float = 1e-4

    def __post_init__(self):
        if not self.t >= 0:
            raise robust_loss.DomainError("t must be non-negative")
        if not 0 < self.w_grid_resolution <= 0.01:
            raise robust_loss.DomainError("grid resolution must lie in (0, 0.01]")


def closed_form_weight(t, alpha):
    """Minimizing weight of ``w * t + g_reg(w, alpha)``; equal to ``rho_prime``."""
    return robust_loss.rho_prime(t, alpha)


def eata_closed_form_weight(loss, lam):
    return robust_loss.s_ent(loss, lam)


def weight_grid(resolution: float) -> np.ndarray:
    n = int(round(1.0 / resolution))
    return np.arange(1, n + 1, dtype=float) * resolution


def brute_force_weight(sample: SplObjectiveSample) -> tuple[float, float]:
    """Exhaustive minimization over ``w in {res, 2 res, ..., 1}``.

    Returns ``(w_star, value)``.
    """
    w = weight_grid(sample.w_grid_resolution)
    obj = w * sample.t + robust_loss.g_reg(w, sample.alpha)
    i = int(np.argmin(obj))
    return float(w[i]), float(obj[i])


def brute_force_l1_weight(loss: float, lam: float, resolution: float = 1e-3) -> float:
    """Grid argmin of ``w * loss - lam * w`` over ``w in [0, 1]`` (the L1 regularizer)."""
    n = int(round(1.0 / resolution))
    w = np.arange(0, n + 1, dtype=float) * resolution
    return float(w[int(np.argmin(w * loss - lam * w))])


@dataclass
class EquivalenceReport:
    t_grid: list
    alpha_grid: list
    tolerance: float
    resolution: float
    max_value_dev: float = 0.0
    max_w_dev: float = 0.0
    cells: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.cells)

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid_dims": [len(self.t_grid), len(self.alpha_grid)],
                "resolution": self.resolution,
                "tolerance": self.tolerance,
                "max_value_dev": self.max_value_dev,
                "max_w_dev": self.max_w_dev,
                "pass": self.passed,
                "failures": [c for c in self.cells if not c["pass"]],
            },
            indent=2,
        )


def equivalence_check(t_grid, alpha_grid, tolerance: float = 1e-4,
                      resolution: float = 1e-4) -> EquivalenceReport:
    """Compare the grid-search minimum against ``rho_canonical`` and ``rho_prime``.

    Every cell is evaluated; failures (including exceptions) are recorded in
    the report rather than raised.
    """
    t_grid = [float(t) for t in t_grid]
    alpha_grid = [float(a) for a in alpha_grid]
    if not t_grid or not alpha_grid:
        raise ValueError("grids must be non-empty")
    report = EquivalenceReport(t_grid, alpha_grid, tolerance, resolution)
    w = weight_grid(resolution)
    for alpha in alpha_grid:
        try:
            g = robust_loss.g_reg(w, alpha)
        except Exception as exc:  # recorded per cell, never aborts the grid
            for t in t_grid:
                report.cells.append({"t": t, "alpha": alpha, "pass": False, "error": str(exc)})
            continue
        for t in t_grid:
            cell = {"t": t, "alpha": alpha}
            try:
                obj = w * t + g
                i = int(np.argmin(obj))
                value_dev = abs(float(obj[i]) - robust_loss.rho_canonical(t, alpha))
                w_dev = abs(float(w[i]) - robust_loss.rho_prime(t, alpha))
                cell.update(value_dev=value_dev, w_dev=w_dev,
                            **{"pass": bool(value_dev <= tolerance and w_dev <= 2 * resolution)})
                report.max_value_dev = max(report.max_value_dev, value_dev)
                report.max_w_dev = max(report.max_w_dev, w_dev)
            except Exception as exc:
                cell.update({"pass": False, "error": str(exc)})
            report.cells.append(cell)
    return report
