"""Numerical property suite behind ``realm-tta check``.

Each check reports a pass flag and its largest observed deviation. Functions
are looked up on their modules at call time so a patched implementation is
what gets checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from realm_tta import model as model_mod
from realm_tta import robust_loss as rl
from realm_tta import spl

ALPHA_GRID = (0.15, 0.5, 1.0, 1.5, 1.9)
T_GRID = tuple(np.round(np.arange(0, 101) * 0.1, 10))


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_dev: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34s} max_dev={self.max_dev:.3e}  {self.detail}"


def check_rho_shape() -> CheckResult:
    """rho(0)=0, rho'(0)=1, rho' in (0, 1] and decreasing, rho'' < 0."""
    t = np.linspace(0.0, 50.0, 2001)
    dev, ok = 0.0, True
    for a in ALPHA_GRID:
        dev = max(dev, abs(rl.rho_canonical(0.0, a)), abs(rl.rho_prime(0.0, a) - 1.0))
        ok &= rl.rho_prime(0.0, a) == 1.0 and rl.rho_canonical(0.0, a) == 0.0
        d1 = rl.rho_prime(t, a)
        ok &= bool(np.all((d1 > 0) & (d1 <= 1)) and np.all(np.diff(d1) < 0))
        ok &= bool(np.all(rl.rho_second(t, a) < 0))
    return CheckResult("rho shape (concave, rho'(0)=1)", bool(ok), dev)


def check_inverse_roundtrip(tol: float = 1e-9) -> CheckResult:
    t = np.linspace(0.0, 100.0, 1001)
    dev = max(float(np.max(np.abs(rl.rho_prime_inv(rl.rho_prime(t, a), a) - t)))
              for a in ALPHA_GRID)
    return CheckResult("rho' inverse round trip", dev <= tol, dev, f"tol={tol:g}")


def check_regularizer(tol: float = 1e-12) -> CheckResult:
    """g(1)=0 and positive second differences of g on [0.01, 1]."""
    w = np.linspace(0.01, 1.0, 500)
    dev, convex = 0.0, True
    for a in ALPHA_GRID:
        dev = max(dev, abs(rl.g_reg(1.0, a)))
        h = 1e-3 * w
        second = (rl.g_reg(w + h, a) - 2 * rl.g_reg(w, a) + rl.g_reg(w - h, a)) / h**2
        convex &= bool(np.all(second > 0))
    return CheckResult("g(1)=0, g convex", dev <= tol and convex, dev, f"tol={tol:g}")


def check_eata_cap() -> CheckResult:
    x = np.linspace(0.0, 5.0, 501)
    ok = True
    for lam in (0.1, 0.44, 1.0, 3.0):
        r = rl.rho_eata(x, lam)
        ok &= bool(np.all(r <= x) and np.all(r <= lam))
    return CheckResult("rho_eata <= min(x, lambda)", ok, 0.0)


def check_reconciliation(tol: float = 1e-12) -> CheckResult:
    """rho_canonical(t) == rho_general(2 lambda t) with C = 1."""
    t = np.linspace(0.0, 10.0, 101)
    dev = 0.0
    for a in ALPHA_GRID:
        for lam in (0.1, 1.0, 3.0):
            p = rl.RobustParams(a, lam, 1.0)
            diff = np.abs(rl.rho_canonical(t, a) - rl.rho_general(2 * lam * t, p))
            dev = max(dev, float(np.max(diff / np.maximum(1.0, np.abs(rl.rho_canonical(t, a))))))
    return CheckResult("canonical/main-text reconciliation", dev <= tol, dev, f"tol={tol:g}")


def check_spl_equivalence(tol: float = 1e-4, resolution: float = 1e-4) -> CheckResult:
    rep = spl.equivalence_check(T_GRID, ALPHA_GRID, tolerance=tol, resolution=resolution)
    return CheckResult("SPL equivalence (grid search)", rep.passed,
                       max(rep.max_value_dev, rep.max_w_dev),
                       f"value_dev={rep.max_value_dev:.1e} w_dev={rep.max_w_dev:.1e}")


def _rel_close(a, b, rel, abs_):
    return abs(a - b) <= max(rel * abs(b), abs_)


def check_rho_grad(rel: float = 1e-5, abs_: float = 1e-8, h: float = 1e-6) -> CheckResult:
    """Analytic partials of rho_general/rho_squared against central differences."""
    worst, ok = 0.0, True
    for squared in (False, True):
        f = rl.rho_squared if squared else rl.rho_general
        for x in (0.01, 0.1, 1.0, 5.0):
            for a in (0.15, 0.5, 1.0, 1.5):
                for lam in (0.1, 1.0, 3.0):
                    p = rl.RobustParams(a, lam, 1.0)
                    analytic = rl.rho_grad(x, p, squared=squared)
                    fd = (
                        (f(x + h, p) - f(x - h, p)) / (2 * h),
                        (f(x, rl.RobustParams(a + h, lam)) - f(x, rl.RobustParams(a - h, lam))) / (2 * h),
                        (f(x, rl.RobustParams(a, lam + h)) - f(x, rl.RobustParams(a, lam - h))) / (2 * h),
                    )
                    for an, nu in zip(analytic, fd):
                        worst = max(worst, abs(an - nu) / max(abs(nu), abs_ / rel))
                        ok &= _rel_close(an, nu, rel, abs_)
    return CheckResult("rho_grad vs finite differences", bool(ok), worst, f"rel={rel:g}")


def check_model_grad(n_pairs: int = 100, seed: int = 0, rel: float = 1e-4, abs_: float = 1e-7,
                     h: float = 1e-5) -> CheckResult:
    """Entropy gradient of the toy model against central differences."""
    rng = np.random.default_rng(seed)
    worst, ok = 0.0, True
    for i in range(n_pairs):
        k = int(rng.choice([3, 10]))
        m = model_mod.init_model(d_in=2, d_feat=8, n_classes=k, seed=int(rng.integers(1 << 30)),
                                 feature_scale=1.0)
        m.gamma = rng.normal(1.0, 0.5, m.d_feat)
        m.beta = rng.normal(0.0, 0.5, m.d_feat)
        m.head_w *= 3.0
        x = rng.normal(0.0, 2.0, 2)
        _, grad, _ = model_mod.entropy_loss_and_grad(m, x)
        theta = m.affine
        for j in range(theta.size):
            up, dn = theta.copy(), theta.copy()
            up[j] += h
            dn[j] -= h
            m.set_affine(up)
            lu = model_mod.entropy_loss_and_grad(m, x)[0]
            m.set_affine(dn)
            ld = model_mod.entropy_loss_and_grad(m, x)[0]
            fd = (lu - ld) / (2 * h)
            worst = max(worst, abs(grad[j] - fd) / max(abs(fd), abs_ / rel))
            ok &= _rel_close(grad[j], fd, rel, abs_)
        m.set_affine(theta)
    return CheckResult("model entropy grad vs finite diff", bool(ok), worst, f"pairs={n_pairs}")


ALL_CHECKS = (check_rho_shape, check_inverse_roundtrip, check_regularizer, check_eata_cap,
              check_reconciliation, check_spl_equivalence, check_rho_grad, check_model_grad)


def run_all() -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        try:
            results.append(check())
        except Exception as exc:
            results.append(CheckResult(check.__name__, False, float("nan"), f"error: {exc}"))
    return results
