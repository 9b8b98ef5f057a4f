"""Entropy objective and the general robust loss family used for adaptation.

Two argument conventions are exposed. ``rho_canonical`` takes the normalized
loss ``t = L / lambda`` and uses ``2t / |alpha - 2|`` inside the power; this is
the form for which the self-paced-learning identities (``rho_prime``,
``rho_prime_inv``, ``g_reg``) are exact. ``rho_general`` takes the raw loss and
uses ``(x / lambda) / |alpha - 2|`` together with a gradient-scale constant
``C``; it is the form driven by the adaptation engine. The two agree through
``rho_canonical(t) == rho_general(2 * lambda * t, alpha, lambda, C=1)``.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALPHA_MIN = 1e-3
ALPHA_MAX = 2.0
ALPHA_DEGEN = 1e-6
LAMBDA_MIN = 1e-4
LAMBDA_MAX = 100.0

PROB_SUM_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a loss function."""


@dataclass(frozen=True)
class RobustParams:
    """Shape ``alpha``, scale ``lam`` (nats) and gradient-scale constant ``scale_c``."""

    alpha: float = 0.15
    lam: float = 0.4 * np.log(3)
    scale_c: float = 1.0

    def __post_init__(self):
        if not ALPHA_MIN <= self.alpha <= ALPHA_MAX:
            raise DomainError(f"alpha={self.alpha} outside [{ALPHA_MIN}, {ALPHA_MAX}]")
        if not LAMBDA_MIN <= self.lam <= LAMBDA_MAX:
            raise DomainError(f"lambda={self.lam} outside [{LAMBDA_MIN}, {LAMBDA_MAX}]")
        if not self.scale_c > 0:
            raise DomainError(f"scale_c={self.scale_c} must be positive")

    def projected(self, alpha: float, lam: float) -> "RobustParams":
        """Return a copy with ``alpha`` and ``lam`` clipped to the admissible box."""
        return RobustParams(
            alpha=float(np.clip(alpha, ALPHA_MIN, ALPHA_MAX)),
            lam=float(np.clip(lam, LAMBDA_MIN, LAMBDA_MAX)),
            scale_c=self.scale_c,
        )


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _is_degenerate(alpha) -> bool:
    return alpha >= ALPHA_MAX - ALPHA_DEGEN


def _check_alpha(alpha, upper_inclusive=True):
    ok = ALPHA_MIN <= alpha <= ALPHA_MAX if upper_inclusive else ALPHA_MIN <= alpha < ALPHA_MAX
    if not ok:
        raise DomainError(f"alpha={alpha} outside admissible range")


def _nonneg(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError(f"{name} must be non-negative and not NaN")
    return x


def validate_probs(p) -> np.ndarray:
    """Check that ``p`` is a probability vector over at least two classes."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("probability vector must be 1-d with at least 2 entries")
    if np.any(~np.isfinite(p)) or np.any(p < 0):
        raise DomainError("probability entries must be finite and non-negative")
    if abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def entropy(p) -> float:
    """Shannon entropy in nats, with ``0 * log 0 = 0``."""
    p = validate_probs(p)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def rho_canonical(t, alpha):
    """Robust loss of the normalized loss ``t``; the identity at ``alpha = 2``."""
    t = _nonneg(t, "t")
    _check_alpha(alpha)
    if _is_degenerate(alpha):
        return _out(t)
    b = abs(alpha - 2.0)
    return _out((b / alpha) * ((2.0 * t / b + 1.0) ** (alpha / 2.0) - 1.0))


def rho_prime(t, alpha):
    """Derivative of ``rho_canonical`` in ``t``; lies in (0, 1], equals 1 at 0."""
    t = _nonneg(t, "t")
    _check_alpha(alpha)
    if _is_degenerate(alpha):
        return _out(np.ones_like(t))
    b = abs(alpha - 2.0)
    return _out((2.0 * t / b + 1.0) ** ((alpha - 2.0) / 2.0))


def rho_second(t, alpha):
    """Second derivative of ``rho_canonical``; strictly negative for alpha < 2."""
    t = _nonneg(t, "t")
    _check_alpha(alpha)
    if _is_degenerate(alpha):
        return _out(np.zeros_like(t))
    b = abs(alpha - 2.0)
    return _out(np.sign(alpha - 2.0) * (2.0 * t / b + 1.0) ** (alpha / 2.0 - 2.0))


def rho_prime_inv(w, alpha):
    """Inverse of ``rho_prime``: the normalized loss at which the weight is ``w``."""
    w = np.asarray(w, dtype=float)
    if np.any(~((w > 0) & (w <= 1))):
        raise DomainError("weight must lie in (0, 1]")
    _check_alpha(alpha, upper_inclusive=False)
    if _is_degenerate(alpha):
        raise DomainError("rho_prime is constant at alpha = 2 and has no inverse")
    b = abs(alpha - 2.0)
    return _out((b / 2.0) * (w ** (2.0 / (alpha - 2.0)) - 1.0))


def g_reg(w, alpha):
    """Explicit self-paced regularizer on the weight ``w``.

    ``min_w [w * t + g_reg(w, alpha)]`` reproduces ``rho_canonical(t, alpha)``
    with the minimizer at ``w = rho_prime(t, alpha)``. The formula is analytic
    for every ``w > 0``; only ``(0, 1]`` is meaningful as a weight.
    """
    w = np.asarray(w, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("weight must be positive")
    _check_alpha(alpha, upper_inclusive=False)
    if _is_degenerate(alpha):
        raise DomainError("g_reg is undefined at alpha = 2")
    b = abs(alpha - 2.0)
    inner = w ** (alpha / (alpha - 2.0)) * (1.0 - alpha / 2.0) + (alpha / 2.0) * w - 1.0
    return _out((b / alpha) * inner)


def _general(u, params: RobustParams):
    alpha, c = params.alpha, params.scale_c
    if _is_degenerate(alpha):
        return c * u / 2.0
    b = abs(alpha - 2.0)
    return c * (b / alpha) * ((u / b + 1.0) ** (alpha / 2.0) - 1.0)


def rho_general(x, params: RobustParams):
    """Robust loss of a raw entropy value ``x`` with shape, scale and constant C.

    At ``alpha = 2`` this is the linear limit ``C * x / (2 * lambda)``.
    """
    x = _nonneg(x, "x")
    return _out(_general(x / params.lam, params))


def rho_squared(x, params: RobustParams):
    """Variant with the scaled loss squared before the power; limit ``C * (x/lambda)**2 / 2``."""
    x = _nonneg(x, "x")
    return _out(_general((x / params.lam) ** 2, params))


def _grad_in_u(u, params: RobustParams):
    """Partials of ``_general`` w.r.t. its argument ``u`` and ``alpha``."""
    alpha, c = params.alpha, params.scale_c
    if _is_degenerate(alpha):
        return c / 2.0 + 0.0 * u, 0.0 * u
    b = abs(alpha - 2.0)
    s = u / b + 1.0
    d_du = (c / 2.0) * s ** (alpha / 2.0 - 1.0)
    # d|alpha-2|/d alpha = -1, so ds/dalpha = u / b**2
    bracket = s ** (alpha / 2.0) - 1.0
    d_bracket = s ** (alpha / 2.0) * (0.5 * np.log(s) + (alpha / 2.0) * (u / b**2) / s)
    d_dalpha = c * (-2.0 / alpha**2 * bracket + (b / alpha) * d_bracket)
    return d_du, d_dalpha


def rho_grad(x, params: RobustParams, squared: bool = False):
    """Analytic partials ``(d/dx, d/dalpha, d/dlambda)`` of the robust loss.

    ``squared`` selects ``rho_squared`` instead of ``rho_general``. The
    ``alpha`` partial is zero by convention in the degenerate ``alpha = 2`` case.
    """
    x = _nonneg(x, "x")
    lam = params.lam
    if squared:
        u = (x / lam) ** 2
        du_dx, du_dlam = 2.0 * x / lam**2, -2.0 * x**2 / lam**3
    else:
        u = x / lam
        du_dx, du_dlam = 1.0 / lam, -x / lam**2
    d_du, d_dalpha = _grad_in_u(u, params)
    return _out(d_du * du_dx), _out(d_dalpha), _out(d_du * du_dlam)


def rho_eata(x, lam):
    """Hard-capped (Talwar) loss: ``x`` below the threshold, ``lam`` above it."""
    x = _nonneg(x, "x")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return _out(np.where(x <= lam, x, lam))


def s_ent(loss, lam):
    """Entropy-reliability weight ``exp(lam - loss) * 1{loss < lam}``.

    Not bounded by 1: a confident sample with ``loss < lam`` gets weight above one.
    """
    loss = _nonneg(loss, "loss")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return _out(np.where(loss < lam, np.exp(lam - loss), 0.0))
