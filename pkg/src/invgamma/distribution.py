"""The Inverse Gamma distribution.

Density, moments, exact sampling, the expectation identities
E[log x] = log(beta) - digamma(alpha) and E[1/x] = alpha/beta, and the
closed-form KL divergence between two Inverse Gamma distributions.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .specfun import _digamma, _ln_gamma


class UndefinedMomentError(ValueError):
    """Requested moment does not exist for the given shape parameter."""


@dataclass(frozen=True)
class InvGammaParams:
    """Shape ``alpha`` and scale ``beta``; both finite and positive."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


def log_pdf(p: InvGammaParams, x):
    """Log density at ``x`` (scalar or array of positive reals)."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("log_pdf requires finite x > 0")
    out = (p.alpha * math.log(p.beta) - _ln_gamma(p.alpha)
           - (p.alpha + 1.0) * np.log(arr) - p.beta / arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def mean(p: InvGammaParams) -> float:
    """beta / (alpha - 1); requires alpha > 1."""
    if p.alpha <= 1.0:
        raise UndefinedMomentError(f"mean undefined for alpha={p.alpha} <= 1")
    return p.beta / (p.alpha - 1.0)


def variance(p: InvGammaParams) -> float:
    """beta^2 / ((alpha-1)^2 (alpha-2)); requires alpha > 2."""
    if p.alpha <= 2.0:
        raise UndefinedMomentError(f"variance undefined for alpha={p.alpha} <= 2")
    am1 = p.alpha - 1.0
    return p.beta * p.beta / (am1 * am1 * (p.alpha - 2.0))


def moments(p: InvGammaParams) -> tuple[float, float]:
    """(mean, variance); raises UndefinedMomentError naming the first
    moment that does not exist."""
    return mean(p), variance(p)


@jit
def _gamma_mt_fill(out, filled, d, c, normals, uniforms):
    # Squeeze-then-log acceptance for unit-rate Gamma with shape >= 1;
    # consumes one (normal, uniform) pair per trial, in order.
    i = filled
    k = 0
    avail = normals.shape[0]
    while i < out.shape[0] and k < avail:
        z = normals[k]
        u = uniforms[k]
        k += 1
        v = 1.0 + c * z
        if v <= 0.0:
            continue
        v = v * v * v
        if u < 1.0 - 0.0331 * (z * z) * (z * z):
            out[i] = d * v
            i += 1
        elif math.log(u) < 0.5 * z * z + d * (1.0 - v + math.log(v)):
            out[i] = d * v
            i += 1
    return i


def _standard_gamma(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n unit-rate Gamma(alpha) draws; shape < 1 via the power boost."""
    base = alpha if alpha >= 1.0 else alpha + 1.0
    d = base - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n, dtype=np.float64)
    filled = 0
    while filled < n:
        want = n - filled
        m = want + (want >> 4) + 16
        filled = _gamma_mt_fill(out, filled, d, c,
                                rng.standard_normal(m), rng.random(m))
    if alpha < 1.0 and n > 0:
        out *= rng.random(n) ** (1.0 / alpha)
    return out


def sample(p: InvGammaParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent draws, computed as beta over unit-rate Gamma(alpha)
    variates; deterministic for a given generator state."""
    n = int(n)
    if n < 0:
        raise ValueError(f"sample size must be >= 0, got {n}")
    return p.beta / _standard_gamma(p.alpha, n, rng)


def expect_log_x(p: InvGammaParams) -> float:
    """E[log x] = log(beta) - digamma(alpha)."""
    return math.log(p.beta) - _digamma(p.alpha)


def expect_inv_x(p: InvGammaParams) -> float:
    """E[1/x] = alpha / beta."""
    return p.alpha / p.beta


def expect_log_pdf(p: InvGammaParams) -> float:
    """E[log p(x)] = (1+alpha) digamma(alpha) - alpha - log(beta Gamma(alpha))."""
    return ((1.0 + p.alpha) * _digamma(p.alpha) - p.alpha
            - math.log(p.beta) - _ln_gamma(p.alpha))


def kl_divergence(p: InvGammaParams, q: InvGammaParams) -> float:
    """KL(p || q) between two Inverse Gamma distributions, in closed form.

    Evaluated entirely in log space so large shapes and scales cannot
    overflow.  Exact zero for p == q; rounding slack down to -1e-12 is
    clamped to zero, anything more negative is a bug and raises.
    """
    a, b = p.alpha, p.beta
    ah, bh = q.alpha, q.beta
    val = ((a - ah) * _digamma(a)
           + ah * (math.log(b) - math.log(bh))
           + _ln_gamma(ah) - _ln_gamma(a)
           + a * (bh / b) - a)
    if val < 0.0:
        if val < -1e-12:
            raise ArithmeticError(
                f"KL divergence evaluated to {val}, below rounding slack")
        return 0.0
    return val
