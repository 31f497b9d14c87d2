"""Threshold model of frame error rate on quasi-static Rayleigh fading.

A frame is lost when the instantaneous post-combining Eb/N0 falls at or below
the decoder convergence threshold. With ``m = N_T * N_R`` diversity branches
the instantaneous Eb/N0 is Gamma(m, mean/m) distributed, so

    FER = 1 - exp(-x) * sum_{k<m} x^k / k!,   x = m * gamma_th / mean.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .channel import db_to_linear
from .errors import UsageError
from .trellis import CodeSpec

__all__ = [
    "FadingOrder", "ThresholdSpec", "pdf_gamma", "fer_analytic",
    "fer_analytic_db", "fer_semi_analytic", "threshold_table", "lookup_threshold",
]


@dataclass(frozen=True)
class FadingOrder:
    n_t: int = 1
    n_r: int = 1

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise UsageError("antenna counts must be positive")

    @property
    def branches(self):
        return self.n_t * self.n_r

    @property
    def degrees_of_freedom(self):
        return 2 * self.branches


def _branches(order):
    if isinstance(order, FadingOrder):
        return order.branches
    m = int(order)
    if m < 1 or m != order:
        raise UsageError(f"diversity order must be a positive integer, got {order!r}")
    return m


@dataclass(frozen=True)
class ThresholdSpec:
    gamma_th_db: float
    provenance: str = "user"
    settings: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.gamma_th_db):
            raise UsageError("threshold must be finite")
        if not -1.0 <= self.gamma_th_db <= 5.0:
            warnings.warn(f"threshold {self.gamma_th_db} dB is outside the "
                          "usual [-1, 5] dB range", stacklevel=2)

    @property
    def linear(self):
        return float(db_to_linear(self.gamma_th_db))


def pdf_gamma(gamma, mean, order=1):
    """Density of the instantaneous Eb/N0 for ``order`` diversity branches."""
    m = _branches(order)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or mean <= 0:
        raise UsageError("pdf_gamma needs gamma >= 0 and mean > 0")
    per_branch = mean / m
    if m == 1:
        return np.exp(-gamma / mean) / mean
    return (gamma ** (m - 1) * np.exp(-gamma / per_branch)
            / (math.factorial(m - 1) * per_branch ** m))


def _lower_gamma_regularized(m, x):
    # The direct form 1 - exp(-x) * sum_{k<m} x^k/k! cancels badly for
    # small x, where the series exp(-x) * sum_{k>=m} x^k/k! is used instead.
    if x < m + 1.0:
        term = math.exp(-x) * x ** m / math.factorial(m)
        total = term
        k = m
        while term > 1e-17 * total:
            k += 1
            term *= x / k
            total += term
        return total
    term = 1.0
    acc = 1.0
    for k in range(1, m):
        term *= x / k
        acc += term
    return 1.0 - math.exp(-x) * acc


def fer_analytic(mean, gamma_th, order=1):
    """Probability that the instantaneous Eb/N0 is at or below ``gamma_th``.

    ``mean`` and ``gamma_th`` are linear. Vectorised over ``mean``.
    """
    m = _branches(order)
    mean_arr = np.asarray(mean, dtype=float)
    if np.any(mean_arr <= 0) or gamma_th <= 0:
        raise UsageError("fer_analytic needs positive mean and threshold")
    out = np.array([_lower_gamma_regularized(m, m * gamma_th / g)
                    for g in mean_arr.ravel()]).reshape(mean_arr.shape)
    return float(out) if out.ndim == 0 else out


def fer_analytic_db(ebno_db, threshold, order=1):
    """:func:`fer_analytic` with dB inputs; ``threshold`` may be a ThresholdSpec."""
    th_db = threshold.gamma_th_db if isinstance(threshold, ThresholdSpec) else threshold
    return fer_analytic(db_to_linear(ebno_db), float(db_to_linear(th_db)), order)


def fer_semi_analytic(mean, gamma_th, order, rng, n_draws=10**6, return_std=False):
    """Monte Carlo estimate of P(gamma_b <= gamma_th) over channel draws."""
    m = _branches(order)
    if n_draws < 10**4:
        raise UsageError("n_draws must be at least 10^4")
    total = np.zeros(n_draws)
    for _ in range(m):
        z = rng.standard_normal((n_draws, 2))
        total += 0.5 * (z[:, 0] ** 2 + z[:, 1] ** 2)
    gamma_b = mean * total / m
    p = float(np.mean(gamma_b <= gamma_th))
    if return_std:
        return p, math.sqrt(max(p * (1 - p), 1e-300) / n_draws)
    return p


def threshold_table():
    """Shipped thresholds, keyed by ``"ff/fb"`` octal text."""
    text = resources.files("qsturbo.data").joinpath("thresholds.json").read_text()
    raw = json.loads(text)
    return {key: ThresholdSpec(v["gamma_th_db"], v["provenance"])
            for key, v in raw["codes"].items()}


def lookup_threshold(spec):
    """Tabulated threshold of an RSC constituent, or None when unknown."""
    if isinstance(spec, str):
        spec = CodeSpec.parse(spec)
    key = f"{spec.feedforward_poly:o}/{spec.feedback_poly:o}"
    return threshold_table().get(key)
