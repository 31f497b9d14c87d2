"""Empirical convergence-threshold estimate on the AWGN channel.

Bisects Eb/N0 for the point where the decoded BER after the configured
number of iterations drops to a target. Every Eb/N0 reuses the same message
and noise draws, which keeps the measured BER curve monotone enough for
bisection at modest frame counts.
"""

import numpy as np

from .analytic import ThresholdSpec
from .errors import SearchFailure, UsageError
from .sim import SimConfig, run_frame

__all__ = ["awgn_ber", "estimate_threshold", "DEFAULT_TARGET_BER"]

# Residual BER marking the onset of the waterfall, where the iterative
# exchange starts to converge rather than where finite-length effects settle.
DEFAULT_TARGET_BER = 1e-2


def awgn_ber(code, ebno_db, n_frames, seed=0):
    """Decoded BER over ``n_frames`` unfaded QPSK frames."""
    cfg = SimConfig(code, sweep=(ebno_db,), fading=False, master_seed=seed,
                    threshold=None)
    errors = 0
    for f in range(n_frames):
        errors += run_frame(cfg, ebno_db, 0, f).bit_errors
    return errors / (n_frames * code.info_length)


def estimate_threshold(code, target_ber=DEFAULT_TARGET_BER, window=(0.0, 2.0),
                       tol_db=0.05, n_frames=40, seed=0):
    """Smallest Eb/N0 (dB, within ``tol_db``) whose BER is at or below target.

    Raises
    ------
    SearchFailure
        When the BER at the low end is already at or below the target, or
        the BER at the high end is still above it.
    """
    lo, hi = (float(w) for w in window)
    if not lo < hi:
        raise UsageError("window must be (low, high) with low < high")
    if not 0 < target_ber < 0.5:
        raise UsageError("target_ber must be in (0, 0.5)")
    evaluations = {}

    def ber(x):
        if x not in evaluations:
            evaluations[x] = awgn_ber(code, x, n_frames, seed)
        return evaluations[x]

    b_lo, b_hi = ber(lo), ber(hi)
    if b_lo <= target_ber or b_hi > target_ber:
        raise SearchFailure(
            f"window [{lo}, {hi}] dB does not bracket BER {target_ber:g} "
            f"(BER {b_lo:.3g} at {lo} dB, {b_hi:.3g} at {hi} dB)",
            lo, hi, b_lo, b_hi)
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if ber(mid) > target_ber:
            lo = mid
        else:
            hi = mid
    estimate = round(0.5 * (lo + hi), 6)
    settings = {
        "target_ber": target_ber,
        "tolerance_db": tol_db,
        "n_frames": n_frames,
        "seed": seed,
        "code": code.describe(),
        "bracket_db": (lo, hi),
        "evaluations": dict(sorted(evaluations.items())),
    }
    return ThresholdSpec(estimate, f"estimated: AWGN BER <= {target_ber:g} after "
                         f"{getattr(code, 'iterations', 'n/a')} iterations, "
                         f"{n_frames} frames", settings=settings)
