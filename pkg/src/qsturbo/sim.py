"""End-to-end Monte Carlo link simulation and Eb/N0 sweeps.

A frame runs: random message -> encode -> QPSK -> STBC -> quasi-static
channel -> soft demap -> decode -> compare. Every frame draws its message,
channel and noise from streams keyed by ``(master_seed, point, frame)``. The
stop rule is evaluated in frame-index order and results are truncated at the
exact frame that triggers it, so any worker count gives the same numbers.
Two configurations run with the same seed see the same channel per frame.
"""

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .analytic import ThresholdSpec, fer_analytic, lookup_threshold
from .channel import (LinkBudget, db_to_linear, draw_channel, frame_streams,
                      instantaneous_gamma_b, transmit)
from .errors import ConfigError, UsageError
from .modem import qpsk_map
from .stbc import demap_frame, get_scheme, stbc_encode_many
from .turbo import TurboConfig, split_llrs, turbo_decode, turbo_encode
from .viterbi import ViterbiConfig, conv_encode, viterbi_decode

__all__ = [
    "SimConfig", "FrameOutcome", "PointResult", "SweepResult", "run_frame",
    "run_point", "run_sweep", "compare_codes", "wilson_interval",
    "encode_message", "decode_llrs", "crossing_db", "analytic_crossing_db",
]

log = logging.getLogger(__name__)

CHUNK = 16


def encode_message(code, message):
    if isinstance(code, TurboConfig):
        return turbo_encode(code, message)
    if isinstance(code, ViterbiConfig):
        return conv_encode(code, message)
    raise ConfigError(f"unsupported code configuration {code!r}")


def decode_llrs(code, llrs):
    if isinstance(code, TurboConfig):
        decisions, _ = turbo_decode(code, split_llrs(code, llrs))
        return decisions
    if isinstance(code, ViterbiConfig):
        return viterbi_decode(code, llrs)
    raise ConfigError(f"unsupported code configuration {code!r}")


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce a sweep.

    ``threshold`` defaults to the shipped table entry for turbo codes and to
    None (no analytic overlay) for convolutional codes.
    """

    code: object
    scheme: object = "none"
    n_r: int = 1
    sweep: tuple = (10.0,)
    min_frame_errors: int = 100
    max_frames: int = 200_000
    master_seed: int = 0
    workers: int = 1
    threshold: object = "auto"
    reference: str = "combined"
    llr_scaling: str = "exact"
    fading: bool = True
    noiseless: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", get_scheme(self.scheme))
        sweep = tuple(float(x) for x in self.sweep)
        if not sweep:
            raise ConfigError("sweep must contain at least one Eb/N0 point")
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigError("sweep points must be strictly increasing")
        object.__setattr__(self, "sweep", sweep)
        if not isinstance(self.code, (TurboConfig, ViterbiConfig)):
            raise ConfigError("code must be a TurboConfig or ViterbiConfig")
        if self.n_r < 1:
            raise ConfigError("n_r must be positive")
        if self.min_frame_errors < 1 or self.max_frames < 1:
            raise ConfigError("stop rule counts must be positive")
        if self.min_frame_errors < 20:
            warnings.warn("min_frame_errors below 20 gives loose FER estimates",
                          stacklevel=3)
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.reference not in ("combined", "per_antenna"):
            raise ConfigError(f"unknown Eb/N0 reference {self.reference!r}")
        th = self.threshold
        if isinstance(th, str) and th == "auto":
            th = lookup_threshold(self.code.constituent) if isinstance(
                self.code, TurboConfig) else None
        elif th is not None and not isinstance(th, ThresholdSpec):
            th = ThresholdSpec(float(th), "user")
        object.__setattr__(self, "threshold", th)

    @property
    def n_t(self):
        return self.scheme.n_t

    @property
    def diversity(self):
        return self.scheme.n_t * self.n_r

    def budget(self, ebno_db):
        return LinkBudget(ebno_db, code_rate=Fraction(1, 2),
                          stbc_rate=self.scheme.rate, n_r=self.n_r,
                          reference=self.reference)

    def analytic(self, ebno_db):
        if self.threshold is None:
            return None
        mean = self.budget(ebno_db).mean_combined_ebno
        return fer_analytic(mean, self.threshold.linear, self.diversity)

    def describe(self):
        return {
            "code": self.code.describe(),
            "scheme": self.scheme.kind,
            "n_t": self.n_t,
            "n_r": self.n_r,
            "sweep_db": list(self.sweep),
            "min_frame_errors": self.min_frame_errors,
            "max_frames": self.max_frames,
            "master_seed": self.master_seed,
            "threshold_db": None if self.threshold is None else self.threshold.gamma_th_db,
            "threshold_provenance": None if self.threshold is None else self.threshold.provenance,
            "ebno_reference": self.reference,
            "llr_scaling": self.llr_scaling,
            "fading": self.fading,
            "tail_overhead": self.code.tail_overhead,
            "rng": "numpy SeedSequence(master_seed, spawn_key=(point, frame)) -> PCG64",
        }


@dataclass
class FrameOutcome:
    bit_errors: int
    frame_error: bool
    gamma_b: float


def run_frame(cfg, ebno_db, point=0, frame=0, trace=None):
    """Simulate one frame at average Eb/N0 ``ebno_db`` (dB).

    ``trace``, when a list, receives a dict with the channel, transmit
    blocks and receive blocks of the frame.
    """
    code = cfg.code
    scheme = cfg.scheme
    streams = frame_streams(cfg.master_seed, point, frame)
    budget = cfg.budget(ebno_db)
    snr = budget.snr

    message = streams.message.integers(0, 2, code.info_length, dtype=np.int8)
    coded = encode_message(code, message)
    n_coded = coded.size
    per_block = 2 * scheme.k_in
    pad = (-n_coded) % per_block
    if pad:
        coded = np.concatenate([coded, np.zeros(pad, dtype=np.int8)])
    blocks = stbc_encode_many(scheme, qpsk_map(coded))

    if cfg.fading:
        h = draw_channel(streams.channel, cfg.n_r, scheme.n_t)
    else:
        h = np.ones((cfg.n_r, scheme.n_t), dtype=complex)
    r = transmit(blocks, h, snr, streams.noise, noiseless=cfg.noiseless)
    llrs = demap_frame(scheme, r, h, snr, cfg.llr_scaling)
    if llrs.size != n_coded + pad:
        raise AssertionError("demapper output length does not match codeword")
    decoded = decode_llrs(code, llrs[:n_coded])
    errors = int(np.count_nonzero(decoded != message))
    gamma_b = instantaneous_gamma_b(h, budget)
    if trace is not None:
        trace.append({"h": h, "blocks": blocks, "r": r, "snr": snr,
                      "message": message, "decoded": decoded})
    return FrameOutcome(errors, errors > 0, gamma_b)


def wilson_interval(k, n, z=1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass
class PointResult:
    ebno_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    info_bits: int
    fer_analytic: object = None
    gamma_b: np.ndarray = field(default=None, repr=False)
    error_flags: np.ndarray = field(default=None, repr=False)

    @property
    def fer_sim(self):
        return self.frame_errors / self.frames

    @property
    def ber_sim(self):
        return self.bit_errors / self.info_bits

    @property
    def ci(self):
        return wilson_interval(self.frame_errors, self.frames)


@dataclass
class SweepResult:
    points: list
    metadata: dict

    @property
    def ebno_db(self):
        return np.array([p.ebno_db for p in self.points])

    @property
    def fer_sim(self):
        return np.array([p.fer_sim for p in self.points])

    @property
    def fer_analytic(self):
        return np.array([np.nan if p.fer_analytic is None else p.fer_analytic
                         for p in self.points])


_WORKER_CFG = None


def _init_worker(cfg):
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _run_chunk(args):
    ebno_db, point, start, stop = args
    cfg = _WORKER_CFG
    out = []
    for frame in range(start, stop):
        o = run_frame(cfg, ebno_db, point, frame)
        out.append((o.bit_errors, o.gamma_b))
    return out


def run_point(cfg, point, ebno_db, pool=None):
    """Run frames at one sweep point until the stop rule triggers."""
    bit_err = []
    gammas = []
    frame_errors = 0
    next_frame = 0
    width = cfg.workers if pool is not None else 1
    done = False
    while not done:
        jobs = []
        for _ in range(width):
            if next_frame >= cfg.max_frames:
                break
            stop = min(next_frame + CHUNK, cfg.max_frames)
            jobs.append((ebno_db, point, next_frame, stop))
            next_frame = stop
        if not jobs:
            break
        if pool is None:
            _init_worker(cfg)
            results = [_run_chunk(j) for j in jobs]
        else:
            results = list(pool.map(_run_chunk, jobs))
        for chunk in results:
            for be, g in chunk:
                bit_err.append(be)
                gammas.append(g)
                if be:
                    frame_errors += 1
                if frame_errors >= cfg.min_frame_errors or len(bit_err) >= cfg.max_frames:
                    done = True
                    break
            if done:
                break
    flags = np.array(bit_err) > 0
    frames = len(bit_err)
    res = PointResult(
        ebno_db=ebno_db,
        frames=frames,
        frame_errors=int(flags.sum()),
        bit_errors=int(np.sum(bit_err)),
        info_bits=frames * cfg.code.info_length,
        fer_analytic=cfg.analytic(ebno_db),
        gamma_b=np.array(gammas),
        error_flags=flags,
    )
    log.info("%.2f dB: %d/%d frame errors, FER %.3g", ebno_db,
             res.frame_errors, frames, res.fer_sim)
    return res


def run_sweep(cfg):
    """Simulate every sweep point; attach the analytic FER when a threshold is known."""
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                                   initargs=(cfg,))
    try:
        points = [run_point(cfg, i, x, pool) for i, x in enumerate(cfg.sweep)]
    finally:
        if pool is not None:
            pool.shutdown()
    meta = cfg.describe()
    meta["workers"] = cfg.workers
    return SweepResult(points, meta)


def compare_codes(cfg_a, cfg_b, seed=None):
    """Run two configurations on common channel and noise streams.

    Returns ``(result_a, result_b)``. Both must share the STBC scheme, the
    number of receive antennas and the sweep grid.
    """
    if cfg_a.scheme != cfg_b.scheme or cfg_a.n_r != cfg_b.n_r:
        raise UsageError("compared configurations must share scheme and n_r")
    if cfg_a.sweep != cfg_b.sweep:
        raise UsageError("compared configurations must share the sweep grid")
    if cfg_a.reference != cfg_b.reference:
        raise UsageError("compared configurations must share the Eb/N0 reference")
    if seed is None:
        seed = cfg_a.master_seed
    cfg_a = replace(cfg_a, master_seed=seed)
    cfg_b = replace(cfg_b, master_seed=seed)
    return run_sweep(cfg_a), run_sweep(cfg_b)


def crossing_db(result, target):
    """Eb/N0 (dB) where the simulated FER curve crosses ``target``.

    Linear interpolation of log10(FER) against dB between the bracketing
    points; None when the curve does not bracket ``target``.
    """
    x = result.ebno_db
    y = result.fer_sim
    with np.errstate(divide="ignore"):
        ly = np.log10(y)
    lt = math.log10(target)
    for i in range(len(x) - 1):
        a, b = ly[i], ly[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if (a - lt) * (b - lt) <= 0 and a != b:
            return float(x[i] + (lt - a) * (x[i + 1] - x[i]) / (b - a))
    return None


def analytic_crossing_db(threshold_db, order, target):
    """Eb/N0 (dB) where the threshold-model FER equals ``target``."""
    th = float(db_to_linear(threshold_db))

    def f(x_db):
        return math.log10(fer_analytic(float(db_to_linear(x_db)), th, order)) - math.log10(target)

    return brentq(f, -30.0, 80.0)
