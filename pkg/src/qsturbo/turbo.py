"""Parallel concatenated (turbo) code with alternate parity puncturing.

Codeword layout, in transmission order::

    [ systematic (L) | punctured parity (L) | tail 1 (2m) | tail 2 (2m) ]

Punctured parity position k carries encoder 1 parity when k is even and
encoder 2 parity (on the interleaved message) when k is odd. Each tail is
interleaved per step as (systematic, parity).
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import bcjr_extrinsic, LLR_CLAMP
from .errors import NumericalInputError, UsageError
from .trellis import CodeSpec, Trellis, rsc_encode

__all__ = [
    "Interleaver", "TurboConfig", "LlrFrame", "interleave", "deinterleave",
    "turbo_encode", "bcjr_siso_decode", "turbo_decode", "split_llrs",
]


class Interleaver:
    """Seeded uniform random permutation of ``size`` positions.

    ``seed=None`` gives the identity permutation.
    """

    def __init__(self, size, seed=0):
        if size < 1:
            raise UsageError("interleaver size must be positive")
        self.size = int(size)
        self.seed = seed
        if seed is None:
            perm = np.arange(self.size)
        else:
            # Generator.permutation is a Fisher-Yates shuffle
            perm = np.random.default_rng(seed).permutation(self.size)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(self.size)
        perm.setflags(write=False)
        inverse.setflags(write=False)
        self.permutation = perm
        self.inverse = inverse

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Interleaver(size={self.size}, seed={self.seed})"

    def __reduce__(self):
        return (Interleaver, (self.size, self.seed))


def interleave(x, il):
    x = np.asarray(x)
    if x.shape[0] != il.size:
        raise UsageError(f"expected length {il.size}, got {x.shape[0]}")
    return x[il.permutation]


def deinterleave(x, il):
    x = np.asarray(x)
    if x.shape[0] != il.size:
        raise UsageError(f"expected length {il.size}, got {x.shape[0]}")
    return x[il.inverse]


@dataclass(frozen=True)
class TurboConfig:
    constituent: CodeSpec
    interleaver: Interleaver
    iterations: int = 7
    trellis: Trellis = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.iterations < 1:
            raise UsageError("iterations must be positive")
        object.__setattr__(self, "trellis", Trellis(self.constituent))

    @classmethod
    def make(cls, code="5/7", size=1024, seed=0, iterations=7):
        spec = code if isinstance(code, CodeSpec) else CodeSpec.parse(code)
        return cls(spec, Interleaver(size, seed), iterations)

    @property
    def size(self):
        return self.interleaver.size

    @property
    def memory(self):
        return self.trellis.memory

    @property
    def coded_length(self):
        return 2 * self.size + 4 * self.memory

    @property
    def rate(self):
        """Nominal rate, tails excluded."""
        return 0.5

    @property
    def tail_overhead(self):
        """Fraction of transmitted bits spent on the two tails."""
        return 4 * self.memory / self.coded_length

    @property
    def info_length(self):
        return self.size

    def describe(self):
        return (f"turbo {self.constituent.label} L={self.size} "
                f"seed={self.interleaver.seed} iter={self.iterations}")


@dataclass
class LlrFrame:
    """Channel LLRs of one turbo codeword, split per constituent decoder.

    Arrays have length ``L + m``; the last ``m`` entries are the tail.
    Punctured parity positions hold exactly 0. Positive LLR favours bit 1.
    """

    systematic1: np.ndarray
    parity1: np.ndarray
    systematic2: np.ndarray
    parity2: np.ndarray

    def __post_init__(self):
        for name in ("systematic1", "parity1", "systematic2", "parity2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise NumericalInputError(f"{name} has non-finite LLRs")
            setattr(self, name, arr)


def turbo_encode(cfg, message):
    """Encode ``L`` message bits into the documented codeword layout."""
    message = np.asarray(message, dtype=np.int8)
    L = cfg.size
    if message.shape != (L,):
        raise UsageError(f"message must have length {L}")
    m = cfg.memory
    s1, p1, _ = rsc_encode(cfg.trellis, message, terminate=True)
    s2, p2, _ = rsc_encode(cfg.trellis, interleave(message, cfg.interleaver),
                           terminate=True)
    punct = np.where(np.arange(L) % 2 == 0, p1[:L], p2[:L])
    tail1 = np.stack([s1[L:], p1[L:]], axis=1).ravel()
    tail2 = np.stack([s2[L:], p2[L:]], axis=1).ravel()
    out = np.concatenate([message, punct, tail1, tail2]).astype(np.int8)
    assert out.size == 2 * L + 4 * m
    return out


def split_llrs(cfg, llrs):
    """Rearrange codeword-ordered channel LLRs into an :class:`LlrFrame`."""
    llrs = np.asarray(llrs, dtype=float)
    L, m = cfg.size, cfg.memory
    if llrs.shape != (cfg.coded_length,):
        raise UsageError(f"expected {cfg.coded_length} LLRs, got {llrs.shape}")
    sys = llrs[:L]
    punct = llrs[L:2 * L]
    tail1 = llrs[2 * L:2 * L + 2 * m]
    tail2 = llrs[2 * L + 2 * m:]
    even = np.arange(L) % 2 == 0
    par1 = np.where(even, punct, 0.0)
    par2 = np.where(even, 0.0, punct)
    return LlrFrame(
        systematic1=np.concatenate([sys, tail1[0::2]]),
        parity1=np.concatenate([par1, tail1[1::2]]),
        systematic2=np.concatenate([interleave(sys, cfg.interleaver), tail2[0::2]]),
        parity2=np.concatenate([par2, tail2[1::2]]),
    )


def bcjr_siso_decode(trellis, channel_systematic, channel_parity, apriori,
                     terminated=True):
    """Exact log-MAP soft-in/soft-out pass over a trellis.

    Returns the extrinsic LLRs, i.e. the a-posteriori LLR minus the a-priori
    and channel systematic terms. The full a-posteriori LLR is therefore
    ``apriori + channel_systematic + extrinsic``.
    """
    ls = np.ascontiguousarray(channel_systematic, dtype=float)
    lp = np.ascontiguousarray(channel_parity, dtype=float)
    la = np.ascontiguousarray(apriori, dtype=float)
    if not (ls.shape == lp.shape == la.shape) or ls.ndim != 1:
        raise UsageError("LLR sequences must be 1-D and of equal length")
    for arr in (ls, lp, la):
        if not np.all(np.isfinite(arr)):
            raise NumericalInputError("non-finite LLR input")
    ls = np.clip(ls, -LLR_CLAMP, LLR_CLAMP)
    lp = np.clip(lp, -LLR_CLAMP, LLR_CLAMP)
    la = np.clip(la, -LLR_CLAMP, LLR_CLAMP)
    return bcjr_extrinsic(trellis.next_state, trellis.parity, ls, lp, la,
                          terminated)


def turbo_decode(cfg, frame, return_llrs=False):
    """Iterative log-MAP decoding, ``cfg.iterations`` full iterations.

    Each iteration runs SISO 1 on the natural order then SISO 2 on the
    interleaved order. Tail positions take no a-priori input and their
    extrinsic values are not exchanged.

    Returns
    -------
    decisions : ndarray of int8, length L
        1 where the final a-posteriori LLR is strictly positive.
    diagnostics : dict
        Per-iteration mean |extrinsic| of each SISO and the count of
        decision changes.
    """
    L, m = cfg.size, cfg.memory
    il = cfg.interleaver
    tr = cfg.trellis
    sys1 = np.clip(frame.systematic1, -LLR_CLAMP, LLR_CLAMP)
    par1 = np.clip(frame.parity1, -LLR_CLAMP, LLR_CLAMP)
    sys2 = np.clip(frame.systematic2, -LLR_CLAMP, LLR_CLAMP)
    par2 = np.clip(frame.parity2, -LLR_CLAMP, LLR_CLAMP)
    if sys1.shape != (L + m,) or sys2.shape != (L + m,):
        raise UsageError("frame does not match the turbo configuration")
    apr1 = np.zeros(L + m)
    apr2 = np.zeros(L + m)
    ext1_hist, ext2_hist, changes = [], [], []
    decisions = np.zeros(L, dtype=np.int8)
    for _ in range(cfg.iterations):
        ext1 = bcjr_extrinsic(tr.next_state, tr.parity, sys1, par1, apr1, True)
        apr2[:L] = ext1[:L][il.permutation]
        ext2 = bcjr_extrinsic(tr.next_state, tr.parity, sys2, par2, apr2, True)
        apr1[:L] = ext2[:L][il.inverse]
        post = sys1[:L] + ext1[:L] + apr1[:L]
        new = (post > 0).astype(np.int8)
        changes.append(int(np.count_nonzero(new != decisions)))
        decisions = new
        ext1_hist.append(float(np.mean(np.abs(ext1[:L]))))
        ext2_hist.append(float(np.mean(np.abs(ext2[:L]))))
    diagnostics = {
        "mean_abs_ext1": ext1_hist,
        "mean_abs_ext2": ext2_hist,
        "decision_changes": changes,
    }
    if return_llrs:
        diagnostics["posterior"] = post
        diagnostics["ext1"] = ext1
        diagnostics["ext2"] = ext2
    return decisions, diagnostics
