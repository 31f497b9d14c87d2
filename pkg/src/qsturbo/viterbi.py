"""Stand-alone terminated RSC code with soft-input Viterbi decoding.

Codeword layout: ``[systematic (n) | parity (n) | tail (2m)]`` where the
tail is interleaved per step as (systematic, parity).
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import viterbi_kernel
from .errors import NumericalInputError, UsageError
from .trellis import CodeSpec, Trellis, rsc_encode

__all__ = ["ViterbiConfig", "conv_encode", "viterbi_decode"]


@dataclass(frozen=True)
class ViterbiConfig:
    spec: CodeSpec = field(default_factory=lambda: CodeSpec("753", "561"))
    frame_length: int = 1024
    trellis: Trellis = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.frame_length < 1:
            raise UsageError("frame_length must be positive")
        object.__setattr__(self, "trellis", Trellis(self.spec))

    @classmethod
    def make(cls, code="753/561", frame_length=1024):
        spec = code if isinstance(code, CodeSpec) else CodeSpec.parse(code)
        return cls(spec, frame_length)

    @property
    def memory(self):
        return self.trellis.memory

    @property
    def coded_length(self):
        return 2 * (self.frame_length + self.memory)

    @property
    def rate(self):
        return 0.5

    @property
    def tail_overhead(self):
        return 2 * self.memory / self.coded_length

    @property
    def info_length(self):
        return self.frame_length

    def describe(self):
        return f"conv {self.spec.label} n={self.frame_length} viterbi"


def conv_encode(cfg, message):
    message = np.asarray(message, dtype=np.int8)
    if message.shape != (cfg.frame_length,):
        raise UsageError(f"message must have length {cfg.frame_length}")
    n = cfg.frame_length
    sys, par, _ = rsc_encode(cfg.trellis, message, terminate=True)
    tail = np.stack([sys[n:], par[n:]], axis=1).ravel()
    return np.concatenate([sys[:n], par[:n], tail]).astype(np.int8)


def _split(cfg, llrs):
    n = cfg.frame_length
    lsys = np.concatenate([llrs[:n], llrs[2 * n::2]])
    lpar = np.concatenate([llrs[n:2 * n], llrs[2 * n + 1::2]])
    return lsys, lpar


def viterbi_decode(cfg, llrs, return_metric=False):
    """Maximum-likelihood message under the correlation metric.

    The path metric is ``sum(llr * (2c - 1))`` over all coded bits, so any
    positive rescaling of ``llrs`` leaves the decision unchanged. Equal
    metrics resolve toward input bit 0 at the merge, then toward the lower
    predecessor state.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (cfg.coded_length,):
        raise UsageError(f"expected {cfg.coded_length} LLRs, got {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise NumericalInputError("non-finite LLR input")
    lsys, lpar = _split(cfg, llrs)
    bits, metric = viterbi_kernel(cfg.trellis.next_state, cfg.trellis.parity,
                                  lsys, lpar, cfg.frame_length)
    if return_metric:
        return bits, metric
    return bits
