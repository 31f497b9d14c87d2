"""Rate-1/2 recursive systematic convolutional (RSC) codes as trellises.

Polynomials are given in octal. The leftmost octal digit carries the highest
degree tap, so ``7`` is 1 + D + D^2 and ``5`` is 1 + D^2; the coefficient of
D^i is bit i of the integer value.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import encode_kernel
from .errors import ConfigError, UsageError

__all__ = ["CodeSpec", "Trellis", "build_trellis", "rsc_encode"]


def _parse_octal(text):
    if isinstance(text, int):
        return text
    try:
        value = int(str(text).strip(), 8)
    except ValueError as exc:
        raise ConfigError(f"not an octal polynomial: {text!r}") from exc
    return value


@dataclass(frozen=True)
class CodeSpec:
    """Generator pair (1, feedforward/feedback) of a rate-1/2 RSC code.

    Parameters
    ----------
    feedforward_poly, feedback_poly : int or str
        Polynomials as integers or octal strings, e.g. ``"5"`` and ``"7"``.
    """

    feedforward_poly: int
    feedback_poly: int
    constraint_length: int = field(init=False)

    def __post_init__(self):
        ff = _parse_octal(self.feedforward_poly)
        fb = _parse_octal(self.feedback_poly)
        if ff <= 0 or fb <= 0:
            raise ConfigError("generator polynomials must be nonzero")
        if not fb & 1:
            raise ConfigError(
                f"feedback polynomial {fb:o} has no constant term")
        object.__setattr__(self, "feedforward_poly", ff)
        object.__setattr__(self, "feedback_poly", fb)
        memory = max(ff.bit_length(), fb.bit_length()) - 1
        if memory < 1:
            raise ConfigError("code needs at least one memory element")
        object.__setattr__(self, "constraint_length", memory + 1)

    @classmethod
    def parse(cls, text):
        """Build from ``"5/7"`` or ``"1,5/7"`` notation (feedforward/feedback)."""
        body = text.strip().strip("()")
        if "," in body:
            head, body = body.split(",", 1)
            if head.strip() != "1":
                raise ConfigError(f"only systematic codes are supported: {text!r}")
        try:
            ff, fb = body.split("/")
        except ValueError as exc:
            raise ConfigError(f"expected 'ff/fb' polynomial pair, got {text!r}") from exc
        return cls(ff.strip(), fb.strip())

    @property
    def memory(self):
        return self.constraint_length - 1

    @property
    def label(self):
        return f"(1,{self.feedforward_poly:o}/{self.feedback_poly:o})"

    def __str__(self):
        return self.label


class Trellis:
    """State transition tables of an RSC encoder.

    The state integer holds the last ``memory`` feedback-register values,
    most recent in bit 0. Arrays are read-only so instances can be shared.

    Attributes
    ----------
    next_state : ndarray, shape (num_states, 2)
    parity : ndarray, shape (num_states, 2)
        Parity output for each (state, input bit). The systematic output is
        the input bit itself.
    feedback_input : ndarray, shape (num_states,)
        Input bit that cancels the recursion, i.e. drives a zero into the
        register. Feeding it ``memory`` times from any state reaches state 0.
    termination_inputs : ndarray, shape (num_states, memory)
    """

    def __init__(self, spec):
        self.spec = spec
        self.memory = spec.memory
        self.num_states = 1 << self.memory
        m = self.memory
        fb = spec.feedback_poly
        ff = spec.feedforward_poly
        ns = self.num_states
        next_state = np.empty((ns, 2), dtype=np.int64)
        parity = np.empty((ns, 2), dtype=np.int8)
        feedback_input = np.empty(ns, dtype=np.int8)
        for s in range(ns):
            # taps on a_{t-i}, i = 1..m, live in bit i-1 of the state
            fb_sum = bin(s & (fb >> 1)).count("1") & 1
            ff_mem = bin(s & (ff >> 1)).count("1") & 1
            feedback_input[s] = fb_sum
            for u in (0, 1):
                a = u ^ fb_sum
                parity[s, u] = ((ff & 1) * a) ^ ff_mem
                next_state[s, u] = ((s << 1) | a) & (ns - 1)
        term = np.empty((ns, m), dtype=np.int8)
        for s in range(ns):
            state = s
            for k in range(m):
                u = feedback_input[state]
                term[s, k] = u
                state = next_state[state, u]
        for arr in (next_state, parity, feedback_input, term):
            arr.setflags(write=False)
        self.next_state = next_state
        self.parity = parity
        self.feedback_input = feedback_input
        self.termination_inputs = term

    def __repr__(self):
        return f"Trellis({self.spec.label}, states={self.num_states})"

    def __reduce__(self):
        return (Trellis, (self.spec,))


def build_trellis(spec):
    """Return the trellis of ``spec`` (a :class:`CodeSpec` or ``"ff/fb"`` text)."""
    if isinstance(spec, str):
        spec = CodeSpec.parse(spec)
    return Trellis(spec)


def rsc_encode(trellis, message, terminate=True):
    """Encode ``message`` with the RSC code of ``trellis``.

    Returns
    -------
    systematic, parity : ndarray of int8
        Each of length ``len(message) + memory`` when terminated, else
        ``len(message)``.
    tail_len : int
    """
    message = np.asarray(message, dtype=np.int8)
    if message.ndim != 1 or message.size == 0:
        raise UsageError("message must be a nonempty 1-D bit sequence")
    sys, par, state = encode_kernel(
        trellis.next_state, trellis.parity, trellis.feedback_input,
        message, trellis.memory, terminate)
    if terminate:
        assert state == 0
    return sys, par, (trellis.memory if terminate else 0)
