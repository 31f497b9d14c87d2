"""Gray-coded unit-power QPSK and its single-antenna soft demapper.

Bit 1 of a pair drives the real axis and bit 2 the imaginary axis; a 1 maps
to the positive level. LLRs are ln P(b=1)/P(b=0) with zero a-priori input.
"""

import numpy as np

from .errors import UsageError

__all__ = ["map_bits", "qpsk_map", "demap_siso", "llr_scale", "QPSK_POINTS"]

_A = 1.0 / np.sqrt(2.0)

# index = 2*b1 + b2
QPSK_POINTS = np.array([-_A - 1j * _A, -_A + 1j * _A, _A - 1j * _A, _A + 1j * _A])


def map_bits(b1, b2):
    if b1 not in (0, 1) or b2 not in (0, 1):
        raise UsageError("bits must be 0 or 1")
    return complex(((2 * b1 - 1) + 1j * (2 * b2 - 1)) * _A)


def qpsk_map(bits):
    """Map an even-length bit array to symbols, pairs taken in order."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size % 2:
        raise UsageError("QPSK needs an even number of bits")
    pairs = bits.reshape(-1, 2)
    return QPSK_POINTS[2 * pairs[:, 0] + pairs[:, 1]]


def llr_scale(snr, n_t=1, scaling="exact"):
    """Factor multiplying the matched-filter output to give bit LLRs.

    ``"exact"`` is the true LLR for unit-power QPSK in complex noise of
    variance ``n_t / snr``. ``"printed"`` is the fixed ``4 * snr`` factor,
    which over-scales the LLRs by ``sqrt(2) * n_t``.
    """
    if scaling == "exact":
        return 2.0 * np.sqrt(2.0) * snr / n_t
    if scaling == "printed":
        return 4.0 * snr
    raise UsageError(f"unknown LLR scaling {scaling!r}")


def demap_siso(r, h, snr, scaling="exact"):
    """Closed-form QPSK LLRs for one receive and one transmit antenna.

    ``llr_b1 = c * |h| * Re(exp(-j*arg h) * r)`` and likewise with ``Im`` for
    ``llr_b2``, where ``c`` is :func:`llr_scale`. Works elementwise on
    arrays; ``h == 0`` yields zero LLRs.
    """
    if np.any(np.asarray(snr) <= 0):
        raise UsageError("snr must be positive")
    z = np.abs(h) * np.exp(-1j * np.angle(h)) * r
    c = llr_scale(snr, 1, scaling)
    return c * np.real(z), c * np.imag(z)
