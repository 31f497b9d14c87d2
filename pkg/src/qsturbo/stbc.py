"""Orthogonal space-time block codes G2, G3, G4 and their soft demappers.

A transmit block has K rows (time slots) and N_T columns (antennas). Receive
blocks are laid out N_R x K, matching ``r = h @ block.T + n``.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, UsageError
from .modem import QPSK_POINTS, llr_scale

__all__ = [
    "StbcScheme", "SCHEMES", "get_scheme", "stbc_encode", "stbc_encode_many",
    "demap_g2", "demap_generic", "demap_frame",
]


@dataclass(frozen=True)
class StbcScheme:
    kind: str
    n_t: int
    k: int
    k_in: int

    @property
    def rate(self):
        return Fraction(self.k_in, self.k)

    def __str__(self):
        return self.kind


SCHEMES = {
    "none": StbcScheme("none", 1, 1, 1),
    "g2": StbcScheme("g2", 2, 2, 2),
    "g3": StbcScheme("g3", 3, 8, 4),
    "g4": StbcScheme("g4", 4, 8, 4),
}


def get_scheme(name):
    if isinstance(name, StbcScheme):
        return name
    key = "none" if name is None else str(name).lower()
    try:
        return SCHEMES[key]
    except KeyError:
        raise ConfigError(f"unknown STBC scheme {name!r}") from None


# (symbol index, sign, conjugate) per entry. G3 is the first three columns of G4.
_G2 = [
    [(0, 1, False), (1, 1, False)],
    [(1, -1, True), (0, 1, True)],
]
_G4_TOP = [
    [(0, 1), (1, 1), (2, 1), (3, 1)],
    [(1, -1), (0, 1), (3, -1), (2, 1)],
    [(2, -1), (3, 1), (0, 1), (1, -1)],
    [(3, -1), (2, -1), (1, 1), (0, 1)],
]
_G4 = ([[(i, s, False) for i, s in row] for row in _G4_TOP]
       + [[(i, s, True) for i, s in row] for row in _G4_TOP])
_G3 = [row[:3] for row in _G4]

_LAYOUT = {"g2": _G2, "g3": _G3, "g4": _G4}


def _pattern_arrays(kind):
    layout = _LAYOUT[kind]
    idx = np.array([[e[0] for e in row] for row in layout])
    sign = np.array([[e[1] for e in row] for row in layout], dtype=float)
    conj = np.array([[e[2] for e in row] for row in layout])
    return idx, sign, conj


_PATTERNS = {kind: _pattern_arrays(kind) for kind in _LAYOUT}


def stbc_encode_many(scheme, symbols):
    """Encode consecutive groups of K' symbols; returns shape (B, K, N_T)."""
    scheme = get_scheme(scheme)
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.size % scheme.k_in:
        raise UsageError(
            f"{scheme.kind} needs a multiple of {scheme.k_in} symbols")
    groups = symbols.reshape(-1, scheme.k_in)
    if scheme.kind == "none":
        return groups.reshape(-1, 1, 1)
    idx, sign, conj = _PATTERNS[scheme.kind]
    picked = groups[:, idx]
    return sign * np.where(conj, np.conj(picked), picked)


def stbc_encode(scheme, symbols):
    """Generator matrix of ``scheme`` evaluated at K' symbols, shape (K, N_T)."""
    scheme = get_scheme(scheme)
    symbols = np.asarray(symbols, dtype=complex).ravel()
    if symbols.size != scheme.k_in:
        raise UsageError(
            f"{scheme.kind} takes {scheme.k_in} symbols, got {symbols.size}")
    return stbc_encode_many(scheme, symbols)[0]


def demap_g2(r, h, snr, scaling="exact"):
    """Closed-form Alamouti LLRs for one block.

    Parameters
    ----------
    r : array, shape (N_R, 2)
    h : array, shape (N_R, 2)
        ``h[j, i]`` is the gain from transmit antenna i to receive antenna j.

    Returns
    -------
    ndarray, shape (4,)
        LLRs of (b1, b2) of symbol 1 then (b1, b2) of symbol 2.
    """
    r = np.atleast_2d(np.asarray(r, dtype=complex))
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    return demap_g2_many(r[None], h, snr, scaling)[0]


def demap_g2_many(r, h, snr, scaling="exact"):
    """Vectorised :func:`demap_g2` over blocks; ``r`` has shape (B, N_R, 2)."""
    if snr <= 0:
        raise UsageError("snr must be positive")
    if r.shape[1:] != (h.shape[0], 2) or h.shape[1] != 2:
        raise UsageError("G2 needs r of shape (N_R, 2) and h of shape (N_R, 2)")
    h1 = h[:, 0]
    h2 = h[:, 1]
    r1 = r[:, :, 0]
    r2 = r[:, :, 1]
    z1 = np.sum(np.conj(h1) * r1 + h2 * np.conj(r2), axis=1)
    z2 = np.sum(np.conj(h2) * r1 - h1 * np.conj(r2), axis=1)
    c = llr_scale(snr, 2, scaling)
    return c * np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=1)


def _candidates(scheme):
    """All QPSK tuples for one block: symbols (C, K'), bits (C, 2K')."""
    combos = np.array(list(itertools.product(range(4), repeat=scheme.k_in)))
    symbols = QPSK_POINTS[combos]
    bits = np.empty((combos.shape[0], 2 * scheme.k_in), dtype=np.int8)
    bits[:, 0::2] = combos >> 1
    bits[:, 1::2] = combos & 1
    return symbols, bits


_CANDIDATES = {name: _candidates(s) for name, s in SCHEMES.items()}


def demap_generic(scheme, r, h, snr):
    """Exact bitwise LLRs by marginalising over every candidate block.

    Uses the Gaussian likelihood with complex noise variance ``N_T / snr``
    and zero a-priori information. ``r`` is (N_R, K) for one block or
    (B, N_R, K) for a batch. Returns 2K' LLRs per block.
    """
    scheme = get_scheme(scheme)
    if snr <= 0:
        raise UsageError("snr must be positive")
    r = np.asarray(r, dtype=complex)
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    single = r.ndim == 2
    if single:
        r = r[None]
    n_r = h.shape[0]
    if h.shape[1] != scheme.n_t or r.shape[1:] != (n_r, scheme.k):
        raise UsageError("receive block or channel has the wrong shape")
    symbols, bits = _CANDIDATES[scheme.kind]
    tx = stbc_encode_many(scheme, symbols.ravel())  # (C, K, N_T)
    noiseless = np.einsum("ji,cki->cjk", h, tx)  # (C, N_R, K)
    noise_var = scheme.n_t / snr
    diff = r[:, None, :, :] - noiseless[None]
    metric = -np.sum(np.abs(diff) ** 2, axis=(2, 3)) / noise_var  # (B, C)
    out = np.empty((r.shape[0], bits.shape[1]))
    for b in range(bits.shape[1]):
        one = bits[:, b] == 1
        out[:, b] = (logsumexp(metric[:, one], axis=1)
                     - logsumexp(metric[:, ~one], axis=1))
    return out[0] if single else out


def demap_frame(scheme, r, h, snr, scaling="exact"):
    """Demap a whole frame of receive blocks (B, N_R, K) to a flat LLR array.

    Uses the closed forms for ``none`` (per receive antenna, combined) and
    ``g2``; G3 and G4 go through :func:`demap_generic`.
    """
    scheme = get_scheme(scheme)
    if scheme.kind == "none":
        c = llr_scale(snr, 1, scaling)
        z = np.sum(np.conj(h[:, 0])[None, :] * r[:, :, 0], axis=1)
        return (c * np.stack([z.real, z.imag], axis=1)).ravel()
    if scheme.kind == "g2":
        return demap_g2_many(r, h, snr, scaling).ravel()
    if scaling != "exact":
        raise UsageError("G3/G4 demapping only supports exact scaling")
    return demap_generic(scheme, r, h, snr).ravel()
