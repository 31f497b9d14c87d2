"""Quasi-static flat Rayleigh MIMO channel, AWGN, and Eb/N0 bookkeeping.

Random streams are derived per frame from ``(master_seed, point, frame)``
through :class:`numpy.random.SeedSequence`, so results do not depend on how
frames are spread across workers. Normal variates come from numpy's
``Generator.standard_normal`` (ziggurat) on PCG64.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, UsageError

__all__ = [
    "LinkBudget", "FrameStreams", "frame_streams", "draw_channel", "transmit",
    "instantaneous_gamma_b", "db_to_linear", "linear_to_db",
]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class LinkBudget:
    """Maps an average Eb/N0 to the per-receive-antenna SNR of the simulator.

    ``reference="combined"`` treats ``ebno_db`` as the average Eb/N0 after
    maximal-ratio combining over all N_T x N_R branches, which is the mean of
    the chi-square variable in the threshold model. ``"per_antenna"`` treats
    it as the Eb/N0 seen at each receive antenna; the two agree for N_R = 1.
    """

    ebno_db: float
    code_rate: Fraction = Fraction(1, 2)
    stbc_rate: Fraction = Fraction(1)
    n_r: int = 1
    bits_per_symbol: int = 2
    reference: str = "combined"

    def __post_init__(self):
        if self.reference not in ("combined", "per_antenna"):
            raise ConfigError(f"unknown Eb/N0 reference {self.reference!r}")
        if self.n_r < 1:
            raise ConfigError("n_r must be positive")

    @property
    def ebno(self):
        return float(db_to_linear(self.ebno_db))

    @property
    def info_bits_per_channel_use(self):
        return float(self.code_rate * self.bits_per_symbol * self.stbc_rate)

    @property
    def snr(self):
        """Linear SNR per receive antenna (total transmit power over noise)."""
        snr = self.ebno * self.info_bits_per_channel_use
        if self.reference == "combined":
            snr /= self.n_r
        return snr

    @property
    def mean_combined_ebno(self):
        """Average post-combining Eb/N0, the quantity the threshold model uses."""
        if self.reference == "combined":
            return self.ebno
        return self.ebno * self.n_r


@dataclass
class FrameStreams:
    message: np.random.Generator
    channel: np.random.Generator
    noise: np.random.Generator


def frame_streams(master_seed, point, frame):
    """Independent generators for one frame; identical across codes and workers."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(point, frame))
    msg, chan, noise = ss.spawn(3)
    return FrameStreams(np.random.default_rng(msg), np.random.default_rng(chan),
                        np.random.default_rng(noise))


def _complex_normal(rng, shape, variance):
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def draw_channel(rng, n_r, n_t):
    """One N_R x N_T matrix of i.i.d. CN(0, 1) gains."""
    if n_r < 1 or n_t < 1:
        raise UsageError("antenna counts must be positive")
    return _complex_normal(rng, (int(n_r), int(n_t)), 1.0)


def transmit(blocks, h, snr, rng=None, noiseless=False):
    """Pass transmit blocks through ``r = h s + n``.

    Parameters
    ----------
    blocks : array, shape (K, N_T) or (B, K, N_T)
    h : array, shape (N_R, N_T)
        Used unchanged for every block of the frame.
    snr : float
        Noise is CN(0, N_T / snr) per receive sample.

    Returns
    -------
    array, shape (N_R, K) or (B, N_R, K)
    """
    blocks = np.asarray(blocks, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if blocks.shape[-1] != h.shape[1]:
        raise UsageError("block width must equal the number of transmit antennas")
    r = np.einsum("ji,...ki->...jk", h, blocks)
    if noiseless:
        return r
    if snr <= 0:
        raise UsageError("snr must be positive")
    if rng is None:
        raise UsageError("a random generator is required unless noiseless")
    return r + _complex_normal(rng, r.shape, h.shape[1] / snr)


def instantaneous_gamma_b(h, budget):
    """Post-combining Eb/N0 of one channel realisation (linear).

    Equals ``mean_combined_ebno * sum|h|^2 / (N_T N_R)``, which has mean
    ``mean_combined_ebno`` and is chi-square with 2 N_T N_R degrees of freedom.
    """
    h = np.asarray(h)
    n_r, n_t = h.shape
    return budget.mean_combined_ebno * float(np.sum(np.abs(h) ** 2)) / (n_t * n_r)
