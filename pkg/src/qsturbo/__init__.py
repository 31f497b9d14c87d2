"""Turbo and convolutional codes over quasi-static Rayleigh fading.

Link-level Monte Carlo simulation (turbo with exact log-MAP, convolutional
with soft Viterbi, QPSK, orthogonal STBC, flat quasi-static MIMO fading) and
the closed-form FER model that ties frame errors to the iterative decoder's
convergence threshold.
"""

from .analytic import (FadingOrder, ThresholdSpec, fer_analytic, fer_semi_analytic,
                       lookup_threshold, pdf_gamma)
from .channel import LinkBudget, draw_channel, instantaneous_gamma_b, transmit
from .errors import ConfigError, NumericalInputError, SearchFailure, UsageError
from .modem import demap_siso, map_bits
from .sim import SimConfig, compare_codes, run_frame, run_sweep
from .stbc import demap_g2, demap_generic, get_scheme, stbc_encode
from .threshold import estimate_threshold
from .trellis import CodeSpec, Trellis, build_trellis, rsc_encode
from .turbo import (Interleaver, TurboConfig, bcjr_siso_decode, turbo_decode,
                    turbo_encode)
from .viterbi import ViterbiConfig, conv_encode, viterbi_decode

__version__ = "0.1.0"
