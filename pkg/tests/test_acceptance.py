"""Acceptance gate.

Each test prints one ``CRITERION n ... PASS|FAIL`` line with the measured
numbers. The Monte Carlo sweeps are run once per session and shared between
criteria; all of them use the same master seed, so curves that are compared
see the same channel and noise per frame index.

Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import functools
import math

import numpy as np
import pytest
from scipy import integrate

from qsturbo.analytic import fer_analytic, fer_semi_analytic, pdf_gamma
from qsturbo.io import emit_csv
from qsturbo.modem import demap_siso
from qsturbo.sim import SimConfig, crossing_db, run_sweep
from qsturbo.stbc import demap_g2, demap_generic
from qsturbo.threshold import estimate_threshold
from qsturbo.trellis import build_trellis
from qsturbo.turbo import TurboConfig, bcjr_siso_decode
from qsturbo.viterbi import ViterbiConfig, viterbi_decode

from oracles import (all_messages, conv_codeword, exhaustive_ml, exhaustive_rsc_posterior,
                     shift_register_encode)

pytestmark = pytest.mark.acceptance

SEED = 2024
MIN_ERRORS = 50
MAX_FRAMES = 20_000
SISO_SWEEP = (4.0, 8.0, 12.0, 16.0, 20.0, 22.0)
G2_NR1_SWEEP = (3.0, 6.0, 9.0, 12.0)
G2_NR2_SWEEP = (2.0, 4.0, 6.0, 8.0)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    return emit


def _code(kind, size=1024):
    if kind == "conv":
        return ViterbiConfig.make("753/561", size)
    return TurboConfig.make(kind, size, seed=0, iterations=7)


@functools.lru_cache(maxsize=None)
def sweep(kind, size, scheme, n_r, points):
    cfg = SimConfig(_code(kind, size), scheme=scheme, n_r=n_r, sweep=points,
                    min_frame_errors=MIN_ERRORS, max_frames=MAX_FRAMES,
                    master_seed=SEED, threshold=0.77 if kind == "5/7" else "auto")
    return run_sweep(cfg)


def _fmt(xs, spec=".3g"):
    return "[" + ", ".join("-" if x is None else format(x, spec) for x in xs) + "]"


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_oracle_equivalences(report):
    rng = np.random.default_rng(1)
    worst_siso = 0.0
    for code in ("5/7", "21/37"):
        ff, fb = code.split("/")
        tr = build_trellis(code)
        m = tr.memory
        for _ in range(20):
            msg = rng.integers(0, 2, 8)
            s, p, _ = shift_register_encode(ff, fb, msg)
            scale = rng.uniform(0.3, 4.0)
            ls = scale * (2 * np.array(s) - 1) + rng.normal(0, np.sqrt(2 * scale), 8 + m)
            lp = scale * (2 * np.array(p) - 1) + rng.normal(0, np.sqrt(2 * scale), 8 + m)
            la = np.concatenate([rng.normal(0, 2, 8), np.zeros(m)])
            post = (la + ls + bcjr_siso_decode(tr, ls, lp, la))[:8]
            ref = exhaustive_rsc_posterior(ff, fb, ls, lp, la[:8])
            worst_siso = max(worst_siso, np.max(np.abs(post - ref) / np.maximum(1, np.abs(ref))))

    cfg = ViterbiConfig.make("5/7", 10)
    msgs = all_messages(10)
    words = [conv_codeword("5", "7", u) for u in msgs]
    vit_mismatch = 0
    for _ in range(100):
        u = msgs[rng.integers(len(msgs))]
        llrs = 1.5 * (2 * np.array(words[msgs.index(u)]) - 1) + rng.normal(0, 1.7, len(words[0]))
        ref, _, _ = exhaustive_ml(words, msgs, llrs)
        vit_mismatch += not np.array_equal(viterbi_decode(cfg, llrs), ref)

    worst_demap = 0.0
    for trial in range(10_000):
        n_r = 1 + trial % 2
        h = (rng.normal(size=(n_r, 2)) + 1j * rng.normal(size=(n_r, 2))) * rng.uniform(0.05, 1.5)
        r = (rng.normal(size=(n_r, 2)) + 1j * rng.normal(size=(n_r, 2))) * rng.uniform(0.1, 3)
        snr = 10 ** rng.uniform(-1, 1.5)
        a, b = demap_g2(r, h, snr), demap_generic("g2", r, h, snr)
        worst_demap = max(worst_demap, np.max(np.abs(a - b) / np.maximum(1, np.abs(b))))
        if trial % 10 == 0:
            l1, l2 = demap_siso(r[0, 0], h[0, 0], snr)
            g = demap_generic("none", r[:1, :1], h[:1, :1], snr)
            worst_demap = max(worst_demap, np.max(np.abs(np.array([l1, l2]) - g)
                                                  / np.maximum(1, np.abs(g))))

    ok = worst_siso <= 1e-9 and vit_mismatch == 0 and worst_demap <= 1e-9
    report(1, ok, f"SISO rel err {worst_siso:.2e}, Viterbi mismatches {vit_mismatch}/100, "
                  f"demapper rel err {worst_demap:.2e}")
    assert ok


# -- 2 ---------------------------------------------------------------------------

def test_criterion_2_analytic_self_consistency(report):
    worst_quad = 0.0
    for m in (1, 2, 3, 4):
        for mean in (0.3, 2.0, 20.0, 200.0, 2000.0):
            for th in (0.8, 1.19, 2.5):
                ref, _ = integrate.quad(lambda g: pdf_gamma(g, mean, m), 0, th,
                                        epsabs=1e-15, epsrel=1e-12)
                val = fer_analytic(mean, th, m)
                worst_quad = max(worst_quad, abs(val - ref) / max(ref, 1e-300))
    worst_sigma = 0.0
    rng = np.random.default_rng(2)
    for m in (1, 2, 4):
        for mean_db in (0.0, 8.0, 16.0):
            mean = 10 ** (mean_db / 10)
            exact = fer_analytic(mean, 1.19, m)
            p = fer_semi_analytic(mean, 1.19, m, rng, 10**6)
            sigma = math.sqrt(exact * (1 - exact) / 10**6)
            worst_sigma = max(worst_sigma, abs(p - exact) / sigma)
    ok = worst_quad <= 1e-8 and worst_sigma <= 3
    report(2, ok, f"quadrature rel err {worst_quad:.2e}, semi-analytic "
                  f"max deviation {worst_sigma:.2f} sigma")
    assert ok


# -- 3 ---------------------------------------------------------------------------

@pytest.mark.parametrize("scheme, n_r, points", [
    ("none", 1, SISO_SWEEP), ("g2", 1, G2_NR1_SWEEP), ("g2", 2, G2_NR2_SWEEP),
])
def test_criterion_3_analytic_vs_simulation(report, scheme, n_r, points):
    res = sweep("5/7", 1024, scheme, n_r, points)
    checked = []
    for p in res.points:
        if 1e-2 <= p.fer_sim <= 0.3:
            checked.append((p.ebno_db, math.log10(p.fer_sim) - math.log10(p.fer_analytic)))
    worst = max((abs(d) for _, d in checked), default=float("nan"))
    ok = len(checked) >= 2 and worst <= 0.25
    report(3, ok, f"{scheme} N_R={n_r}: Eb/N0 {_fmt(res.ebno_db, 'g')} sim {_fmt(res.fer_sim)} "
                  f"analytic {_fmt(res.fer_analytic)}; {len(checked)} points in range, "
                  f"max |log10 ratio| {worst:.3f} (limit 0.25)")
    assert ok


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4_interleaver_size_invariance(report):
    a = sweep("5/7", 1024, "none", 1, SISO_SWEEP)
    b = sweep("5/7", 4096, "none", 1, SISO_SWEEP)
    rows = []
    ok = True
    for pa, pb in zip(a.points, b.points):
        if min(pa.fer_sim, pb.fer_sim) < 1e-2:
            continue
        half = (pa.ci[1] - pa.ci[0]) / 2 + (pb.ci[1] - pb.ci[0]) / 2
        diff = abs(pa.fer_sim - pb.fer_sim)
        ok &= diff < half
        rows.append(f"{pa.ebno_db:g} dB |dFER| {diff:.3g} < {half:.3g}")
    ok &= len(rows) >= 3
    report(4, ok, "interleaver 1024 vs 4096: " + "; ".join(rows))
    assert ok


def test_criterion_4_polynomial_invariance(report):
    a = sweep("5/7", 1024, "none", 1, SISO_SWEEP)
    b = sweep("21/37", 1024, "none", 1, SISO_SWEEP)
    gaps = {}
    for target in (1e-1, 1e-2):
        xa, xb = crossing_db(a, target), crossing_db(b, target)
        gaps[target] = None if xa is None or xb is None else xa - xb
    ok = all(g is not None and abs(g) <= 0.3 for g in gaps.values())
    report(4, ok, "(1,5/7) vs (1,21/37) horizontal gap: "
                  + ", ".join(f"FER {t:g}: {'n/a' if g is None else f'{g:+.3f} dB'}"
                              for t, g in gaps.items()) + " (limit 0.3 dB)")
    assert ok


# -- 5 ---------------------------------------------------------------------------

def test_criterion_5_siso_no_turbo_advantage(report):
    t = sweep("5/7", 1024, "none", 1, SISO_SWEEP)
    c = sweep("conv", 1024, "none", 1, SISO_SWEEP)
    xt, xc = crossing_db(t, 0.1), crossing_db(c, 0.1)
    gap = None if xt is None or xc is None else xc - xt
    ok = gap is not None and abs(gap) <= 0.5
    report(5, ok, f"SISO FER 0.1 crossing: turbo {xt}, conv {xc}; conv - turbo "
                  f"{'n/a' if gap is None else f'{gap:+.3f} dB'} (limit |gap| <= 0.5 dB); "
                  f"turbo {_fmt(t.fer_sim)} conv {_fmt(c.fer_sim)}")
    assert ok


def test_criterion_5_g2_turbo_better(report):
    t = sweep("5/7", 1024, "g2", 2, G2_NR2_SWEEP)
    c = sweep("conv", 1024, "g2", 2, G2_NR2_SWEEP)
    rows = []
    ok = True
    for pt, pc in zip(t.points, c.points):
        if min(pt.fer_sim, pc.fer_sim) > 0.1:
            continue
        ok &= pt.fer_sim < pc.fer_sim
        rows.append(f"{pt.ebno_db:g} dB turbo {pt.fer_sim:.3g} vs conv {pc.fer_sim:.3g}")
    ok &= len(rows) >= 2
    report(5, ok, "G2 N_R=2: " + "; ".join(rows))
    assert ok


# -- 6 ---------------------------------------------------------------------------

@pytest.mark.parametrize("code, expected", [("5/7", 0.77), ("21/37", 0.57)])
def test_criterion_6_threshold_estimation(report, code, expected):
    spec = estimate_threshold(_code(code, 4096), window=(0.0, 2.0), tol_db=0.05,
                              n_frames=40, seed=SEED)
    err = spec.gamma_th_db - expected
    ok = abs(err) <= 0.25
    report(6, ok, f"(1,{code}) L=4096: estimate {spec.gamma_th_db:.3f} dB vs "
                  f"{expected} dB, error {err:+.3f} dB (limit 0.25); BER target "
                  f"{spec.settings['target_ber']:g}")
    assert ok


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7_determinism(report, tmp_path):
    digests = {}
    for workers in (1, 2, 8):
        cfg = SimConfig(TurboConfig.make("5/7", 256, seed=0), scheme="g2", n_r=1,
                        sweep=(2.0, 6.0, 10.0), min_frame_errors=30, max_frames=2000,
                        master_seed=SEED, workers=workers)
        path = tmp_path / f"w{workers}.csv"
        emit_csv(run_sweep(cfg), path)
        digests[workers] = path.read_bytes()
    ok = digests[1] == digests[2] == digests[8]
    report(7, ok, f"CSV bytes identical across 1, 2, 8 workers: {ok} "
                  f"({len(digests[1])} bytes)")
    assert ok
