import numpy as np
import pytest

from qsturbo.errors import UsageError
from qsturbo.modem import QPSK_POINTS, demap_siso, map_bits, qpsk_map
from qsturbo.stbc import demap_generic

S = 1 / np.sqrt(2)


def test_mapping_convention():
    assert map_bits(1, 1) == pytest.approx((1 + 1j) * S)
    assert map_bits(0, 0) == pytest.approx((-1 - 1j) * S)
    assert map_bits(1, 0) == pytest.approx((1 - 1j) * S)
    with pytest.raises(UsageError):
        map_bits(2, 0)


def test_unit_power_and_gray():
    pts = {(b1, b2): map_bits(b1, b2) for b1 in (0, 1) for b2 in (0, 1)}
    for p in pts.values():
        assert abs(p) ** 2 == pytest.approx(1.0)
    # nearest neighbours sit at distance sqrt(2) and differ in one bit
    for a, pa in pts.items():
        for b, pb in pts.items():
            if abs(abs(pa - pb) - np.sqrt(2)) < 1e-12:
                assert sum(x != y for x, y in zip(a, b)) == 1


def test_qpsk_map_pairs_in_order():
    syms = qpsk_map([1, 1, 0, 0, 1, 0])
    assert np.allclose(syms, [map_bits(1, 1), map_bits(0, 0), map_bits(1, 0)])
    with pytest.raises(UsageError):
        qpsk_map([1, 0, 1])


def test_printed_formula_example():
    # 4 * SNR * |h| * Re(r) with h = 1, SNR = 1, r = (1+j)/sqrt(2)
    l1, l2 = demap_siso((1 + 1j) * S, 1.0, 1.0, scaling="printed")
    assert l1 == pytest.approx(4 / np.sqrt(2)) and l2 == pytest.approx(2.8284271247)


def test_exact_scaling_example():
    # exact LLR of unit-power QPSK in CN(0, 1/SNR) noise is 2*sqrt(2)*SNR*Re(h* r)
    l1, l2 = demap_siso((1 + 1j) * S, 1.0, 1.0)
    assert l1 == pytest.approx(2.0) and l2 == pytest.approx(2.0)


def test_zero_receive_and_zero_channel():
    assert demap_siso(0.0, 0.7 - 0.2j, 3.0) == (0.0, 0.0)
    l1, l2 = demap_siso(0.4 + 0.1j, 0.0, 3.0)
    assert l1 == 0.0 and l2 == 0.0


def test_snr_must_be_positive():
    with pytest.raises(UsageError):
        demap_siso(1.0, 1.0, 0.0)


def test_closed_form_matches_marginalisation():
    rng = np.random.default_rng(0)
    n = 10_000
    r = rng.normal(size=n) + 1j * rng.normal(size=n)
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    snr = 10 ** rng.uniform(-1, 2, n)
    worst = 0.0
    for k in range(n):
        l1, l2 = demap_siso(r[k], h[k], snr[k])
        ref = demap_generic("none", np.array([[r[k]]]), np.array([[h[k]]]), snr[k])
        err = np.abs(np.array([l1, l2]) - ref) / np.maximum(1.0, np.abs(ref))
        worst = max(worst, err.max())
    assert worst <= 1e-9


@pytest.mark.parametrize("b1, b2", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_noiseless_signs(b1, b2):
    rng = np.random.default_rng(b1 * 2 + b2)
    for _ in range(50):
        h = rng.normal() + 1j * rng.normal()
        l1, l2 = demap_siso(h * map_bits(b1, b2), h, 2.0)
        assert np.sign(l1) == 2 * b1 - 1 and np.sign(l2) == 2 * b2 - 1


def test_linear_in_snr_and_phase_invariant():
    rng = np.random.default_rng(4)
    r = rng.normal(size=100) + 1j * rng.normal(size=100)
    h = rng.normal(size=100) + 1j * rng.normal(size=100)
    a1, a2 = demap_siso(r, h, 1.5)
    b1, b2 = demap_siso(r, h, 4.5)
    assert np.allclose(b1, 3 * a1) and np.allclose(b2, 3 * a2)
    rot = np.exp(1j * rng.uniform(0, 2 * np.pi, 100))
    c1, c2 = demap_siso(rot * r, rot * h, 1.5)
    assert np.allclose(c1, a1) and np.allclose(c2, a2)


def test_points_table_matches_map_bits():
    for idx, p in enumerate(QPSK_POINTS):
        assert p == pytest.approx(map_bits(idx >> 1, idx & 1))
