import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trellis_prune.errors import ConfigurationError
from trellis_prune.waveform import build_constellation, build_pulse, rrc_value

from oracles import richardson_limit, rrc_formula


def test_qpsk_points():
    c = build_constellation("QPSK")
    expected = {complex(a, b) / np.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert {complex(p) for p in c.points} == expected
    assert c.M == 4
    assert c.average_energy == pytest.approx(1.0, abs=1e-12)


def test_qam16_points():
    c = build_constellation("QAM16")
    levels = (-3, -1, 1, 3)
    expected = {complex(a, b) / np.sqrt(10) for a in levels for b in levels}
    got = {complex(p) for p in c.points}
    assert len(got) == 16
    assert all(min(abs(g - e) for e in expected) < 1e-15 for g in got)
    assert c.average_energy == pytest.approx(1.0, abs=1e-12)


def test_unsupported_kind():
    with pytest.raises(ConfigurationError):
        build_constellation("8PSK")


@pytest.mark.parametrize("kind,dmin", [("QPSK", np.sqrt(2)), ("QAM16", 2 / np.sqrt(10))])
def test_min_distance(kind, dmin):
    assert build_constellation(kind).min_distance() == pytest.approx(dmin, abs=1e-12)


@pytest.mark.parametrize("kind", ["QPSK", "QAM16"])
def test_gray_labelling(kind):
    # nearest neighbours differ in exactly one label bit
    c = build_constellation(kind)
    d = np.abs(c.points[:, None] - c.points[None, :])
    dmin = c.min_distance()
    for i in range(c.M):
        for j in range(c.M):
            if i != j and abs(d[i, j] - dmin) < 1e-9:
                assert bin(i ^ j).count("1") == 1


def test_rrc_alpha_zero_is_sinc():
    t = np.linspace(0.01, 5, 200)
    W = 0.5
    np.testing.assert_allclose(rrc_value(t, 0.0, W),
                               np.sqrt(2 * W) * np.sin(2 * np.pi * W * t) / (2 * np.pi * W * t),
                               atol=1e-14)
    assert rrc_value(0.0, 0.0, W) == pytest.approx(1.0, abs=1e-15)


def test_rrc_value_at_zero():
    assert rrc_value(0.0, 0.5, 0.5) == pytest.approx(1.136620, abs=1e-6)
    assert rrc_value(0.0, 0.5, 0.5) == pytest.approx(richardson_limit(0.0, 0.5), abs=1e-8)


@pytest.mark.parametrize("alpha", [0.1, 0.22, 0.25, 0.35, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("W", [0.5, 1.0])
def test_rrc_singular_point_matches_numeric_limit(alpha, W):
    t_star = 1 / (8 * alpha * W)
    for t in (t_star, -t_star):
        assert rrc_value(t, alpha, W) == pytest.approx(richardson_limit(t, alpha, W), abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 0.22, 0.35, 0.5, 1.0])
def test_rrc_continuous_at_singular_points(alpha):
    singular = [0.0] + ([1 / (4 * alpha), -1 / (4 * alpha)] if alpha > 0 else [])
    for ts in singular:
        v = rrc_value(ts, alpha)
        for off in (1e-6, -1e-6):
            assert abs(v - rrc_value(ts + off, alpha)) < 1e-4


def test_rrc_even():
    rng = np.random.default_rng(7)
    t = rng.uniform(-8, 8, 1000)
    for alpha in (0.0, 0.22, 0.35, 0.5, 1.0):
        np.testing.assert_allclose(rrc_value(t, alpha), rrc_value(-t, alpha), rtol=0, atol=1e-12)


def test_rrc_rejects_bad_alpha():
    with pytest.raises(ConfigurationError):
        rrc_value(0.3, 1.5)


@given(alpha=st.floats(0.0, 1.0), D=st.integers(1, 4), osf=st.integers(2, 16))
def test_pulse_invariants(alpha, D, osf):
    p = build_pulse(alpha, D, osf)
    h = p.taps
    assert len(h) == 2 * D * osf + 1
    assert np.all(np.isfinite(h))
    np.testing.assert_array_equal(h, h[::-1])
    assert np.sum(h**2) == pytest.approx(1.0, abs=1e-12)
    assert np.argmax(h) == D * osf
    raw = rrc_value(np.arange(2 * D * osf + 1) / osf - D, alpha)
    np.testing.assert_allclose(h, p.scale * raw, rtol=0, atol=1e-12)


@pytest.mark.parametrize("D,osf", [(0, 8), (2, 1), (-1, 4)])
def test_pulse_rejects_bad_sizes(D, osf):
    with pytest.raises(ConfigurationError):
        build_pulse(0.35, D, osf)


def test_cascade_has_small_isi():
    # matched-filter cascade approximates a raised cosine: nulls at symbol offsets
    p = build_pulse(0.5, 3, 16)
    rc = np.convolve(p.taps, p.taps)
    centre = len(rc) // 2
    offsets = [centre + k * 16 for k in range(-5, 6) if k != 0]
    assert max(abs(rc[i]) for i in offsets) <= 0.02 * rc[centre]


def test_pulse_matches_raw_formula_off_grid():
    p = build_pulse(0.22, 3, 16)
    n = np.arange(len(p.taps))
    t = n / 16 - 3
    regular = np.abs(t) > 1e-9
    np.testing.assert_allclose(p.taps[regular], p.scale * rrc_formula(t[regular], 0.22), atol=1e-12)
