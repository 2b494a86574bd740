"""Framing, autocorrelation, period search, and peak refinement."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandpitch.bands import band_lag_range, band_of_frequency
from bandpitch.dsp import (Acf, autocorr, double_autocorr, estimate_period,
                           find_t0, flatten_envelope, frame_geometry,
                           frame_signal, normalize_acf, num_frames,
                           refine_peak)
from bandpitch.filterbank import apply_filter, design_band_filter

from conftest import FS, buffer_of, sawtooth, tone


def brute_force_acf(frame):
    """Direct O(N^2) zero-extended autocorrelation, the defining sum."""
    n = len(frame)
    out = np.zeros(n)
    for tau in range(n):
        out[tau] = np.dot(frame[: n - tau], frame[tau:]) / n
    return out


# ---------------------------------------------------------------------------
# framing
# ---------------------------------------------------------------------------

def test_frame_geometry_at_pipeline_rate():
    assert frame_geometry(16000) == (800, 160)


def test_1600_samples_give_10_frames_with_padded_tail():
    series = frame_signal(buffer_of(np.ones(1600)))
    assert len(series) == 10
    # frame 6 starts at 960 and runs past the signal: padded with zeros
    assert np.all(series.frames[6][640:] == 0.0)
    assert np.all(series.frames[5][:640] == 1.0)


def test_800_samples_give_5_frames():
    series = frame_signal(buffer_of(np.arange(800.0)))
    assert len(series) == 5
    for t in range(5):
        start = t * 160
        np.testing.assert_array_equal(
            series.frames[t][: 800 - start], np.arange(float(start), 800.0)
        )


def test_empty_buffer_rejected():
    with pytest.raises(ValueError):
        frame_signal(buffer_of(np.array([])))


def test_frame_signal_requires_pipeline_rate():
    with pytest.raises(ValueError, match="16000"):
        frame_signal(buffer_of(np.ones(100), fs=8000))


# ---------------------------------------------------------------------------
# autocorrelation
# ---------------------------------------------------------------------------

def test_acf_of_ones():
    np.testing.assert_allclose(
        autocorr(np.ones(4)).values, [1.0, 0.75, 0.5, 0.25], atol=1e-12
    )


def test_acf_of_zeros_is_zero():
    assert np.all(autocorr(np.zeros(16)).values == 0.0)


def test_acf_peak_of_200hz_cosine():
    frame = np.cos(2 * np.pi * 200 * np.arange(800) / FS)
    values = autocorr(frame).values
    assert 40 + np.argmax(values[40:321]) == 80


def test_fft_acf_matches_brute_force_small():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = rng.integers(1, 65)
        frame = rng.standard_normal(n)
        np.testing.assert_allclose(
            autocorr(frame).values, brute_force_acf(frame), atol=1e-12
        )


def test_fft_acf_matches_brute_force_full_frame():
    rng = np.random.default_rng(7)
    frame = rng.standard_normal(800)
    np.testing.assert_allclose(autocorr(frame).values, brute_force_acf(frame), atol=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=64))
def test_acf_peak_bound(values):
    acf = autocorr(np.array(values)).values
    assert np.all(np.abs(acf) <= acf[0] + 1e-9)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=64),
       st.floats(min_value=0.01, max_value=100.0))
def test_scale_equivariance(values, c):
    frame = np.array(values)
    scaled = autocorr(c * frame).values
    np.testing.assert_allclose(scaled, c * c * autocorr(frame).values,
                               rtol=1e-9, atol=1e-9)


def test_normalized_acf_is_scale_invariant():
    rng = np.random.default_rng(0)
    frame = rng.standard_normal(800)
    a = normalize_acf(autocorr(frame)).values
    b = normalize_acf(autocorr(3.7 * frame)).values
    np.testing.assert_allclose(a, b, atol=1e-9)


# ---------------------------------------------------------------------------
# normalization and silence
# ---------------------------------------------------------------------------

def test_normalize_sets_lag0_to_one():
    out = normalize_acf(Acf(np.array([0.5, 0.25])))
    np.testing.assert_allclose(out.values, [1.0, 0.5])
    assert not out.silent


def test_silence_flagged_not_raised():
    out = normalize_acf(Acf(np.zeros(8)))
    assert out.silent and np.all(out.values == 0.0)


def test_near_silent_energy_threshold():
    out = normalize_acf(Acf(np.array([1e-11, 0.0])))
    assert out.silent


# ---------------------------------------------------------------------------
# double autocorrelation
# ---------------------------------------------------------------------------

def test_double_acf_of_zero_is_zero():
    assert np.all(double_autocorr(Acf(np.zeros(10))).values == 0.0)


def test_double_acf_of_delta():
    n = 16
    delta = np.zeros(n)
    delta[0] = 1.0
    out = double_autocorr(Acf(delta)).values
    expected = np.zeros(n)
    expected[0] = 1.0 / n
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_double_acf_keeps_200hz_period():
    frame = np.cos(2 * np.pi * 200 * np.arange(800) / FS)
    r = autocorr(frame)
    rr = double_autocorr(r).values
    rr_direct = brute_force_acf(r.values)
    np.testing.assert_allclose(rr, rr_direct, atol=1e-9)
    assert abs(40 + np.argmax(rr[40:321]) - 80) <= 1


# ---------------------------------------------------------------------------
# period search
# ---------------------------------------------------------------------------

def test_find_t0_unique_max():
    values = np.zeros(400)
    values[80] = 1.0
    assert find_t0(Acf(values), 40, 320) == 80


def test_find_t0_tie_goes_to_smallest_lag():
    assert find_t0(Acf(np.ones(400)), 40, 320) == 40


def test_find_t0_invalid_range():
    with pytest.raises(ValueError):
        find_t0(Acf(np.zeros(100)), 50, 120)
    with pytest.raises(ValueError):
        find_t0(Acf(np.zeros(100)), 0, 50)


def test_find_t0_on_filtered_sawtooth():
    samples = sawtooth(110.0, seconds=0.5)
    filtered = apply_filter(design_band_filter(band_of_frequency(110.0)), samples)
    frame = filtered[3200:4000]
    rr = double_autocorr(normalize_acf(autocorr(frame)))
    t0 = find_t0(rr, 107, 160)
    # brute-force argmax over the range must agree; the triangular
    # zero-extension envelope drags the raw double-ACF argmax ~2 lags below
    # the true period lag fs/110 = 145.45 (the later refinement corrects it)
    direct = 107 + int(np.argmax(rr.values[107:161]))
    assert t0 == direct
    assert t0 in (143, 144)


# ---------------------------------------------------------------------------
# peak refinement
# ---------------------------------------------------------------------------

def _acf_with_peak(k, left, mid, right, n=200):
    values = np.linspace(1.0, 0.0, n) * 0.1
    values[k - 1], values[k], values[k + 1] = left, mid, right
    return Acf(values)


def test_refine_symmetric_parabola():
    refined, found = refine_peak(_acf_with_peak(80, 0.8, 1.0, 0.8), 80, 40, 120)
    assert found and refined == 80.0


def test_refine_asymmetric_parabola_vertex():
    refined, found = refine_peak(_acf_with_peak(80, 0.7, 1.0, 0.9), 80, 40, 120)
    assert found
    assert refined == pytest.approx(80.25, abs=1e-12)


def test_refine_vertex_offset_never_exceeds_half_sample():
    # for any genuine local max (a <= b >= c) the parabola vertex stays
    # within +-0.5 of the sample, so the guard only fires on degenerate data
    rng = np.random.default_rng(5)
    for _ in range(200):
        b = rng.uniform(0.5, 1.0)
        a, c = rng.uniform(0.0, b, 2)
        values = -np.linspace(0.0, 1.0, 200)
        values[79:82] = [a, b, c]
        refined, found = refine_peak(Acf(values), 80, 40, 120)
        assert found and abs(refined - 80) <= 0.5


def test_refine_collinear_returns_k():
    values = -np.linspace(0.0, 1.0, 200)
    values[79:82] = [0.5, 0.5, 0.5]  # flat top: parabola degenerates
    refined, found = refine_peak(Acf(values), 80, 40, 120)
    assert found and refined == 80.0  # t0 itself sits on the plateau


def test_refine_no_peak_falls_back_to_t0():
    values = np.linspace(1.0, 0.0, 200)  # strictly decreasing: no local max inside
    refined, found = refine_peak(Acf(values), 100, 60, 140)
    assert not found and refined == 100.0


def test_refine_nearest_peak_prefers_smaller_lag_on_tie():
    values = -np.linspace(0.0, 1.0, 200)  # no spurious flat-plateau peaks
    values[70] = 1.0  # peaks equidistant from t0 = 80
    values[90] = 1.0
    refined, _ = refine_peak(Acf(values), 80, 40, 120)
    assert abs(refined - 70) <= 0.5


def test_refine_recovers_220_5_hz_period():
    frame = tone(220.5, seconds=0.05)
    r = flatten_envelope(normalize_acf(autocorr(frame)))
    lag_min, lag_max = band_lag_range(band_of_frequency(220.5), FS)
    t0 = find_t0(double_autocorr(r), lag_min, lag_max)
    refined, found = refine_peak(r, t0, lag_min, lag_max)
    assert found
    assert refined == pytest.approx(16000 / 220.5, abs=0.2)


# ---------------------------------------------------------------------------
# full period estimation
# ---------------------------------------------------------------------------

def test_estimate_period_recovery_within_a_third_of_a_sample():
    # tapered estimator: pure tones anywhere in range, any phase
    rng = np.random.default_rng(20240817)
    for f in np.linspace(55.0, 790.0, 30):
        lag_min, lag_max = band_lag_range(band_of_frequency(float(f)), FS)
        for phase in rng.uniform(0, 2 * np.pi, 4):
            frame = tone(f, seconds=0.05, phase=phase)
            refined, _, found = estimate_period(frame, lag_min, lag_max)
            assert found
            assert abs(refined - FS / f) <= 0.3, f"{f} Hz phase {phase}"


@pytest.mark.xfail(
    strict=True,
    reason="rectangular zero-extension leaks an additive lag ripple of relative "
    "size ~1/(2N sin w) whose phase tracks the frame phase; it displaces the "
    "analytic ACF peak by up to ~5 samples at 55-80 Hz, so the raw "
    "refine_peak(find_t0(...)) composition cannot reach +-0.3 samples",
)
def test_raw_composition_period_recovery():
    rng = np.random.default_rng(3)
    for f in np.linspace(55.0, 120.0, 12):
        lag_min, lag_max = band_lag_range(band_of_frequency(float(f)), FS)
        for phase in rng.uniform(0, 2 * np.pi, 6):
            frame = tone(f, seconds=0.05, phase=phase)
            r = normalize_acf(autocorr(frame))
            t0 = find_t0(double_autocorr(r), lag_min, lag_max)
            refined, _ = refine_peak(r, t0, lag_min, lag_max)
            assert abs(refined - FS / f) <= 0.3


@pytest.mark.xfail(
    strict=True,
    reason="the zero-extended ACF boundary term C*sin(w(N-tau)) depends on the "
    "frame phase, so normalized ACFs of shifted frames differ by "
    "~1/(2N sin w) (2e-2 at 200 Hz), far above 1e-6; only a circular ACF "
    "would be exactly shift-invariant",
)
def test_shift_invariance_of_normalized_acf_tight():
    base = np.cos(2 * np.pi * 200 * np.arange(1000) / FS)  # integer period 80
    ref = normalize_acf(autocorr(base[:800])).values
    for shift in (1, 7, 40, 79):
        shifted = normalize_acf(autocorr(base[shift:shift + 800])).values
        np.testing.assert_allclose(shifted, ref, atol=1e-6)


def test_shift_invariance_achievable_bound():
    # the same comparison holds at the ripple-limited level
    base = np.cos(2 * np.pi * 200 * np.arange(1000) / FS)
    ref = normalize_acf(autocorr(base[:800])).values
    for shift in (1, 7, 40, 79):
        shifted = normalize_acf(autocorr(base[shift:shift + 800])).values
        assert np.max(np.abs(shifted - ref)) < 0.05


def test_flatten_envelope_undoes_triangular_decay():
    # the ACF of ones is exactly the envelope: flattening returns all ones
    flat = flatten_envelope(autocorr(np.ones(64)))
    np.testing.assert_allclose(flat.values, np.ones(64), atol=1e-12)


def test_num_frames_ceiling():
    assert num_frames(1600, 160) == 10
    assert num_frames(1601, 160) == 11
    assert num_frames(1, 160) == 1
