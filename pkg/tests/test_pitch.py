"""Pitch tracking, voicing decisions, and glottal-cycle extraction."""

import numpy as np
import pytest

from sevscore.audio import AudioClip, CANONICAL_RATE
from sevscore.errors import AudioFormatError
from sevscore.pitch import (
    CycleSeries,
    estimate_pitch_track,
    extract_cycles,
    frame_autocorr_at_pitch,
    pitch_track_to_csv,
)
from sevscore import synth


def test_tone_mostly_voiced_with_correct_f0(tone_clip):
    track = estimate_pitch_track(tone_clip)
    frac = track.n_voiced / len(track.voiced)
    assert frac >= 0.95
    median_f0 = np.median(track.f0[track.voiced])
    assert 198.0 <= median_f0 <= 202.0


def test_noise_rarely_voiced(noise_clip):
    track = estimate_pitch_track(noise_clip)
    assert track.n_voiced / len(track.voiced) <= 0.20


def test_silence_never_voiced(silence_clip):
    track = estimate_pitch_track(silence_clip)
    assert track.n_voiced == 0


def test_track_times_monotone(tone_clip):
    track = estimate_pitch_track(tone_clip)
    assert np.all(np.diff(track.times) > 0)
    assert track.frame_hop == pytest.approx(0.010)


def test_gain_invariant_voicing(tone_clip):
    # voicing uses normalized autocorrelation, so scaling the signal
    # (within the silence gate) must not change decisions or f0
    quiet = AudioClip(tone_clip.samples * 0.1, tone_clip.sample_rate, "q")
    a = estimate_pitch_track(tone_clip)
    b = estimate_pitch_track(quiet)
    assert np.array_equal(a.voiced, b.voiced)
    np.testing.assert_allclose(
        a.f0[a.voiced], b.f0[b.voiced], rtol=0, atol=0
    )


def test_f0_bounds_validated(tone_clip):
    for f0_min, f0_max in [(40.0, 500.0), (75.0, 700.0), (300.0, 200.0)]:
        with pytest.raises(ValueError, match="f0_min"):
            estimate_pitch_track(tone_clip, f0_min=f0_min, f0_max=f0_max)


def test_short_clip_rejected():
    clip = AudioClip(np.zeros(100), CANONICAL_RATE)
    with pytest.raises(AudioFormatError, match="shorter than one analysis frame"):
        estimate_pitch_track(clip)


def test_impulse_train_periods():
    x = synth.impulse_train(1.0, 100.0)
    clip = AudioClip(x, CANONICAL_RATE, "pulses")
    track = estimate_pitch_track(clip)
    cycles = extract_cycles(clip, track)
    assert cycles.count > 50
    periods_ms = cycles.periods * 1000.0
    assert np.all(periods_ms >= 9.8)
    assert np.all(periods_ms <= 10.2)


def test_alternating_amplitudes_recovered():
    x = synth.impulse_train(1.0, 100.0, alternating=0.5)
    clip = AudioClip(x, CANONICAL_RATE, "alt")
    track = estimate_pitch_track(clip)
    cycles = extract_cycles(clip, track)
    amps = np.sort(np.unique(np.round(cycles.amplitudes, 6)))
    # only the two injected peak heights appear
    np.testing.assert_allclose(amps, [0.5, 1.0], atol=1e-6)
    # and they alternate
    diffs = np.abs(np.diff(cycles.amplitudes))
    assert np.all(diffs > 0.4)


def test_clean_pulse_voice_zero_perturbation():
    voice = synth.pulse_voice(2.0, 100.0, seed=1)
    clip = AudioClip(voice.samples, voice.rate, "clean")
    track = estimate_pitch_track(clip)
    cycles = extract_cycles(clip, track)
    # a perturbation-free voice yields identical periods and amplitudes
    assert cycles.count > 100
    assert np.ptp(cycles.periods) < 1.5 / CANONICAL_RATE
    assert np.ptp(cycles.amplitudes) < 1e-6


def test_octave_guard_drops_suspect_pairs():
    # remove one pulse from a clean train: the gap doubles one period,
    # the guard (ratio 1.3) must drop the pair straddling the gap
    x = synth.impulse_train(1.0, 100.0)
    k = np.flatnonzero(x > 0)
    x[k[40]] = 0.0
    clip = AudioClip(x, CANONICAL_RATE, "gap")
    track = estimate_pitch_track(clip)
    cycles = extract_cycles(clip, track)
    periods_ms = cycles.periods * 1000.0
    assert np.all(periods_ms <= 10.2)


def test_silence_gate_blocks_silent_anchors(silence_clip):
    # force a voiced frame over silence: no peak clears the gate,
    # so no cycles may be invented
    track = estimate_pitch_track(silence_clip)
    forced = type(track)(
        times=track.times,
        f0=np.full_like(track.f0, 100.0),
        voiced=np.ones_like(track.voiced),
        frame_hop=track.frame_hop,
    )
    cycles = extract_cycles(silence_clip, forced)
    assert cycles.count == 0


def test_cycle_series_count():
    cs = CycleSeries(periods=np.array([0.01, 0.01]), amplitudes=np.array([0.5, 0.5, 0.5]))
    assert cs.count == 2


def test_frame_autocorr_aligned_with_track(tone_clip):
    track = estimate_pitch_track(tone_clip)
    r = frame_autocorr_at_pitch(tone_clip, track)
    # full-length, NaN at unvoiced frames, near 1 where the tone is voiced
    assert len(r) == len(track.times)
    assert np.all(np.isnan(r[~track.voiced]))
    assert np.all(r[track.voiced] > 0.9)


def test_track_csv_export(tmp_path, tone_clip):
    track = estimate_pitch_track(tone_clip)
    path = tmp_path / "track.csv"
    pitch_track_to_csv(track, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "time,f0,voiced"
    assert len(lines) == len(track.times) + 1
    first = lines[1].split(",")
    assert first[2] in {"0", "1"}
