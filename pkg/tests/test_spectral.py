import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocodekit.audio_io import Waveform
from vocodekit.errors import SampleRateMismatchError, ValidationError
from vocodekit.spectral import (
    LOG_FLOOR,
    StftPlan,
    frame_signal,
    hz_to_mel,
    log_magnitude,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    multi_resolution_spectrograms,
    stft,
    stft_complex,
)

from conftest import SR, noise, tone


def test_bin_centered_tone_has_single_peak():
    plan = StftPlan(1024, 256, 1024)
    freq = 40 * SR / 1024
    mag = stft(tone(freq, 0.5), plan).values[:, 4:-4]
    assert np.all(mag.argmax(axis=0) == 40)
    # periodic Hann: only the two neighbours of the peak carry energy, 6 dB down;
    # everything further away is below the first sidelobe level
    peak = mag[40]
    far = np.delete(mag, [39, 40, 41], axis=0)
    assert np.all(20 * np.log10(far.max(axis=0) / peak) < -31.5)
    assert np.allclose(mag[39] / peak, 0.5, atol=1e-3)


def test_zero_signal_zero_magnitude():
    assert not stft(np.zeros(4000), StftPlan(512, 128, 512)).values.any()


def test_impulse_at_frame_center_is_flat():
    plan = StftPlan(512, 128, 512)
    x = np.zeros(2048)
    x[1024] = 1.0
    mag = stft(x, plan).values[:, 1024 // 128]
    # the impulse hits the window peak (value 1) of the centred frame
    assert np.allclose(mag, 1.0, atol=1e-12)


def test_frame_count_formula_random_lengths():
    rng = np.random.default_rng(0)
    plan = StftPlan(1024, 256, 1024)
    for length in rng.integers(600, 30000, 1000):
        assert plan.num_frames(int(length)) == length // 256 + 1
    for length in rng.integers(600, 5000, 20):
        assert stft(np.zeros(int(length)) + 0.1, plan).frames == length // 256 + 1


def test_stft_matches_numpy_framing_oracle():
    plan = StftPlan(512, 100, 400)
    x = noise(0.2).samples
    padded = np.pad(x, 256, mode="reflect")
    n = np.arange(400)
    win = np.zeros(512)
    win[56:456] = 0.5 - 0.5 * np.cos(2 * np.pi * n / 400)
    frames = [padded[i:i + 512] * win for i in range(0, len(padded) - 511, 100)]
    expected = np.abs(np.fft.fft(np.array(frames), axis=1)[:, :257]).T
    assert np.allclose(stft(x, plan).values, expected, atol=1e-10)


def test_parseval_per_frame():
    plan = StftPlan(1024, 256, 1024)
    x = noise(0.5)
    frames = frame_signal(x, plan)
    full = np.abs(np.fft.fft(frames, axis=1)) ** 2
    lhs = (frames**2).sum(axis=1)
    rhs = full.sum(axis=1) / plan.n_fft
    assert np.max(np.abs(lhs - rhs) / lhs) < 1e-6
    one_sided = np.abs(stft_complex(x, plan)) ** 2
    assert np.allclose(one_sided[0], full[:, 0])


def test_log_magnitude_floor():
    spec = log_magnitude(stft(np.zeros(3000), StftPlan(512, 128, 512)))
    assert np.all(spec.values == np.log(LOG_FLOOR))
    assert log_magnitude(spec) is spec


def test_mel_scale_inverse():
    f = np.linspace(0, 12000, 50)
    assert np.allclose(mel_to_hz(hz_to_mel(f)), f)
    assert np.isclose(hz_to_mel(700.0), 2595 * np.log10(2))


def test_filterbank_shape_and_triangles(cfg):
    fb = mel_filterbank(cfg)
    assert fb.shape == (80, 513)
    assert np.all(fb >= 0)
    freqs = np.arange(513) * cfg.sampling_rate / cfg.n_fft
    for row in fb:
        nz = np.flatnonzero(row)
        assert nz.size and np.all(np.diff(nz) == 1)
        assert freqs[nz[0]] >= cfg.fmin and freqs[nz[-1]] <= cfg.fmax
        assert row.max() <= 1.0
    coverage = fb.sum(axis=0)
    inner = (freqs > 100) & (freqs < cfg.fmax - 100)
    assert np.all(coverage[inner] > 0)


def test_mel_spectrogram_silence_and_determinism(cfg):
    w = Waveform(np.zeros(SR // 2), SR)
    mel = mel_spectrogram(w, cfg)
    assert mel.values.shape == (80, len(w) // 256 + 1)
    assert np.all(mel.values == np.log(LOG_FLOOR))
    x = noise(0.5)
    assert np.array_equal(mel_spectrogram(x, cfg).values, mel_spectrogram(x, cfg).values)


def test_mel_spectrogram_rate_checked(cfg):
    with pytest.raises(SampleRateMismatchError):
        mel_spectrogram(Waveform(np.zeros(2000), 22050), cfg)


def test_long_input_frame_relation(cfg):
    # 16717 frames of hop 256 is the logged length; frames = samples // hop + 1 with centring
    samples = 16717 * 256
    from vocodekit.spectral import StftPlan as P
    assert P(1024, 256, 1024).num_frames(samples) == 16718


def test_multi_resolution(cfg):
    specs = multi_resolution_spectrograms(noise(0.5), cfg.resolutions)
    assert [s.bins for s in specs] == [513, 1025, 257]
    assert all(s.kind == "log" for s in specs)
    assert len(multi_resolution_spectrograms(noise(0.5), [[512, 128, 512]])) == 1
    zero = multi_resolution_spectrograms(np.zeros(5000), cfg.resolutions)
    assert all(np.all(s.values == np.log(LOG_FLOOR)) for s in zero)
    with pytest.raises(ValidationError):
        multi_resolution_spectrograms(noise(0.1), [])


@pytest.mark.parametrize("triple", [(512, 0, 256), (512, 300, 256), (256, 64, 512)])
def test_bad_plans(triple):
    with pytest.raises(ValidationError):
        StftPlan(*triple)


@settings(max_examples=30, deadline=None)
@given(st.integers(600, 6000), st.sampled_from([64, 100, 128, 256]))
def test_frame_count_property(length, hop):
    plan = StftPlan(512, hop, 512)
    assert stft(np.ones(length), plan).frames == length // hop + 1
