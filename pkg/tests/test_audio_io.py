import json
import struct
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.io import wavfile

from vocodekit.audio_io import (
    Waveform,
    check_rate,
    config_from_dict,
    default_config,
    load_config,
    normalize_peak,
    quantize_pcm16,
    read_wav,
    write_wav,
)
from vocodekit.errors import (
    ConfigError,
    MultichannelError,
    SampleRateMismatchError,
    TruncatedFileError,
    UnsupportedEncodingError,
    ValidationError,
)

finite = st.floats(-1.0, 1.0, allow_nan=False, width=32)


def _pcm16_file(path, values, sr=24000):
    wavfile.write(path, sr, np.asarray(values, dtype=np.int16))


def test_pcm16_decodes_by_32768(tmp_path):
    p = tmp_path / "a.wav"
    _pcm16_file(p, [16384, -32768])
    w = read_wav(p)
    assert w.samples.tolist() == [0.5, -1.0]
    assert w.sample_rate == 24000


def test_pcm16_zeros(tmp_path):
    p = tmp_path / "z.wav"
    _pcm16_file(p, np.zeros(10))
    assert np.array_equal(read_wav(p).samples, np.zeros(10))


def test_float32_passthrough(tmp_path):
    p = tmp_path / "f.wav"
    wavfile.write(p, 24000, np.array([0.25], dtype=np.float32))
    w = read_wav(p)
    assert w.samples.tolist() == [0.25] and w.sample_rate == 24000


def test_reader_matches_scipy_on_random_pcm(tmp_path):
    rng = np.random.default_rng(3)
    data = rng.integers(-32768, 32768, 5000).astype(np.int16)
    p = tmp_path / "r.wav"
    wavfile.write(p, 16000, data)
    sr, ref = wavfile.read(p)
    w = read_wav(p)
    assert w.sample_rate == sr
    assert np.array_equal(w.samples, ref / 32768.0)


def test_writer_output_readable_by_scipy(tmp_path):
    w = Waveform(np.linspace(-1, 1, 101), 22050)
    p = tmp_path / "o.wav"
    write_wav(w, p, "pcm16")
    sr, data = wavfile.read(p)
    assert sr == 22050 and data.dtype == np.int16
    assert np.array_equal(data, quantize_pcm16(w.samples))


def test_pcm16_quantizer_values(tmp_path):
    p = tmp_path / "q.wav"
    write_wav(Waveform([1.0, 0.0], 24000), p, "pcm16")
    _, data = wavfile.read(p)
    assert data.tolist() == [32767, 0]


def test_pcm16_clips_with_warning(tmp_path):
    with pytest.warns(UserWarning):
        write_wav(Waveform([1.5, -2.0], 24000), tmp_path / "c.wav", "pcm16")
    assert read_wav(tmp_path / "c.wav").samples.tolist() == [32767 / 32768, -1.0]


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=1, max_size=200))
def test_float32_round_trip_exact(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    w = Waveform(np.asarray(values, dtype=np.float32), 24000)
    write_wav(w, p)
    assert np.array_equal(read_wav(p).samples, w.samples)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=200))
def test_pcm16_round_trip_error(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    w = Waveform(values, 24000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        write_wav(w, p, "pcm16")
    err = np.abs(read_wav(p).samples - w.samples)
    assert err.max() <= 1 / 32768 + 1e-15


def test_stereo_rejected(tmp_path):
    p = tmp_path / "s.wav"
    wavfile.write(p, 24000, np.zeros((10, 2), dtype=np.int16))
    with pytest.raises(MultichannelError):
        read_wav(p)


def test_24bit_rejected(tmp_path):
    p = tmp_path / "p24.wav"
    data = b"\x00\x00\x00" * 4
    fmt = struct.pack("<HHIIHH", 1, 1, 24000, 72000, 3, 24)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", len(data)) + data
    p.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(UnsupportedEncodingError):
        read_wav(p)


def test_truncated_rejected(tmp_path):
    p = tmp_path / "t.wav"
    _pcm16_file(p, np.arange(100))
    p.write_bytes(p.read_bytes()[:-50])
    with pytest.raises(TruncatedFileError):
        read_wav(p)


def test_waveform_rejects_nonfinite():
    with pytest.raises(ValidationError):
        Waveform([0.0, np.nan], 24000)
    with pytest.raises(ValidationError):
        Waveform([0.0], 0)


def test_normalize_examples():
    assert normalize_peak(Waveform([0.5, -0.25], 24000)).samples.tolist() == [0.95, -0.475]
    assert normalize_peak(Waveform([0, 0, 0], 24000)).samples.tolist() == [0, 0, 0]
    assert normalize_peak(Waveform([0.95], 24000)).samples.tolist() == [0.95]
    with pytest.raises(ValidationError):
        normalize_peak(Waveform([], 24000))


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=100))
def test_normalize_idempotent(values):
    w = Waveform(values, 24000)
    once = normalize_peak(w)
    assert np.array_equal(normalize_peak(once).samples, once.samples)
    if np.any(w.samples != 0):
        assert np.isclose(np.abs(once.samples).max(), 0.95, rtol=0, atol=1e-15)


def test_default_config_values(cfg):
    assert (cfg.num_mels, cfg.n_fft, cfg.hop_size, cfg.sampling_rate, cfg.fmax) == (80, 1024, 256, 24000, 12000)
    assert cfg.upsample_rates == (8, 8, 2, 2)
    assert cfg.resolutions == ((1024, 120, 600), (2048, 240, 1200), (512, 50, 240))


def _raw(cfg, **changes):
    raw = cfg.to_dict()
    raw.update(changes)
    return raw


def test_config_rejects_bad_upsample_product(cfg):
    with pytest.raises(ConfigError):
        config_from_dict(_raw(cfg, upsample_rates=[8, 8, 2], upsample_kernel_sizes=[16, 16, 4]))


@pytest.mark.parametrize("changes", [
    {"win_size": 2048},
    {"fmax": 13000},
    {"fmin": 12000},
    {"resblock_kernel_sizes": [3, 7]},
    {"activation": "gelu"},
    {"use_spectral_norm": True},
    {"upsample_initial_channel": 8},
])
def test_config_invariants(cfg, changes):
    with pytest.raises(ConfigError):
        config_from_dict(_raw(cfg, **changes))


def test_config_missing_key(cfg):
    raw = _raw(cfg)
    del raw["hop_size"]
    with pytest.raises(ConfigError, match="hop_size"):
        config_from_dict(raw)


def test_unknown_keys_warn_and_known_training_keys_do_not(cfg, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(_raw(cfg, mystery=1)))
    with pytest.warns(UserWarning, match="mystery"):
        load_config(p)
    p.write_text(json.dumps(_raw(cfg, batch_size=4)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert load_config(p) == cfg


def test_config_fingerprint_stable(cfg):
    assert default_config().fingerprint() == cfg.fingerprint()
    other = config_from_dict(_raw(cfg, fmax=11000))
    assert other.fingerprint() != cfg.fingerprint()


def test_check_rate():
    check_rate(Waveform([0.0], 24000), 24000)
    with pytest.raises(SampleRateMismatchError):
        check_rate(Waveform([0.0], 22050), 24000)
