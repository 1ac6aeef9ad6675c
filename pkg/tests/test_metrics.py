import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocodekit.audio_io import Waveform
from vocodekit.errors import ShapeError, ValidationError
from vocodekit.metrics import (
    CSV_COLUMNS,
    EmbeddingStats,
    MetricReport,
    dtw_align,
    embedding_stats,
    evaluate_pair,
    frame_distances,
    frechet_distance,
    length_consistency,
    m_stft_loss,
    mcd,
    mel_cepstrum,
    pcc_mel,
    periodicity_error,
    pitch_track,
    ssim_mel,
    summarize,
    write_summary_csv,
)
from vocodekit.metrics.spectral_metrics import gaussian_window

from conftest import SR, noise, tone
from oracles import dtw_brute, dtw_paths


# --- DTW ----------------------------------------------------------------------

def test_dtw_identical_is_diagonal():
    a = np.random.default_rng(0).standard_normal((6, 3))
    al = dtw_align(a, a)
    assert al.cost == 0.0
    assert al.path.tolist() == [[i, i] for i in range(6)]


def test_dtw_repeated_frame():
    al = dtw_align([1.0], [1.0, 1.0, 1.0])
    assert al.cost == 0.0
    assert al.path[:, 1].tolist() == [0, 1, 2]


def test_dtw_all_sizes_up_to_8_match_enumeration():
    rng = np.random.default_rng(1)
    for n, m in itertools.product(range(1, 9), repeat=2):
        cost = rng.uniform(0, 1, (n, m))
        got = dtw_align(np.zeros((n, 1)), np.zeros((m, 1)), cost=cost).cost
        assert np.isclose(got, dtw_brute(cost), rtol=0, atol=1e-12)


def test_dtw_path_valid_and_cost_consistent():
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal((6, 2)), rng.standard_normal((7, 2))
    al = dtw_align(a, b)
    steps = np.diff(al.path, axis=0)
    assert al.path[0].tolist() == [0, 0] and al.path[-1].tolist() == [5, 6]
    assert all(tuple(s) in {(1, 1), (1, 0), (0, 1)} for s in steps)
    assert np.isclose(al.pair_costs.sum(), al.cost)
    assert np.isclose(al.cost, dtw_brute(frame_distances(a, b)))
    assert np.isclose(dtw_align(b, a).cost, al.cost)
    with pytest.raises(ValidationError):
        dtw_align([], [1.0])


# --- MCD ----------------------------------------------------------------------

def test_mcd_identity_and_symmetry(cfg):
    a, b = noise(0.5, seed=1), noise(0.5, seed=2)
    assert mcd(a, a, cfg) == 0.0
    assert np.isclose(mcd(a, b, cfg), mcd(b, a, cfg))
    assert mel_cepstrum(a, cfg).shape[1] == 13


def test_mcd_toy_sequence_oracle(cfg):
    # three-frame audio: check against the enumeration of every alignment path
    a = noise(2 * 256 / SR, seed=5)
    b = noise(2 * 256 / SR, seed=6)
    ca, cb = mel_cepstrum(a, cfg), mel_cepstrum(b, cfg)
    assert ca.shape[0] == 3
    dist = np.sqrt(((ca[:, None] - cb[None]) ** 2).sum(-1))
    paths = list(dtw_paths(3, 3))
    best = min(paths, key=lambda p: sum(dist[i, j] for i, j in p))
    expected = 10 / np.log(10) * np.sqrt(2) * np.mean([dist[i, j] for i, j in best])
    assert np.isclose(mcd(a, b, cfg), expected)


# --- M-STFT -------------------------------------------------------------------

def test_m_stft_examples(cfg):
    x = tone(440.0, 0.5)
    assert m_stft_loss(x, x, cfg.resolutions) == 0.0
    silent = Waveform(np.zeros(len(x)), SR)
    value = m_stft_loss(x, silent, [[1024, 256, 1024]])
    # convergence term is exactly 1; the rest is the log-magnitude gap
    from vocodekit.spectral import StftPlan, stft, LOG_FLOOR
    mag = stft(x, StftPlan(1024, 256, 1024)).values
    log_gap = np.mean(np.abs(np.log(np.maximum(mag, LOG_FLOOR)) - np.log(LOG_FLOOR)))
    assert np.isclose(value, 1.0 + log_gap)
    with pytest.raises(ValidationError):
        m_stft_loss(silent, x)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(3000, 9000))
def test_m_stft_nonnegative_and_trims(seed, n):
    rng = np.random.default_rng(seed)
    a = Waveform(rng.standard_normal(n), SR)
    b = Waveform(rng.standard_normal(n + 100), SR)
    assert m_stft_loss(a, b) >= 0
    assert m_stft_loss(a, b) == m_stft_loss(a, Waveform(b.samples[:n], SR))


# --- SSIM / PCC ---------------------------------------------------------------

def _ssim_direct(a, b):
    """Per-window SSIM with explicit weighted sums, window 11, sigma 1.5."""
    lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
    a, b = (a - lo) / (hi - lo), (b - lo) / (hi - lo)
    t = np.arange(11) - 5
    g = np.exp(-t**2 / (2 * 1.5**2))
    win = np.outer(g, g) / np.outer(g, g).sum()
    c1, c2 = 0.01**2, 0.03**2
    vals = []
    for r in range(a.shape[0] - 10):
        for c in range(a.shape[1] - 10):
            pa, pb = a[r:r + 11, c:c + 11], b[r:r + 11, c:c + 11]
            ma, mb = (win * pa).sum(), (win * pb).sum()
            va = (win * (pa - ma) ** 2).sum()
            vb = (win * (pb - mb) ** 2).sum()
            cov = (win * (pa - ma) * (pb - mb)).sum()
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return np.mean(vals)


def test_ssim_direct_oracle_12x12():
    rng = np.random.default_rng(0)
    for _ in range(5):
        a = rng.standard_normal((12, 12))
        b = a + 0.5 * rng.standard_normal((12, 12))
        assert abs(ssim_mel(a, b) - _ssim_direct(a, b)) < 1e-9


def test_ssim_identities():
    a = np.random.default_rng(1).standard_normal((20, 30))
    assert ssim_mel(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim_mel(a, -a + 3.0) < 1.0
    assert ssim_mel(np.ones((12, 12)), np.ones((12, 12))) == 1.0
    b = a + np.random.default_rng(2).standard_normal((20, 30))
    assert ssim_mel(a, b) == pytest.approx(ssim_mel(b, a), abs=1e-12)
    assert np.isclose(gaussian_window().sum(), 1.0)
    # small matrices fall back to the largest odd window that fits
    assert -1 <= ssim_mel(a[:5, :7], b[:5, :7]) <= 1
    with pytest.raises(ShapeError):
        ssim_mel(np.ones((3, 4)), np.ones((4, 4)))


def test_pcc():
    a = np.random.default_rng(3).standard_normal((8, 9))
    assert pcc_mel(a, a) == 1.0
    assert pcc_mel(a, 2 * a + 3) == 1.0
    assert pcc_mel(a, -a) == -1.0
    with pytest.raises(ValidationError):
        pcc_mel(a, np.ones_like(a))


@settings(max_examples=50)
@given(st.integers(0, 10**6), st.floats(0.01, 100), st.floats(-100, 100))
def test_pcc_positive_affine_invariance(seed, scale, offset):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, 6, 7))
    assert pcc_mel(a, scale * b + offset) == pytest.approx(pcc_mel(a, b), abs=1e-12)
    assert pcc_mel(a, b) == pytest.approx(pcc_mel(b, a), abs=1e-15)


# --- periodicity --------------------------------------------------------------

@pytest.mark.parametrize("f0", [110.0, 220.0, 523.25])
def test_pitch_recovers_tone(f0):
    track = pitch_track(tone(f0, 1.0))
    assert track.voiced.mean() > 0.9
    assert abs(np.median(track.f0[track.voiced]) / f0 - 1) < 0.01
    assert track.hop == 240


def test_periodicity_examples():
    t, n = tone(220.0, 1.0), noise(1.0, amp=0.5, seed=3)
    assert periodicity_error(t, t) == 0.0
    assert periodicity_error(t, n) > 0.5
    silent = Waveform(np.zeros(SR), SR)
    assert periodicity_error(silent, silent) == 0.0
    with pytest.raises(ValidationError):
        pitch_track(Waveform(np.zeros(100), SR))


# --- Fréchet ------------------------------------------------------------------

def _stats(mu, var):
    return EmbeddingStats(np.atleast_1d(mu), np.atleast_2d(var), 10)


def test_frechet_closed_forms():
    assert frechet_distance(_stats(0.0, 1.0), _stats(1.0, 1.0)) == 1.0
    assert frechet_distance(_stats(0.0, 1.0), _stats(0.0, 4.0)) == 1.0
    s = _stats([0.0, 1.0], [[2.0, 0.5], [0.5, 1.0]])
    assert frechet_distance(s, s) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 9), st.floats(0.01, 9))
def test_frechet_1d_closed_form(m1, m2, v1, v2):
    expected = (m1 - m2) ** 2 + (np.sqrt(v1) - np.sqrt(v2)) ** 2
    got = frechet_distance(_stats(m1, v1), _stats(m2, v2))
    assert abs(got - expected) <= 1e-9 * max(1.0, expected)


def test_frechet_matches_scipy_sqrtm_and_symmetric():
    from scipy.linalg import sqrtm
    rng = np.random.default_rng(4)
    e1, e2 = rng.standard_normal((50, 4)), rng.standard_normal((60, 4)) @ rng.standard_normal((4, 4))
    a, b = embedding_stats(e1), embedding_stats(e2)
    cross = np.real(sqrtm(a.covariance @ b.covariance))
    expected = (np.sum((a.mean - b.mean) ** 2) + np.trace(a.covariance) + np.trace(b.covariance)
                - 2 * np.trace(cross))
    assert frechet_distance(a, b) == pytest.approx(expected, rel=1e-9)
    assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), rel=1e-9)
    with pytest.raises(ShapeError):
        frechet_distance(a, embedding_stats(rng.standard_normal((5, 3))))


def test_frechet_rejects_non_psd():
    bad = EmbeddingStats(np.zeros(2), np.array([[1.0, 0.0], [0.0, -1.0]]), 5)
    with pytest.raises(ValidationError):
        frechet_distance(bad, bad)


def test_embedding_stats():
    s = embedding_stats([[0.0], [2.0]])
    assert s.mean.tolist() == [1.0] and s.covariance.tolist() == [[2.0]]
    same = embedding_stats([[1.0, 2.0], [1.0, 2.0]])
    assert not same.covariance.any()
    rows = np.random.default_rng(5).standard_normal((9, 3))
    shuffled = embedding_stats(rows[::-1])
    assert np.allclose(shuffled.covariance, embedding_stats(rows).covariance)
    with pytest.raises(ValidationError):
        embedding_stats([[1.0, 2.0]])


# --- length audit and report --------------------------------------------------

def test_length_consistency():
    r = length_consistency(16717, 4_279_552, 256)
    assert r.expected_samples == 4_279_552 and r.diff_samples == 0 and r.passed
    assert not length_consistency(16717, 2 * 4_279_552, 256).passed
    assert length_consistency(10, 2560 + 256, 256).passed
    assert not length_consistency(10, 2560 + 257, 256).passed
    assert length_consistency(100, 25600 - 256, 256).diff_seconds == -256 / 24000
    with pytest.raises(ValidationError):
        length_consistency(0, 10, 256)


def test_report_identity_and_csv(cfg, tmp_path):
    x = Waveform(tone(220.0, 1.0).samples + noise(1.0, amp=0.01).samples, SR)
    r = evaluate_pair(x, x, cfg, fad=0.0)
    assert (r.mcd, r.m_stft, r.ssim, r.pcc, r.periodicity, r.fad) == (0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
    assert r.in_range() and r.provenance["config_hash"] == cfg.fingerprint()
    summary = summarize([r, r])
    write_summary_csv(tmp_path / "s.csv", summary)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines[1].split(",")) == 6
    with pytest.raises(ValidationError):
        MetricReport(0, 0, 1, 1, 0)


def test_metric_symmetry(cfg):
    a = Waveform(tone(220.0, 0.5).samples + noise(0.5, amp=0.05, seed=1).samples, SR)
    b = Waveform(tone(220.0, 0.5).samples + noise(0.5, amp=0.05, seed=2).samples, SR)
    ab, ba = evaluate_pair(a, b, cfg), evaluate_pair(b, a, cfg)
    assert ab.ssim == pytest.approx(ba.ssim, abs=1e-12)
    assert ab.pcc == pytest.approx(ba.pcc, abs=1e-12)
    assert ab.mcd == pytest.approx(ba.mcd, rel=1e-9)
