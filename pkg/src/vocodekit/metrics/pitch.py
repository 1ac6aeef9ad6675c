"""YIN-style pitch and periodicity tracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio_io import Waveform
from ..errors import ValidationError

HOP_SECONDS = 0.010
FMIN = 50.0
FMAX = 1100.0
THRESHOLD = 0.1
# frames quieter than this (mean square) are unvoiced by definition
SILENCE = 1e-10


@dataclass(frozen=True, eq=False)
class PitchTrack:
    f0: np.ndarray
    periodicity: np.ndarray
    voiced: np.ndarray
    hop: int
    sample_rate: int


def _cmnd(frames: np.ndarray, width: int, max_lag: int) -> np.ndarray:
    """Cumulative-mean-normalized difference for lags 0..max_lag, per frame."""
    n_fft = 1 << int(np.ceil(np.log2(frames.shape[1] + width)))
    head = frames[:, :width]
    spec = np.fft.rfft(frames, n_fft) * np.conj(np.fft.rfft(head, n_fft))
    corr = np.fft.irfft(spec, n_fft)[:, :max_lag + 1]
    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    energy_shift = sq[:, lags + width] - sq[:, lags]
    diff = np.maximum(sq[:, width:width + 1] + energy_shift - 2.0 * corr, 0.0)
    out = np.ones_like(diff)
    running = np.cumsum(diff[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, 1:] = np.where(running > 0, diff[:, 1:] * lags[1:] / running, 1.0)
    return out


def pitch_track(w: Waveform, fmin: float = FMIN, fmax: float = FMAX,
                hop_seconds: float = HOP_SECONDS, threshold: float = THRESHOLD) -> PitchTrack:
    """Per-frame f0 (Hz, 0 when unvoiced) and periodicity in [0, 1].

    Periodicity is one minus the normalized difference at the chosen lag.
    """
    sr = w.sample_rate
    if not 0 < fmin < fmax <= sr / 2:
        raise ValidationError("need 0 < fmin < fmax <= Nyquist")
    max_lag = int(np.ceil(sr / fmin))
    min_lag = max(2, int(np.floor(sr / fmax)))
    width = max_lag
    frame_len = width + max_lag + 1
    hop = max(1, int(round(hop_seconds * sr)))
    x = w.samples
    if x.shape[0] < frame_len:
        raise ValidationError(f"audio of {x.shape[0]} samples is shorter than one analysis "
                              f"frame ({frame_len})")
    frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop]
    d = _cmnd(frames, width, max_lag)
    band = d[:, min_lag:max_lag]

    below = band < threshold
    first = np.where(below.any(axis=1), below.argmax(axis=1), band.argmin(axis=1))
    # walk down to the bottom of the dip that first crossed the threshold
    idx = first.copy()
    rows = np.arange(band.shape[0])
    for _ in range(band.shape[1]):
        nxt = np.minimum(idx + 1, band.shape[1] - 1)
        move = band[rows, nxt] < band[rows, idx]
        if not move.any():
            break
        idx = np.where(move, nxt, idx)

    lag = idx.astype(np.float64)
    inner = (idx > 0) & (idx < band.shape[1] - 1)
    l, c, r = (band[rows[inner], idx[inner] + o] for o in (-1, 0, 1))
    denom = l - 2.0 * c + r
    shift = np.where(np.abs(denom) > 1e-12, 0.5 * (l - r) / np.where(denom == 0, 1, denom), 0.0)
    lag[inner] += np.clip(shift, -0.5, 0.5)
    lag += min_lag

    periodicity = np.clip(1.0 - band[rows, idx], 0.0, 1.0)
    loud = np.mean(frames[:, :width] ** 2, axis=1) > SILENCE
    periodicity = np.where(loud, periodicity, 0.0)
    voiced = periodicity >= 1.0 - threshold
    f0 = np.where(voiced, sr / lag, 0.0)
    return PitchTrack(f0, periodicity, voiced, hop, sr)


def periodicity_error(ref: Waveform, gen: Waveform, **kwargs) -> float:
    """RMS periodicity difference over frames voiced in either signal (0 if none are)."""
    if ref.sample_rate != gen.sample_rate:
        raise ValidationError("sample rates differ")
    n = min(len(ref), len(gen))
    a = pitch_track(ref.with_samples(ref.samples[:n]), **kwargs)
    b = pitch_track(gen.with_samples(gen.samples[:n]), **kwargs)
    mask = a.voiced | b.voiced
    if not mask.any():
        return 0.0
    return float(np.sqrt(np.mean((a.periodicity[mask] - b.periodicity[mask]) ** 2)))
