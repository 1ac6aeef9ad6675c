"""STFT, mel filterbank and log-spectrogram helpers.

Conventions (kept in one place so every consumer agrees):

* periodic Hann window of length ``win``, zero-padded to ``n_fft`` and centred
* ``center=True`` reflect-pads ``n_fft // 2`` samples on both sides
* log spectra use ``log(max(x, LOG_FLOOR))`` with the natural log
* triangular mel filters on the HTK mel scale, peak height 1 (no area normalization)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import VocoderConfig, Waveform, check_rate
from .errors import ValidationError

LOG_FLOOR = 1e-5


@dataclass(frozen=True)
class StftPlan:
    n_fft: int
    hop: int
    win: int
    center: bool = True

    def __post_init__(self):
        if not (0 < self.hop <= self.win <= self.n_fft):
            raise ValidationError(
                f"invalid STFT plan: need 0 < hop <= win <= n_fft, got "
                f"n_fft={self.n_fft} hop={self.hop} win={self.win}"
            )

    @classmethod
    def from_triple(cls, triple) -> "StftPlan":
        if len(triple) != 3:
            raise ValidationError(f"resolution must be [n_fft, hop, win], got {triple!r}")
        n_fft, hop, win = (int(v) for v in triple)
        return cls(n_fft, hop, win)

    @property
    def bins(self) -> int:
        return self.n_fft // 2 + 1

    def num_frames(self, length: int) -> int:
        if self.center:
            length = length + 2 * (self.n_fft // 2)
        return 1 + (length - self.n_fft) // self.hop

    def window(self) -> np.ndarray:
        n = np.arange(self.win)
        hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.win)
        out = np.zeros(self.n_fft)
        left = (self.n_fft - self.win) // 2
        out[left:left + self.win] = hann
        return out


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """``values`` is bins x frames; ``kind`` is ``"linear"`` or ``"log"``."""

    values: np.ndarray
    kind: str = "linear"

    def __post_init__(self):
        if self.kind not in ("linear", "log"):
            raise ValidationError(f"unknown spectrogram kind {self.kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("spectrogram entries must be finite")
        if self.kind == "linear" and np.any(self.values < 0):
            raise ValidationError("linear magnitudes must be nonnegative")

    @property
    def bins(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    """Log-mel matrix, mels x frames."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or not np.all(np.isfinite(self.values)):
            raise ValidationError("mel spectrogram must be a finite 2-D matrix")

    @property
    def mels(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]


def _samples(w) -> np.ndarray:
    x = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] == 0:
        raise ValidationError("STFT needs a nonempty 1-D signal")
    return x


def frame_signal(w, plan: StftPlan) -> np.ndarray:
    """Windowed frames, shape (frames, n_fft)."""
    x = _samples(w)
    if plan.center:
        x = np.pad(x, plan.n_fft // 2, mode="reflect")
    if x.shape[0] < plan.n_fft:
        raise ValidationError(
            f"signal of {len(_samples(w))} samples is shorter than n_fft={plan.n_fft}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, plan.n_fft)[:: plan.hop]
    return frames * plan.window()


def stft_complex(w, plan: StftPlan) -> np.ndarray:
    """One-sided complex STFT, shape (bins, frames)."""
    return np.fft.rfft(frame_signal(w, plan), axis=-1).T


def stft(w, plan: StftPlan) -> Spectrogram:
    """Linear-magnitude STFT; with centring, frames = len // hop + 1 for even ``n_fft``."""
    return Spectrogram(np.abs(stft_complex(w, plan)), "linear")


def log_magnitude(spec: Spectrogram) -> Spectrogram:
    if spec.kind == "log":
        return spec
    return Spectrogram(np.log(np.maximum(spec.values, LOG_FLOOR)), "log")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: VocoderConfig) -> np.ndarray:
    """Triangular mel filters, shape (num_mels, n_fft // 2 + 1)."""
    return _filterbank(cfg.num_mels, cfg.n_fft, cfg.sampling_rate, cfg.fmin, cfg.fmax)


def _filterbank(n_mels: int, n_fft: int, sr: int, fmin: float, fmax: float) -> np.ndarray:
    if fmax > sr / 2:
        raise ValidationError(f"fmax={fmax} exceeds Nyquist {sr / 2}")
    if not 0 <= fmin < fmax:
        raise ValidationError("need 0 <= fmin < fmax")
    bin_freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bin_freqs - lower) / (center - lower)
    falling = (upper - bin_freqs) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_spectrogram(w: Waveform, cfg: VocoderConfig, basis: np.ndarray | None = None) -> MelSpectrogram:
    check_rate(w, cfg.sampling_rate)
    if basis is None:
        basis = mel_filterbank(cfg)
    mag = stft(w, StftPlan(cfg.n_fft, cfg.hop_size, cfg.win_size)).values
    return MelSpectrogram(np.log(np.maximum(basis @ mag, LOG_FLOOR)))


def multi_resolution_spectrograms(w, resolutions) -> list[Spectrogram]:
    """One log-magnitude spectrogram per ``[n_fft, hop, win]`` triple, in order."""
    resolutions = list(resolutions)
    if not resolutions:
        raise ValidationError("resolution list is empty")
    plans = [StftPlan.from_triple(r) for r in resolutions]
    return [log_magnitude(stft(w, p)) for p in plans]
