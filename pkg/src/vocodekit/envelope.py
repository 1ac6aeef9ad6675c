"""Envelope extraction: analytic signal, Butterworth low-pass, five-mode envelope bank."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio_io import Waveform, check_rate
from .errors import ValidationError

DEFAULT_ORDER = 4


class EnvelopeMode(enum.IntEnum):
    LOWER = -1
    IDENTITY = 0
    UPPER = 1
    LPF_300 = 300
    LPF_500 = 500

    @classmethod
    def parse(cls, value) -> "EnvelopeMode":
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValidationError(
                f"invalid envelope mode {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


# order matters: discriminator branches are assembled in this order
MODES = tuple(EnvelopeMode)


@dataclass(frozen=True, eq=False)
class AnalyticSignal:
    real_part: np.ndarray
    imag_part: np.ndarray

    def __post_init__(self):
        if self.real_part.shape != self.imag_part.shape:
            raise ValidationError("real and imaginary parts differ in length")

    def amplitude(self) -> np.ndarray:
        return instantaneous_amplitude(self)


def _as_array(w) -> np.ndarray:
    return w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)


def analytic_signal(w) -> AnalyticSignal:
    """FFT construction: keep DC (and Nyquist for even N), double positive bins, zero the rest."""
    x = _as_array(w)
    n = x.shape[-1]
    if x.ndim != 1 or n < 2:
        raise ValidationError("analytic signal needs at least 2 samples")
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[1:n // 2] = 2.0
        gain[n // 2] = 1.0
    else:
        gain[1:(n + 1) // 2] = 2.0
    z = np.fft.ifft(np.fft.fft(x) * gain)
    return AnalyticSignal(x.copy(), z.imag)


def instantaneous_amplitude(a: AnalyticSignal) -> np.ndarray:
    return np.hypot(a.real_part, a.imag_part)


@dataclass(frozen=True, eq=False)
class ButterworthFilter:
    """Digital Butterworth low-pass as a cascade of second-order sections.

    ``sos`` rows are ``[b0, b1, b2, a0, a1, a2]`` (same layout as scipy).
    """

    order: int
    cutoff: float
    sample_rate: int
    sos: np.ndarray

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(row[3:]) for row in self.sos])

    def frequency_response(self, freqs) -> np.ndarray:
        """Complex response at ``freqs`` (Hz)."""
        zinv = np.exp(-2j * np.pi * np.asarray(freqs, dtype=np.float64) / self.sample_rate)
        h = np.ones_like(zinv)
        for b0, b1, b2, a0, a1, a2 in self.sos:
            h *= (b0 + b1 * zinv + b2 * zinv**2) / (a0 + a1 * zinv + a2 * zinv**2)
        return h


def butterworth_lowpass(order: int, cutoff: float, sr: int) -> ButterworthFilter:
    """Bilinear-transform design with the cutoff prewarped, so |H(cutoff)| = 1/sqrt(2)."""
    if order < 1:
        raise ValidationError("filter order must be >= 1")
    if not 0 < cutoff < sr / 2:
        raise ValidationError(f"cutoff {cutoff} Hz must lie in (0, {sr / 2}) Hz")
    fs2 = 2.0 * sr
    wc = fs2 * np.tan(np.pi * cutoff / sr)
    k = np.arange(order)
    analog = wc * np.exp(1j * np.pi * (2 * k + order + 1) / (2 * order))
    digital = (fs2 + analog) / (fs2 - analog)

    sections = []
    upper = digital[digital.imag > 1e-12]
    for p in sorted(upper, key=lambda p: abs(p)):
        b = np.array([1.0, 2.0, 1.0])
        a = np.array([1.0, -2.0 * p.real, abs(p) ** 2])
        sections.append(np.concatenate([b * a.sum() / b.sum(), a]))
    if order % 2:
        p = digital[np.argmin(np.abs(digital.imag))].real
        b = np.array([1.0, 1.0, 0.0])
        a = np.array([1.0, -p, 0.0])
        sections.append(np.concatenate([b * a.sum() / b.sum(), a]))
    filt = ButterworthFilter(int(order), float(cutoff), int(sr), np.array(sections))
    if np.any(np.abs(filt.poles()) >= 1.0):
        raise ValidationError("designed filter is unstable")
    return filt


def filter_apply(f: ButterworthFilter, w: Waveform) -> Waveform:
    """Causal forward filtering from zero initial state; length preserved."""
    check_rate(w, f.sample_rate)
    return w.with_samples(sps.sosfilt(f.sos, w.samples))


def extract_envelope(w: Waveform, mode, order: int = DEFAULT_ORDER) -> Waveform:
    """Envelope of ``w`` for one of the five modes.

    -1 and 1 give the negated and plain instantaneous amplitude, 0 returns the
    signal unchanged, 300 and 500 low-pass at that cutoff before taking the
    amplitude.
    """
    mode = EnvelopeMode.parse(mode)
    if len(w) < 2:
        raise ValidationError("envelope extraction needs at least 2 samples")
    if mode is EnvelopeMode.IDENTITY:
        return w
    if mode in (EnvelopeMode.LOWER, EnvelopeMode.UPPER):
        amp = instantaneous_amplitude(analytic_signal(w))
        return w.with_samples(amp if mode is EnvelopeMode.UPPER else -amp)
    filt = butterworth_lowpass(order, float(mode.value), w.sample_rate)
    smoothed = filter_apply(filt, w)
    return w.with_samples(instantaneous_amplitude(analytic_signal(smoothed)))
