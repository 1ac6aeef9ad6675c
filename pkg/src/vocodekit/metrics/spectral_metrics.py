"""Spectrogram-domain comparisons: M-STFT, SSIM and PCC."""

from __future__ import annotations

import numpy as np

from ..audio_io import Waveform
from ..errors import ShapeError, ValidationError
from ..spectral import LOG_FLOOR, MelSpectrogram, StftPlan, stft

DEFAULT_RESOLUTIONS = ((1024, 120, 600), (2048, 240, 1200), (512, 50, 240))

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _trimmed(ref, gen):
    a = ref.samples if isinstance(ref, Waveform) else np.asarray(ref, dtype=np.float64)
    b = gen.samples if isinstance(gen, Waveform) else np.asarray(gen, dtype=np.float64)
    if isinstance(ref, Waveform) and isinstance(gen, Waveform) and ref.sample_rate != gen.sample_rate:
        raise ValidationError("sample rates differ")
    n = min(a.shape[0], b.shape[0])
    if n == 0:
        raise ValidationError("empty audio")
    return a[:n], b[:n]


def stft_distance(ref_mag: np.ndarray, gen_mag: np.ndarray) -> tuple[float, float]:
    """(spectral convergence, mean absolute log-magnitude difference)."""
    denom = np.linalg.norm(ref_mag)
    if denom == 0.0:
        raise ValidationError("reference spectrum is all zeros; spectral convergence undefined")
    sc = np.linalg.norm(ref_mag - gen_mag) / denom
    log_l1 = np.mean(np.abs(np.log(np.maximum(ref_mag, LOG_FLOOR))
                            - np.log(np.maximum(gen_mag, LOG_FLOOR))))
    return float(sc), float(log_l1)


def m_stft_loss(ref, gen, resolutions=DEFAULT_RESOLUTIONS) -> float:
    """Spectral convergence plus log-magnitude L1, averaged over resolutions."""
    a, b = _trimmed(ref, gen)
    resolutions = list(resolutions)
    if not resolutions:
        raise ValidationError("no resolutions given")
    total = 0.0
    for r in resolutions:
        plan = StftPlan.from_triple(r)
        sc, mag = stft_distance(stft(a, plan).values, stft(b, plan).values)
        total += sc + mag
    return total / len(resolutions)


def _matrices(ref, gen):
    a = ref.values if isinstance(ref, MelSpectrogram) else np.asarray(ref, dtype=np.float64)
    b = gen.values if isinstance(gen, MelSpectrogram) else np.asarray(gen, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"need matrices with equal row counts, got {a.shape} and {b.shape}")
    frames = min(a.shape[1], b.shape[1])
    return a[:, :frames], b[:, :frames]


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    t = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(t**2) / (2.0 * sigma**2))
    return g / g.sum()


def _blur(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable weighted mean over every fully-contained window."""
    k = g.shape[0]
    x = np.lib.stride_tricks.sliding_window_view(x, k, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(x, k, axis=1) @ g


def ssim_mel(ref, gen, window: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> float:
    """Mean local SSIM over jointly min-max normalized matrices.

    Windows never overhang the border. Matrices smaller than ``window`` in
    either direction use the largest odd window that fits.
    """
    a, b = _matrices(ref, gen)
    lo = min(a.min(), b.min())
    span = max(a.max(), b.max()) - lo
    if span > 0:
        a, b = (a - lo) / span, (b - lo) / span
    else:
        a, b = np.zeros_like(a), np.zeros_like(b)
    size = min(window, a.shape[0], a.shape[1])
    size -= 1 - size % 2
    g = gaussian_window(size, sigma)
    c1, c2 = SSIM_K1**2, SSIM_K2**2
    mu_a, mu_b = _blur(a, g), _blur(b, g)
    var_a = _blur(a * a, g) - mu_a**2
    var_b = _blur(b * b, g) - mu_b**2
    cov = _blur(a * b, g) - mu_a * mu_b
    ssim = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
    return float(np.mean(ssim))


def pcc_mel(ref, gen) -> float:
    """Pearson correlation of the flattened matrices.

    Sums run in extended precision (where the platform has it) so perfectly
    affine-related inputs give exactly +-1 after rounding back to float64.
    """
    a, b = _matrices(ref, gen)
    a = a.reshape(-1).astype(np.longdouble)
    b = b.reshape(-1).astype(np.longdouble)
    a = a - a.mean()
    b = b - b.mean()
    saa, sbb = a @ a, b @ b
    if saa == 0.0 or sbb == 0.0:
        raise ValidationError("PCC undefined: an input has zero variance")
    return float(np.clip((a @ b) / np.sqrt(saa * sbb), -1.0, 1.0))
