"""Exact dynamic time warping and mel-cepstral distortion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.spatial.distance import cdist

from ..audio_io import VocoderConfig, Waveform
from ..errors import ValidationError
from ..spectral import mel_spectrogram

MCD_COEFFS = 13
MCD_SCALE = 10.0 / math.log(10.0) * math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Alignment:
    """Warping path as (i, j) index pairs plus the summed frame cost along it."""

    path: np.ndarray
    cost: float
    pair_costs: np.ndarray

    def __len__(self) -> int:
        return self.path.shape[0]


def _frames(seq) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValidationError("DTW needs a nonempty sequence of frames")
    return arr


def frame_distances(a, b) -> np.ndarray:
    """Euclidean distance between every frame of ``a`` and every frame of ``b``."""
    a, b = _frames(a), _frames(b)
    if a.shape[1] != b.shape[1]:
        raise ValidationError(f"frame dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return cdist(a, b, "euclidean")


def dtw_align(a, b, cost: np.ndarray | None = None) -> Alignment:
    """Minimum-cost monotone path from (0, 0) to (n-1, m-1).

    Steps are diagonal, down (i+1) and right (j+1), each adding the cost of the
    cell entered. The table is filled one anti-diagonal at a time, since every
    cell on diagonal s only depends on diagonals s-1 and s-2.
    """
    c = frame_distances(a, b) if cost is None else np.asarray(cost, dtype=np.float64)
    n, m = c.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for s in range(2, n + m + 1):
        i = np.arange(max(1, s - m), min(n, s - 1) + 1)
        j = s - i
        best = np.minimum(np.minimum(acc[i - 1, j - 1], acc[i - 1, j]), acc[i, j - 1])
        acc[i, j] = c[i - 1, j - 1] + best

    path = [(n - 1, m - 1)]
    i, j = n, m
    while (i, j) != (1, 1):
        # prefer the diagonal on ties so equal sequences give the diagonal path
        options = ((acc[i - 1, j - 1], i - 1, j - 1), (acc[i - 1, j], i - 1, j),
                   (acc[i, j - 1], i, j - 1))
        _, i, j = min(options, key=lambda o: o[0])
        path.append((i - 1, j - 1))
    path_arr = np.array(path[::-1], dtype=np.int64)
    pair_costs = c[path_arr[:, 0], path_arr[:, 1]]
    return Alignment(path_arr, float(acc[n, m]), pair_costs)


def mel_cepstrum(w: Waveform, cfg: VocoderConfig, coeffs: int = MCD_COEFFS) -> np.ndarray:
    """Frames x coeffs cepstra: orthonormal DCT-II of each log-mel frame, c0 dropped."""
    logmel = mel_spectrogram(w, cfg).values
    if coeffs >= logmel.shape[0]:
        raise ValidationError(f"need fewer than {logmel.shape[0]} cepstral coefficients")
    return dct(logmel.T, type=2, norm="ortho", axis=1)[:, 1:coeffs + 1]


def mcd(ref: Waveform, gen: Waveform, cfg: VocoderConfig, coeffs: int = MCD_COEFFS) -> float:
    if len(ref) == 0 or len(gen) == 0:
        raise ValidationError("MCD needs nonempty audio")
    align = dtw_align(mel_cepstrum(ref, cfg, coeffs), mel_cepstrum(gen, cfg, coeffs))
    return float(MCD_SCALE * np.mean(align.pair_costs))
