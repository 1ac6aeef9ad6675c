"""Objective metrics between reference and generated audio."""

from .alignment import MCD_COEFFS, MCD_SCALE, Alignment, dtw_align, frame_distances, mcd, mel_cepstrum
from .frechet import EmbeddingStats, embedding_stats, frechet_distance, psd_sqrt
from .length import LengthReport, length_consistency
from .pitch import PitchTrack, periodicity_error, pitch_track
from .report import (
    CSV_COLUMNS,
    MetricReport,
    conventions_fingerprint,
    evaluate_pair,
    summarize,
    write_summary_csv,
)
from .spectral_metrics import DEFAULT_RESOLUTIONS, gaussian_window, m_stft_loss, pcc_mel, ssim_mel, stft_distance

__all__ = [
    "Alignment", "CSV_COLUMNS", "DEFAULT_RESOLUTIONS", "EmbeddingStats", "LengthReport",
    "MCD_COEFFS", "MCD_SCALE", "MetricReport", "PitchTrack", "conventions_fingerprint",
    "dtw_align", "embedding_stats", "evaluate_pair", "frame_distances", "frechet_distance",
    "gaussian_window", "length_consistency", "m_stft_loss", "mcd", "mel_cepstrum",
    "pcc_mel", "periodicity_error", "pitch_track", "psd_sqrt", "ssim_mel", "stft_distance",
    "summarize", "write_summary_csv",
]
