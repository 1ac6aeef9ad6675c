"""Per-pair metric reports and the CSV summary."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..audio_io import VocoderConfig, Waveform, check_rate
from ..errors import ValidationError
from ..spectral import mel_spectrogram
from . import alignment, pitch, spectral_metrics
from .alignment import mcd
from .pitch import periodicity_error
from .spectral_metrics import m_stft_loss, pcc_mel, ssim_mel

CSV_COLUMNS = ("FAD", "SSIM", "PCC", "MCD", "M-STFT", "Periodicity")

# every convention that changes absolute metric values; hashed into provenance
CONVENTIONS = {
    "mcd": {"cepstrum": "dct2-ortho(log-mel)", "coeffs": alignment.MCD_COEFFS, "c0": False,
            "dtw": "exact", "frame_cost": "euclidean"},
    "m_stft": {"reduce": "mean-over-resolutions", "terms": "sc+logmag-l1"},
    "ssim": {"window": spectral_metrics.SSIM_WINDOW, "sigma": spectral_metrics.SSIM_SIGMA,
             "k1": spectral_metrics.SSIM_K1, "k2": spectral_metrics.SSIM_K2,
             "norm": "joint-minmax", "border": "valid"},
    "periodicity": {"estimator": "yin", "hop_s": pitch.HOP_SECONDS, "fmin": pitch.FMIN,
                    "fmax": pitch.FMAX, "threshold": pitch.THRESHOLD},
    "fad": {"sqrt": "symmetric-eigh", "clip": "relative 1e-8"},
}


def conventions_fingerprint() -> str:
    blob = json.dumps(CONVENTIONS, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class MetricReport:
    mcd: float
    m_stft: float
    ssim: float
    pcc: float
    periodicity: float
    fad: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.provenance:
            raise ValidationError("a metric report needs provenance")

    def in_range(self) -> bool:
        ok = (self.mcd >= 0 and self.m_stft >= 0 and -1 <= self.ssim <= 1
              and -1 <= self.pcc <= 1 and 0 <= self.periodicity <= 1)
        return ok and (self.fad is None or self.fad >= 0)

    def row(self) -> dict:
        return {"FAD": self.fad, "SSIM": self.ssim, "PCC": self.pcc, "MCD": self.mcd,
                "M-STFT": self.m_stft, "Periodicity": self.periodicity}

    def to_dict(self) -> dict:
        return {"mcd": self.mcd, "m_stft": self.m_stft, "ssim": self.ssim, "pcc": self.pcc,
                "periodicity": self.periodicity, "fad": self.fad, "provenance": self.provenance}


def evaluate_pair(ref: Waveform, gen: Waveform, cfg: VocoderConfig, fad: float | None = None,
                  labels: dict | None = None) -> MetricReport:
    """All per-pair metrics; ``fad`` is a set-level number passed through, ``labels`` go
    into provenance."""
    check_rate(ref, cfg.sampling_rate)
    check_rate(gen, cfg.sampling_rate)
    n = min(len(ref), len(gen))
    ref_t = ref.with_samples(ref.samples[:n])
    gen_t = gen.with_samples(gen.samples[:n])
    mel_ref = mel_spectrogram(ref_t, cfg)
    mel_gen = mel_spectrogram(gen_t, cfg)
    provenance = {"config_hash": cfg.fingerprint(), "conventions": conventions_fingerprint(),
                  "samples_compared": n, **(labels or {})}
    return MetricReport(
        mcd=mcd(ref, gen, cfg),
        m_stft=m_stft_loss(ref_t, gen_t, cfg.resolutions),
        ssim=ssim_mel(mel_ref, mel_gen),
        pcc=pcc_mel(mel_ref, mel_gen),
        periodicity=periodicity_error(ref_t, gen_t),
        fad=fad,
        provenance=provenance,
    )


def summarize(reports) -> dict:
    """Column means over reports; FAD is a set-level number and is taken from the first."""
    reports = list(reports)
    if not reports:
        raise ValidationError("no reports to summarize")
    rows = [r.row() for r in reports]
    out = {}
    for col in CSV_COLUMNS:
        vals = [row[col] for row in rows if row[col] is not None]
        out[col] = (vals[0] if col == "FAD" else float(np.mean(vals))) if vals else None
    return out


def write_summary_csv(path, summary: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerow(["" if summary[c] is None else repr(float(summary[c])) for c in CSV_COLUMNS])
