"""LSGAN adversarial terms, mel L1, feature matching and the weighted totals.

Reductions follow the HiFi-GAN convention: adversarial terms are per-tensor
means, feature matching is a per-layer mean summed over layers. Totals sum
flatly over every sub-discriminator of every family that was run.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .audio_io import VocoderConfig, Waveform
from .errors import ShapeError, ValidationError
from .spectral import mel_spectrogram


@dataclass(frozen=True)
class LossWeights:
    lambda_fm: float = 2.0
    lambda_mel: float = 45.0

    def __post_init__(self):
        if self.lambda_fm < 0 or self.lambda_mel < 0:
            raise ValidationError("loss weights must be nonnegative")


@dataclass(frozen=True)
class LossBreakdown:
    adv_d_per_k: list
    adv_g_per_k: list
    fm_per_k: list
    mel: float
    total_g: float
    total_d: float
    weights: LossWeights = field(default_factory=LossWeights)
    labels: list = field(default_factory=list)

    def check(self, tol: float = 1e-9) -> bool:
        """Recompute both totals from the parts."""
        g = sum(a + self.weights.lambda_fm * f for a, f in zip(self.adv_g_per_k, self.fm_per_k))
        g += self.weights.lambda_mel * self.mel
        return abs(g - self.total_g) <= tol and abs(sum(self.adv_d_per_k) - self.total_d) <= tol

    def to_dict(self) -> dict:
        return asdict(self)


def _scores(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValidationError(f"{what} scores are empty")
    return arr


def adv_loss_d(scores_real, scores_gen) -> float:
    """mean (D(x) - 1)^2 + mean D(G(s))^2."""
    real = _scores(scores_real, "real")
    gen = _scores(scores_gen, "generated")
    return float(np.mean((real - 1.0) ** 2) + np.mean(gen**2))


def adv_loss_g(scores_gen) -> float:
    gen = _scores(scores_gen, "generated")
    return float(np.mean((gen - 1.0) ** 2))


def mel_loss(real: Waveform, gen: Waveform, cfg: VocoderConfig) -> float:
    if real.sample_rate != gen.sample_rate:
        raise ValidationError(f"sample rates differ: {real.sample_rate} vs {gen.sample_rate}")
    if len(real) != len(gen):
        raise ShapeError(f"waveform lengths differ: {len(real)} vs {len(gen)}")
    a = mel_spectrogram(real, cfg).values
    b = mel_spectrogram(gen, cfg).values
    return float(np.mean(np.abs(a - b)))


def feature_matching_loss(real_feats, gen_feats) -> float:
    if len(real_feats) != len(gen_feats):
        raise ShapeError(f"layer counts differ: {len(real_feats)} vs {len(gen_feats)}")
    total = 0.0
    for i, (r, g) in enumerate(zip(real_feats, gen_feats)):
        r = np.asarray(r, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if r.shape != g.shape:
            raise ShapeError(f"layer {i}: shapes {r.shape} vs {g.shape}")
        if r.size:
            total += float(np.mean(np.abs(r - g)))
    return total


def combine(adv_d, adv_g, fm, mel: float, weights: LossWeights | None = None,
            labels=None) -> LossBreakdown:
    """Assemble a breakdown from per-sub-discriminator terms, summing in order."""
    weights = weights or LossWeights()
    if not len(adv_d) == len(adv_g) == len(fm):
        raise ShapeError("per-sub-discriminator lists must have equal length")
    total_g = 0.0
    for a, f in zip(adv_g, fm):
        total_g += a + weights.lambda_fm * f
    total_g += weights.lambda_mel * mel
    return LossBreakdown(list(map(float, adv_d)), list(map(float, adv_g)), list(map(float, fm)),
                         float(mel), float(total_g), float(sum(adv_d)), weights,
                         list(labels or []))


def total_losses(real_out, gen_out, real: Waveform, gen: Waveform, cfg: VocoderConfig,
                 weights: LossWeights | None = None) -> LossBreakdown:
    """Full objective from discriminator outputs on real and generated audio.

    ``real_out`` and ``gen_out`` are :class:`DiscriminatorOutput` objects (or
    anything with ``scores`` and ``features``) covering the same K sub-discriminators.
    """
    if len(real_out.scores) != len(gen_out.scores):
        raise ShapeError("real and generated outputs cover different sub-discriminators")
    adv_d, adv_g, fm = [], [], []
    for k in range(len(real_out.scores)):
        adv_d.append(adv_loss_d(real_out.scores[k], gen_out.scores[k]))
        adv_g.append(adv_loss_g(gen_out.scores[k]))
        fm.append(feature_matching_loss(real_out.features[k], gen_out.features[k]))
    labels = getattr(real_out, "labels", None)
    return combine(adv_d, adv_g, fm, mel_loss(real, gen, cfg), weights, labels)
