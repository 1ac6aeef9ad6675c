"""Snake-family activations, Leaky ReLU, and the anti-aliased activation path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal.windows import kaiser

from .errors import ShapeError, ValidationError

DEFAULT_TAPS = 12
RESAMPLE_RATIO = 2
DEFAULT_LEAKY_SLOPE = 0.1


def _check_positive(**params):
    for name, value in params.items():
        if np.any(np.asarray(value) <= 0):
            raise ValidationError(f"{name} must be positive")


def snake(x, alpha):
    """x + sin^2(alpha x) / alpha."""
    _check_positive(alpha=alpha)
    return x + np.sin(alpha * x) ** 2 / alpha


def snake_derivative(x, alpha):
    """d/dx snake = 1 + sin(2 alpha x); touches zero where sin(2 alpha x) = -1."""
    _check_positive(alpha=alpha)
    return 1.0 + np.sin(2.0 * alpha * x)


def snake_dalpha(x, alpha):
    _check_positive(alpha=alpha)
    return x * np.sin(2.0 * alpha * x) / alpha - np.sin(alpha * x) ** 2 / alpha**2


def snakebeta(x, alpha, beta):
    """x + sin^2(alpha x) / beta; alpha sets frequency, beta magnitude."""
    _check_positive(alpha=alpha, beta=beta)
    return x + np.sin(alpha * x) ** 2 / beta


def snakebeta_partials(x, alpha, beta):
    """Partial derivatives of snakebeta with respect to (x, alpha, beta)."""
    _check_positive(alpha=alpha, beta=beta)
    s2 = np.sin(2.0 * alpha * x)
    return (
        1.0 + alpha * s2 / beta,
        x * s2 / beta,
        -np.sin(alpha * x) ** 2 / beta**2,
    )


@dataclass(frozen=True)
class LeakySlope:
    beta_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        if not 0.0 < self.beta_slope < 1.0:
            raise ValidationError("leaky slope must lie in (0, 1)")


def _slope(slope) -> float:
    return slope.beta_slope if isinstance(slope, LeakySlope) else LeakySlope(float(slope)).beta_slope


def leaky_relu(x, slope=DEFAULT_LEAKY_SLOPE):
    s = _slope(slope)
    return np.where(x >= 0, x, s * x)


def leaky_relu_derivative(x, slope=DEFAULT_LEAKY_SLOPE):
    s = _slope(slope)
    return np.where(x >= 0, 1.0, s)


@dataclass(frozen=True, eq=False)
class SnakeParams:
    """Per-channel Snake parameters.

    With ``logscale`` the stored values are logs and get exponentiated on use.
    ``beta=None`` means plain Snake (the magnitude is 1/alpha).
    """

    alpha: np.ndarray
    beta: np.ndarray | None = None
    logscale: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=np.float64).reshape(-1))
        if self.beta is not None:
            beta = np.asarray(self.beta, dtype=np.float64).reshape(-1)
            if beta.shape != self.alpha.shape:
                raise ShapeError("alpha and beta must have the same length")
            object.__setattr__(self, "beta", beta)
        if not self.logscale:
            _check_positive(alpha=self.alpha)
            if self.beta is not None:
                _check_positive(beta=self.beta)

    @classmethod
    def ones(cls, channels: int, with_beta: bool = True, logscale: bool = False) -> "SnakeParams":
        init = np.zeros(channels) if logscale else np.ones(channels)
        return cls(init, init.copy() if with_beta else None, logscale)

    @property
    def channels(self) -> int:
        return self.alpha.shape[0]

    def effective(self):
        alpha = np.exp(self.alpha) if self.logscale else self.alpha
        if self.beta is None:
            return alpha, alpha
        beta = np.exp(self.beta) if self.logscale else self.beta
        return alpha, beta

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Apply per channel to a channels x time matrix."""
        if x.shape[0] != self.channels:
            raise ShapeError(f"expected {self.channels} channels, got {x.shape[0]}")
        alpha, beta = self.effective()
        return snakebeta(x, alpha[:, None], beta[:, None])


def kaiser_sinc_filter(cutoff: float, half_width: float, taps: int) -> np.ndarray:
    """Kaiser-windowed sinc low-pass, normalized to unit DC gain.

    ``cutoff`` and ``half_width`` are in cycles/sample; the Kaiser beta follows
    the standard attenuation formula for the requested transition width.
    """
    even = taps % 2 == 0
    half = taps // 2
    delta_f = 4.0 * half_width
    atten = 2.285 * (half - 1) * math.pi * delta_f + 7.95
    if atten > 50.0:
        beta = 0.1102 * (atten - 8.7)
    elif atten >= 21.0:
        beta = 0.5842 * (atten - 21.0) ** 0.4 + 0.07886 * (atten - 21.0)
    else:
        beta = 0.0
    window = kaiser(taps, beta, sym=True)
    t = np.arange(-half, half) + 0.5 if even else np.arange(taps) - half
    h = 2.0 * cutoff * window * np.sinc(2.0 * cutoff * t)
    return h / h.sum()


def _resample_filter(taps: int) -> np.ndarray:
    ratio = RESAMPLE_RATIO
    return kaiser_sinc_filter(0.5 / ratio, 0.6 / ratio, taps)


def upsample2(x: np.ndarray, taps: int = DEFAULT_TAPS) -> np.ndarray:
    """2x upsample along the last axis: zero-stuff, low-pass, gain 2. Edges replicate.

    Computed in polyphase form: each output phase only sees every second tap.
    """
    ratio = RESAMPLE_RATIO
    h = _resample_filter(taps)
    if taps % ratio:
        h = np.append(h, 0.0)
    per_phase = h.shape[0] // ratio
    pad = taps // ratio - 1
    crop_l = pad * ratio + (taps - ratio) // 2
    xp = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(pad + per_phase - 1, pad + per_phase - 1)],
                mode="edge")
    # edge-padding beyond the replicate pad must act as zeros in the transposed conv
    xp[..., :per_phase - 1] = 0.0
    if per_phase > 1:
        xp[..., -(per_phase - 1):] = 0.0
    n_phase = xp.shape[-1] - per_phase + 1
    windows = np.lib.stride_tricks.sliding_window_view(xp, per_phase, axis=-1)
    out = np.empty(x.shape[:-1] + (ratio * n_phase,))
    for r in range(ratio):
        # phase r uses taps r, r + ratio, ... applied newest-sample-first
        out[..., r::ratio] = windows @ h[r::ratio][::-1]
    length = ratio * x.shape[-1]
    return ratio * out[..., crop_l:crop_l + length]


def downsample2(x: np.ndarray, taps: int = DEFAULT_TAPS) -> np.ndarray:
    """Low-pass then keep every second sample; output length is ceil(len / 2)."""
    ratio = RESAMPLE_RATIO
    h = _resample_filter(taps)
    even = taps % 2 == 0
    xp = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(taps // 2 - int(even), taps // 2)], mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(xp, taps, axis=-1)[..., ::ratio, :]
    return windows @ h


def antialiased_activation(
    x: np.ndarray,
    params: SnakeParams | Callable[[np.ndarray], np.ndarray],
    taps: int = DEFAULT_TAPS,
) -> np.ndarray:
    """Upsample 2x, apply the activation, low-pass and decimate back.

    ``x`` is channels x time and the output has the same shape. ``params`` is
    a :class:`SnakeParams` or any elementwise callable (e.g. Leaky ReLU).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("antialiased_activation expects a channels x time matrix")
    support = taps // RESAMPLE_RATIO
    if x.shape[1] < support:
        raise ValidationError(
            f"time length {x.shape[1]} is shorter than the filter support ({support} samples)"
        )
    return downsample2(params(upsample2(x, taps)), taps)


GRADCHECK_OPS = ("snake", "snakebeta", "leaky_relu")


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def gradient_check(op: str, n: int = 1000, seed: int = 0, step: float = 1e-5) -> dict:
    """Compare analytic derivatives with central differences at ``n`` random points.

    x is drawn from U(-4, 4) and alpha, beta from U(0.2, 3). The error measure is
    |analytic - numeric| / max(1, |analytic|), i.e. relative where the gradient
    is large and absolute near zero (snake's derivative touches 0). Leaky ReLU
    points closer than 10 steps to the kink are redrawn away from it.
    """
    if op not in GRADCHECK_OPS:
        raise ValidationError(f"unknown op {op!r}; choose from {', '.join(GRADCHECK_OPS)}")
    if n < 1:
        raise ValidationError("n must be positive")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-4.0, 4.0, n)
    alpha = rng.uniform(0.2, 3.0, n)
    beta = rng.uniform(0.2, 3.0, n)
    h = step
    pairs = {}
    if op == "snake":
        pairs["x"] = (snake_derivative(x, alpha), _central(lambda v: snake(v, alpha), x, h))
        pairs["alpha"] = (snake_dalpha(x, alpha), _central(lambda a: snake(x, a), alpha, h))
    elif op == "snakebeta":
        dx, da, db = snakebeta_partials(x, alpha, beta)
        pairs["x"] = (dx, _central(lambda v: snakebeta(v, alpha, beta), x, h))
        pairs["alpha"] = (da, _central(lambda a: snakebeta(x, a, beta), alpha, h))
        pairs["beta"] = (db, _central(lambda b: snakebeta(x, alpha, b), beta, h))
    else:
        x = np.where(np.abs(x) < 10 * h, np.sign(x + 0.5) * 0.5, x)
        pairs["x"] = (leaky_relu_derivative(x), _central(leaky_relu, x, h))
    errors = {}
    for name, (analytic, numeric) in pairs.items():
        err = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))
        errors[name] = float(err.max())
    result = {"op": op, "n": n, "seed": seed, "step": h, "max_rel_err_by_arg": errors,
              "max_rel_err": max(errors.values())}
    if op == "snake":
        # zeros of the derivative: 2 alpha x = -pi/2 + 2 pi k
        k = rng.integers(-3, 4, n)
        zeros = (-np.pi / 2 + 2 * np.pi * k) / (2 * alpha)
        result["derivative_zero_residual"] = float(np.abs(snake_derivative(zeros, alpha)).max())
    return result
