"""Forward passes of the four discriminator families.

* MED: one 1-D conv stack per envelope mode (-1, 0, 1, 300, 500)
* MRD: one 2-D conv stack per STFT resolution, on log-magnitude spectrograms
* MPD: waveform folded into (T/p) x p for each period p, 2-D conv stack
* MSD: 1-D conv stack on the raw, 2x and 4x average-pooled waveform

MED and MSD sub-discriminators share the same 1-D stack layout (kernel-15
head, grouped strided kernel-41 convs, kernel-5 tail, kernel-3 post).
Every conv except the post conv is followed by Leaky ReLU(0.1); feature maps
are recorded after each activation and after the post conv.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..activations import leaky_relu
from ..audio_io import VocoderConfig, Waveform
from ..envelope import MODES, DEFAULT_ORDER, extract_envelope
from ..errors import ShapeError, ValidationError
from ..spectral import StftPlan, log_magnitude, stft
from .layers import Conv1dLayer, Conv2dLayer, SpecBase, collect
from .ops import avg_pool1d

LRELU_SLOPE = 0.1


@dataclass(frozen=True, eq=False)
class DiscriminatorOutput:
    """``scores[k]`` is the flattened output of sub-discriminator k;
    ``features[k]`` its per-layer activations."""

    scores: list
    features: list
    labels: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.scores)

    def __add__(self, other: "DiscriminatorOutput") -> "DiscriminatorOutput":
        return DiscriminatorOutput(self.scores + other.scores, self.features + other.features,
                                   self.labels + other.labels)


def _stack_forward(layers, post, weights, x):
    fmap = []
    for layer in layers:
        x = leaky_relu(layer(weights, x), LRELU_SLOPE)
        fmap.append(x)
    x = post(weights, x)
    fmap.append(x)
    return x.reshape(-1), fmap


@dataclass(frozen=True)
class ScaleStackSpec(SpecBase):
    """1-D stack used by MED branches and MSD scales."""

    name: str

    @property
    def convs(self):
        n = self.name
        return [
            Conv1dLayer(f"{n}.convs.0", 1, 128, 15, 1, padding=7),
            Conv1dLayer(f"{n}.convs.1", 128, 128, 41, 2, groups=4, padding=20),
            Conv1dLayer(f"{n}.convs.2", 128, 256, 41, 2, groups=16, padding=20),
            Conv1dLayer(f"{n}.convs.3", 256, 512, 41, 4, groups=16, padding=20),
            Conv1dLayer(f"{n}.convs.4", 512, 1024, 41, 4, groups=16, padding=20),
            Conv1dLayer(f"{n}.convs.5", 1024, 1024, 41, 1, groups=16, padding=20),
            Conv1dLayer(f"{n}.convs.6", 1024, 1024, 5, 1, padding=2),
        ]

    @property
    def conv_post(self):
        return Conv1dLayer(f"{self.name}.conv_post", 1024, 1, 3, 1, padding=1)

    @property
    def depth(self) -> int:
        return len(self.convs) + 1

    def param_roles(self):
        return collect(self.convs + [self.conv_post])

    def __call__(self, weights, signal: np.ndarray):
        return _stack_forward(self.convs, self.conv_post, weights, np.asarray(signal)[None, :])


@dataclass(frozen=True)
class ResolutionStackSpec(SpecBase):
    """2-D stack over a (freq bins x frames) log-magnitude spectrogram."""

    name: str
    resolution: tuple
    channel_mult: float = 1.0

    @property
    def width(self) -> int:
        return int(32 * self.channel_mult)

    @property
    def convs(self):
        n, c = self.name, self.width
        return [
            Conv2dLayer(f"{n}.convs.0", 1, c, (3, 9), padding=(1, 4)),
            Conv2dLayer(f"{n}.convs.1", c, c, (3, 9), stride=(1, 2), padding=(1, 4)),
            Conv2dLayer(f"{n}.convs.2", c, c, (3, 9), stride=(1, 2), padding=(1, 4)),
            Conv2dLayer(f"{n}.convs.3", c, c, (3, 9), stride=(1, 2), padding=(1, 4)),
            Conv2dLayer(f"{n}.convs.4", c, c, (3, 3), padding=(1, 1)),
        ]

    @property
    def conv_post(self):
        return Conv2dLayer(f"{self.name}.conv_post", self.width, 1, (3, 3), padding=(1, 1))

    @property
    def depth(self) -> int:
        return len(self.convs) + 1

    def param_roles(self):
        return collect(self.convs + [self.conv_post])

    def spectrogram(self, signal: np.ndarray) -> np.ndarray:
        return log_magnitude(stft(signal, StftPlan.from_triple(self.resolution))).values

    def __call__(self, weights, signal: np.ndarray):
        return _stack_forward(self.convs, self.conv_post, weights,
                              self.spectrogram(signal)[None, :, :])


def fold_period(signal: np.ndarray, period: int) -> np.ndarray:
    """Reflect-pad to a multiple of ``period`` and reshape row-major to (T/p, p)."""
    x = np.asarray(signal, dtype=np.float64)
    rem = x.shape[0] % period
    if rem:
        if x.shape[0] <= period - rem:
            raise ValidationError(f"signal of {x.shape[0]} samples too short for period {period}")
        x = np.pad(x, (0, period - rem), mode="reflect")
    return x.reshape(-1, period)


@dataclass(frozen=True)
class PeriodStackSpec(SpecBase):
    name: str
    period: int

    @property
    def convs(self):
        n = self.name
        chans = [1, 32, 128, 512, 1024]
        layers = [Conv2dLayer(f"{n}.convs.{i}", chans[i], chans[i + 1], (5, 1), (3, 1), (2, 0))
                  for i in range(4)]
        layers.append(Conv2dLayer(f"{n}.convs.4", 1024, 1024, (5, 1), (1, 1), (2, 0)))
        return layers

    @property
    def conv_post(self):
        return Conv2dLayer(f"{self.name}.conv_post", 1024, 1, (3, 1), (1, 1), (1, 0))

    @property
    def depth(self) -> int:
        return len(self.convs) + 1

    def param_roles(self):
        return collect(self.convs + [self.conv_post])

    def __call__(self, weights, signal: np.ndarray):
        return _stack_forward(self.convs, self.conv_post, weights,
                              fold_period(signal, self.period)[None, :, :])


class _Ensemble(SpecBase):
    prefix = ""

    def param_roles(self):
        return collect(self.subs)

    def _run(self, weights, inputs, labels):
        weights.check(self.param_shapes())
        scores, feats = [], []
        for sub, x in zip(self.subs, inputs):
            s, f = sub(weights, x)
            scores.append(s)
            feats.append(f)
        return DiscriminatorOutput(scores, feats, list(labels))


def _signal(w) -> np.ndarray:
    x = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ShapeError("discriminators take a 1-D signal of at least 2 samples")
    return x


@dataclass(frozen=True)
class MEDSpec(_Ensemble):
    modes: tuple = tuple(int(m) for m in MODES)
    filter_order: int = DEFAULT_ORDER
    prefix: str = "med"

    @property
    def subs(self):
        return [ScaleStackSpec(f"{self.prefix}.{i}") for i in range(len(self.modes))]

    def forward(self, weights, w: Waveform) -> DiscriminatorOutput:
        if not isinstance(w, Waveform):
            raise ValidationError("MED needs a Waveform (the sample rate drives the filters)")
        envs = [extract_envelope(w, m, self.filter_order).samples for m in self.modes]
        return self._run(weights, envs, [f"med[{m}]" for m in self.modes])


@dataclass(frozen=True)
class MRDSpec(_Ensemble):
    resolutions: tuple
    channel_mult: float = 1.0
    prefix: str = "mrd"

    @property
    def subs(self):
        return [ResolutionStackSpec(f"{self.prefix}.{i}", tuple(r), self.channel_mult)
                for i, r in enumerate(self.resolutions)]

    def forward(self, weights, w) -> DiscriminatorOutput:
        x = _signal(w)
        return self._run(weights, [x] * len(self.resolutions),
                         [f"mrd{list(r)}" for r in self.resolutions])


@dataclass(frozen=True)
class MPDSpec(_Ensemble):
    periods: tuple
    prefix: str = "mpd"

    @property
    def subs(self):
        return [PeriodStackSpec(f"{self.prefix}.{i}", p) for i, p in enumerate(self.periods)]

    def forward(self, weights, w) -> DiscriminatorOutput:
        x = _signal(w)
        return self._run(weights, [x] * len(self.periods), [f"mpd[{p}]" for p in self.periods])


@dataclass(frozen=True)
class MSDSpec(_Ensemble):
    scales: int = 3
    prefix: str = "msd"

    @property
    def subs(self):
        return [ScaleStackSpec(f"{self.prefix}.{i}") for i in range(self.scales)]

    def pooled_inputs(self, x: np.ndarray) -> list[np.ndarray]:
        inputs = [x]
        for _ in range(self.scales - 1):
            inputs.append(avg_pool1d(inputs[-1][None, :], 4, 2, 2)[0])
        return inputs

    def forward(self, weights, w) -> DiscriminatorOutput:
        x = _signal(w)
        return self._run(weights, self.pooled_inputs(x),
                         [f"msd[x{2 ** i}]" for i in range(self.scales)])


def build_med(cfg: VocoderConfig | None = None, filter_order: int = DEFAULT_ORDER) -> MEDSpec:
    return MEDSpec(filter_order=filter_order)


def build_mrd(cfg: VocoderConfig) -> MRDSpec:
    return MRDSpec(cfg.resolutions, cfg.discriminator_channel_mult)


def build_mpd(cfg: VocoderConfig) -> MPDSpec:
    return MPDSpec(cfg.mpd_reshapes)


def build_msd(cfg: VocoderConfig | None = None) -> MSDSpec:
    return MSDSpec()


def med_forward(spec: MEDSpec, weights, w) -> DiscriminatorOutput:
    return spec.forward(weights, w)


def mrd_forward(spec: MRDSpec, weights, w) -> DiscriminatorOutput:
    return spec.forward(weights, w)


def mpd_forward(spec: MPDSpec, weights, w) -> DiscriminatorOutput:
    return spec.forward(weights, w)


def msd_forward(spec: MSDSpec, weights, w) -> DiscriminatorOutput:
    return spec.forward(weights, w)


BUILDERS = {"med": build_med, "mrd": build_mrd, "mpd": build_mpd, "msd": build_msd}

COMBINATIONS = {
    "med": ("med",),
    "mrd": ("mrd",),
    "mpd": ("mpd",),
    "msd": ("msd",),
    "med+mrd": ("med", "mrd"),
    "mpd+msd": ("mpd", "msd"),
    "msd+med": ("msd", "med"),
    "msd+mrd": ("msd", "mrd"),
    "mpd+med": ("mpd", "med"),
    "mpd+mrd": ("mpd", "mrd"),
    "med+mpd+mrd": ("med", "mpd", "mrd"),
}


def build_discriminators(cfg: VocoderConfig, combination: str) -> list:
    try:
        names = COMBINATIONS[combination]
    except KeyError:
        raise ValidationError(
            f"unknown discriminator combination {combination!r}; "
            f"choose from {', '.join(COMBINATIONS)}"
        ) from None
    return [BUILDERS[n](cfg) for n in names]


def ensemble_forward(specs, weights, w) -> DiscriminatorOutput:
    """Run several families and concatenate their sub-discriminator lists in order."""
    out = DiscriminatorOutput([], [], [])
    for spec in specs:
        out = out + spec.forward(weights, w)
    return out
