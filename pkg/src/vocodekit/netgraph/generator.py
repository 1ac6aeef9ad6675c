"""Mel-to-waveform generator built from anti-aliased multi-periodicity blocks.

Layout, for a config with ``U`` upsample stages and ``R`` residual kernels::

    conv_pre (k=7)  num_mels -> C
    for each stage i:  transposed conv (rate u_i, kernel k_i)  C/2^i -> C/2^(i+1)
                       R AMP blocks in parallel, outputs averaged
    anti-aliased activation, conv_post (k=7) -> 1 channel, tanh

Each AMP block, per dilation d: act -> conv(k, d) -> act -> conv(k, 1), plus
a residual connection around the pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..audio_io import VocoderConfig, Waveform
from ..errors import ShapeError
from ..spectral import MelSpectrogram
from .layers import ActivationLayer, Conv1dLayer, ConvTranspose1dLayer, SpecBase, collect

PREFIX = "generator"


def same_padding(kernel: int, dilation: int = 1) -> int:
    return (kernel * dilation - dilation) // 2


@dataclass(frozen=True)
class AMPBlockSpec(SpecBase):
    name: str
    channels: int
    kernel: int
    dilations: tuple
    activation: str
    logscale: bool

    @property
    def convs1(self):
        return [Conv1dLayer(f"{self.name}.convs1.{i}", self.channels, self.channels, self.kernel,
                            dilation=d, padding=same_padding(self.kernel, d))
                for i, d in enumerate(self.dilations)]

    @property
    def convs2(self):
        return [Conv1dLayer(f"{self.name}.convs2.{i}", self.channels, self.channels, self.kernel,
                            padding=same_padding(self.kernel))
                for i in range(len(self.dilations))]

    @property
    def activations(self):
        return [ActivationLayer(f"{self.name}.activations.{i}", self.channels, self.activation,
                                self.logscale)
                for i in range(2 * len(self.dilations))]

    def param_roles(self):
        return collect(self.convs1 + self.convs2 + self.activations)

    def __call__(self, weights, x):
        acts = self.activations
        for i, (c1, c2) in enumerate(zip(self.convs1, self.convs2)):
            xt = acts[2 * i](weights, x)
            xt = c1(weights, xt)
            xt = acts[2 * i + 1](weights, xt)
            xt = c2(weights, xt)
            x = xt + x
        return x


@dataclass(frozen=True)
class GeneratorSpec(SpecBase):
    num_mels: int
    initial_channels: int
    upsample_rates: tuple
    upsample_kernels: tuple
    resblock_kernels: tuple
    resblock_dilations: tuple
    activation: str
    logscale: bool

    @property
    def stage_channels(self) -> list[int]:
        """Channel width before the first stage and after each stage."""
        return [self.initial_channels // 2**i for i in range(len(self.upsample_rates) + 1)]

    @property
    def upsample_factor(self) -> int:
        return math.prod(self.upsample_rates)

    @property
    def conv_pre(self):
        return Conv1dLayer(f"{PREFIX}.conv_pre", self.num_mels, self.initial_channels, 7, padding=3)

    @property
    def ups(self):
        ch = self.stage_channels
        return [ConvTranspose1dLayer(f"{PREFIX}.ups.{i}", ch[i], ch[i + 1], k, u, (k - u) // 2)
                for i, (u, k) in enumerate(zip(self.upsample_rates, self.upsample_kernels))]

    @property
    def resblocks(self):
        blocks = []
        for i, ch in enumerate(self.stage_channels[1:]):
            for j, (k, d) in enumerate(zip(self.resblock_kernels, self.resblock_dilations)):
                idx = i * len(self.resblock_kernels) + j
                blocks.append(AMPBlockSpec(f"{PREFIX}.resblocks.{idx}", ch, k, tuple(d),
                                           self.activation, self.logscale))
        return blocks

    @property
    def activation_post(self):
        return ActivationLayer(f"{PREFIX}.activation_post", self.stage_channels[-1],
                               self.activation, self.logscale)

    @property
    def conv_post(self):
        return Conv1dLayer(f"{PREFIX}.conv_post", self.stage_channels[-1], 1, 7, padding=3)

    def layers(self):
        return ([self.conv_pre] + self.ups + self.resblocks
                + [self.activation_post, self.conv_post])

    def param_roles(self):
        return collect(self.layers())

    def output_length(self, frames: int) -> int:
        return frames * self.upsample_factor


def build_generator(cfg: VocoderConfig) -> GeneratorSpec:
    return GeneratorSpec(
        num_mels=cfg.num_mels,
        initial_channels=cfg.upsample_initial_channel,
        upsample_rates=cfg.upsample_rates,
        upsample_kernels=cfg.upsample_kernel_sizes,
        resblock_kernels=cfg.resblock_kernel_sizes,
        resblock_dilations=cfg.resblock_dilation_sizes,
        activation=cfg.activation,
        logscale=cfg.snake_logscale,
    )


def generator_forward(spec: GeneratorSpec, weights, mel, sample_rate: int = 24000) -> Waveform:
    """Synthesize ``frames * prod(upsample_rates)`` samples in [-1, 1] from a log-mel matrix."""
    values = mel.values if isinstance(mel, MelSpectrogram) else np.asarray(mel, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != spec.num_mels:
        raise ShapeError(f"expected a {spec.num_mels} x frames mel matrix, got {values.shape}")
    weights.check(spec.param_shapes())

    x = spec.conv_pre(weights, values)
    blocks = spec.resblocks
    per_stage = len(spec.resblock_kernels)
    for i, up in enumerate(spec.ups):
        x = up(weights, x)
        stage = blocks[i * per_stage:(i + 1) * per_stage]
        acc = stage[0](weights, x)
        for block in stage[1:]:
            acc = acc + block(weights, x)
        x = acc / per_stage
    x = spec.activation_post(weights, x)
    x = spec.conv_post(weights, x)
    out = np.tanh(x[0])
    if out.shape[0] != spec.output_length(values.shape[1]):
        raise ShapeError("generator output violates the frames x hop length law")
    return Waveform(out, sample_rate)
