"""Layer descriptions: shapes derivable without weights, forward given a bundle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..activations import SnakeParams, antialiased_activation, leaky_relu
from . import ops


class SpecBase:
    """Anything that can list its parameters as ``name -> (shape, role)``."""

    def param_roles(self) -> dict:
        raise NotImplementedError

    def param_shapes(self) -> dict:
        return {name: shape for name, (shape, _) in self.param_roles().items()}


@dataclass(frozen=True)
class Conv1dLayer(SpecBase):
    name: str
    c_in: int
    c_out: int
    kernel: int
    stride: int = 1
    dilation: int = 1
    groups: int = 1
    padding: int = 0
    bias: bool = True

    def param_roles(self):
        roles = {f"{self.name}.weight": ((self.c_out, self.c_in // self.groups, self.kernel), "weight")}
        if self.bias:
            roles[f"{self.name}.bias"] = ((self.c_out,), "bias")
        return roles

    def __call__(self, weights, x):
        b = weights[f"{self.name}.bias"] if self.bias else None
        return ops.conv1d(x, weights[f"{self.name}.weight"], b, self.stride, self.dilation,
                          self.groups, self.padding)


@dataclass(frozen=True)
class ConvTranspose1dLayer(SpecBase):
    name: str
    c_in: int
    c_out: int
    kernel: int
    stride: int
    padding: int
    bias: bool = True

    def param_roles(self):
        roles = {f"{self.name}.weight": ((self.c_in, self.c_out, self.kernel), "weight")}
        if self.bias:
            roles[f"{self.name}.bias"] = ((self.c_out,), "bias")
        return roles

    def __call__(self, weights, x):
        b = weights[f"{self.name}.bias"] if self.bias else None
        return ops.conv_transpose1d(x, weights[f"{self.name}.weight"], b, self.stride, self.padding)


@dataclass(frozen=True)
class Conv2dLayer(SpecBase):
    name: str
    c_in: int
    c_out: int
    kernel: tuple
    stride: tuple = (1, 1)
    padding: tuple = (0, 0)
    bias: bool = True

    def param_roles(self):
        roles = {f"{self.name}.weight": ((self.c_out, self.c_in) + tuple(self.kernel), "weight")}
        if self.bias:
            roles[f"{self.name}.bias"] = ((self.c_out,), "bias")
        return roles

    def __call__(self, weights, x):
        b = weights[f"{self.name}.bias"] if self.bias else None
        return ops.conv2d(x, weights[f"{self.name}.weight"], b, self.stride, self.padding)


@dataclass(frozen=True)
class ActivationLayer(SpecBase):
    """Anti-aliased activation; ``kind`` is snake, snakebeta or leaky_relu."""

    name: str
    channels: int
    kind: str
    logscale: bool = False

    def param_roles(self):
        if self.kind == "leaky_relu":
            return {}
        role = "snake_log" if self.logscale else "snake"
        roles = {f"{self.name}.alpha": ((self.channels,), role)}
        if self.kind == "snakebeta":
            roles[f"{self.name}.beta"] = ((self.channels,), role)
        return roles

    def params(self, weights):
        if self.kind == "leaky_relu":
            return leaky_relu
        beta = weights[f"{self.name}.beta"] if self.kind == "snakebeta" else None
        return SnakeParams(weights[f"{self.name}.alpha"], beta, self.logscale)

    def __call__(self, weights, x):
        return antialiased_activation(x, self.params(weights))


@dataclass(frozen=True)
class Composite(SpecBase):
    """Ordered collection of specs; an empty one has no parameters."""

    parts: tuple = ()

    def param_roles(self):
        roles = {}
        for part in self.parts:
            roles.update(part.param_roles())
        return roles


def collect(parts: Iterable[SpecBase]) -> dict:
    roles = {}
    for part in parts:
        roles.update(part.param_roles())
    return roles


def count_parameters(spec: SpecBase) -> int:
    """Exact number of scalars across all weight, bias and Snake tensors."""
    return int(sum(int(np.prod(shape)) for shape in spec.param_shapes().values()))
