"""Named-tensor weight store and its on-disk format.

A bundle on disk is two files sharing a stem::

    model.manifest.json   names, shapes, dtype and byte offsets
    model.bin             every tensor as little-endian float32, concatenated

Weights are stored already folded (no weight-norm reparameterization).
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from ..errors import BundleError, ShapeError

FORMAT_NAME = "vocodekit-weights"
FORMAT_VERSION = 1
INIT_STD = 0.01


@dataclass(frozen=True, eq=False)
class NamedTensor:
    name: str
    shape: tuple
    data: np.ndarray

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        data = np.asarray(self.data, dtype=np.float64)
        if int(np.prod(shape)) != data.size:
            raise ShapeError(f"{self.name}: {data.size} values do not fill shape {shape}")
        if not np.all(np.isfinite(data)):
            raise BundleError(f"{self.name}: non-finite entries")
        data = data.reshape(shape)
        data.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "data", data)


@dataclass(frozen=True, eq=False)
class WeightBundle:
    tensors: Mapping[str, NamedTensor]
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], **meta) -> "WeightBundle":
        return cls({n: NamedTensor(n, np.shape(a), a) for n, a in arrays.items()}, dict(meta))

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.tensors[name].data
        except KeyError:
            raise BundleError(f"weight bundle has no tensor {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def merged(self, other: "WeightBundle") -> "WeightBundle":
        clash = set(self.tensors) & set(other.tensors)
        if clash:
            raise BundleError(f"duplicate tensor names: {sorted(clash)[:3]}")
        return WeightBundle({**self.tensors, **other.tensors}, {**self.meta, **other.meta})

    def check(self, shapes: Mapping[str, tuple]) -> None:
        """Raise ``BundleError`` unless every expected tensor is present with the right shape."""
        for name, shape in shapes.items():
            if name not in self.tensors:
                raise BundleError(f"missing tensor {name!r}")
            if self.tensors[name].shape != tuple(shape):
                raise BundleError(
                    f"tensor {name!r} has shape {self.tensors[name].shape}, expected {tuple(shape)}"
                )

    def equal(self, other: "WeightBundle") -> bool:
        return self.tensors.keys() == other.tensors.keys() and all(
            np.array_equal(self[n], other[n]) for n in self.tensors
        )


def _paths(stem) -> tuple[Path, Path]:
    stem = Path(stem)
    name = stem.name
    for suffix in (".manifest.json", ".bin"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return stem.with_name(name + ".manifest.json"), stem.with_name(name + ".bin")


def save_bundle(bundle: WeightBundle, stem) -> tuple[Path, Path]:
    manifest_path, bin_path = _paths(stem)
    entries = []
    offset = 0
    chunks = []
    for name, tensor in bundle.tensors.items():
        raw = tensor.data.astype("<f4").tobytes(order="C")
        entries.append({"name": name, "shape": list(tensor.shape), "offset": offset,
                        "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dtype": "float32",
        "byteorder": "little",
        "meta": bundle.meta,
        "tensors": entries,
    }
    bin_path.write_bytes(b"".join(chunks))
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest_path, bin_path


def load_bundle(stem) -> WeightBundle:
    manifest_path, bin_path = _paths(stem)
    try:
        manifest = json.loads(manifest_path.read_text())
        blob = bin_path.read_bytes()
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read weight bundle {stem}: {exc}") from exc
    if manifest.get("format") != FORMAT_NAME or manifest.get("dtype") != "float32":
        raise BundleError(f"{manifest_path}: not a {FORMAT_NAME} float32 manifest")
    tensors = {}
    for entry in manifest["tensors"]:
        start, nbytes = int(entry["offset"]), int(entry["nbytes"])
        if start + nbytes > len(blob):
            raise BundleError(f"{bin_path}: tensor {entry['name']!r} runs past end of file")
        data = np.frombuffer(blob[start:start + nbytes], dtype="<f4")
        name = entry["name"]
        if name in tensors:
            raise BundleError(f"duplicate tensor name {name!r}")
        tensors[name] = NamedTensor(name, tuple(entry["shape"]), data.astype(np.float64))
    return WeightBundle(tensors, manifest.get("meta", {}))


def random_init(spec, seed: int, std: float = INIT_STD, created: bool = False) -> WeightBundle:
    """Deterministic weights for ``spec``.

    Conv weights ~ Normal(0, std), biases zero, Snake parameters at 1 (0 when
    stored as logs). Values are rounded to float32 so a save/load round trip
    is exact.
    """
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, (shape, role) in spec.param_roles().items():
        if role == "weight":
            value = rng.normal(0.0, std, size=shape)
        elif role == "bias":
            value = np.zeros(shape)
        elif role == "snake_log":
            value = np.zeros(shape)
        else:
            value = np.ones(shape)
        arrays[name] = value.astype(np.float32).astype(np.float64)
    meta = {"seed": int(seed), "init_std": std}
    if created:
        meta["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return WeightBundle.from_arrays(arrays, **meta)
