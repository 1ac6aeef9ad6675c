"""WAV I/O, peak normalization and vocoder configuration parsing."""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import (
    ConfigError,
    MultichannelError,
    TruncatedFileError,
    UnsupportedEncodingError,
    ValidationError,
    WavFormatError,
)

MAX_WAV_VALUE = 32768.0
PEAK_TARGET = 0.95

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono audio samples with their sample rate.

    Samples are stored as a read-only float64 array.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(samples)):
            raise ValidationError("waveform samples must be finite")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValidationError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.sample_rate)


def read_wav(path) -> Waveform:
    """Decode a mono PCM16 or IEEE float32 RIFF WAV file.

    PCM16 samples are divided by 32768; float32 samples are passed through.
    """
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise TruncatedFileError(f"{path}: file too short for a RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos < len(data):
        if pos + 8 > len(data):
            raise TruncatedFileError(f"{path}: truncated chunk header at byte {pos}")
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"data":
            if len(body) < size:
                raise TruncatedFileError(
                    f"{path}: data chunk declares {size} bytes, only {len(body)} present"
                )
            payload = body
            break
        if len(body) < size:
            raise TruncatedFileError(f"{path}: chunk {chunk_id!r} is truncated")
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError(f"{path}: fmt chunk too small")
            fmt = struct.unpack("<HHIIHH", body[:16])
            if fmt[0] == _FORMAT_EXTENSIBLE and size >= 26:
                (sub,) = struct.unpack("<H", body[24:26])
                fmt = (sub,) + fmt[1:]
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise TruncatedFileError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if channels != 1:
        raise MultichannelError(f"{path}: expected mono audio, found {channels} channels")
    if audio_format == _FORMAT_PCM and bits == 16:
        width = 2
        dtype = "<i2"
    elif audio_format == _FORMAT_FLOAT and bits == 32:
        width = 4
        dtype = "<f4"
    else:
        raise UnsupportedEncodingError(
            f"{path}: unsupported encoding (format tag {audio_format}, {bits} bits); "
            "expected PCM16 or float32"
        )
    if len(payload) % width:
        raise TruncatedFileError(f"{path}: data chunk ends mid-sample")

    raw = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    if width == 2:
        raw = raw / MAX_WAV_VALUE
    return Waveform(raw, sample_rate)


def quantize_pcm16(samples) -> np.ndarray:
    """Map [-1, 1] floats to int16 via round(x * 32768), clamped to the int16 range."""
    scaled = np.round(np.asarray(samples, dtype=np.float64) * MAX_WAV_VALUE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(w: Waveform, path, encoding: str = "float32") -> None:
    """Write ``w`` as a mono RIFF WAV; ``encoding`` is ``"pcm16"`` or ``"float32"``."""
    if encoding == "pcm16":
        if np.any(np.abs(w.samples) > 1.0):
            warnings.warn("samples outside [-1, 1] clipped for PCM16 output", stacklevel=2)
        payload = quantize_pcm16(w.samples).tobytes()
        tag, bits = _FORMAT_PCM, 16
    elif encoding == "float32":
        payload = w.samples.astype("<f4").tobytes()
        tag, bits = _FORMAT_FLOAT, 32
    else:
        raise ValidationError(f"unknown WAV encoding {encoding!r}")

    block_align = bits // 8
    fmt_body = struct.pack(
        "<HHIIHH", tag, 1, w.sample_rate, w.sample_rate * block_align, block_align, bits
    )
    chunks = b"fmt " + struct.pack("<I", len(fmt_body)) + fmt_body
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        chunks += b"\x00"
    blob = b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise WavFormatError(f"cannot write {path}: {exc}") from exc


def normalize_peak(w: Waveform) -> Waveform:
    """Scale to unit peak, then by 0.95. Silence is returned unchanged."""
    if len(w) == 0:
        raise ValidationError("cannot normalize an empty waveform")
    peak = float(np.max(np.abs(w.samples)))
    # already at target: returning as-is keeps the operation exactly idempotent
    if peak == 0.0 or peak == PEAK_TARGET:
        return w
    return w.with_samples((w.samples / peak) * PEAK_TARGET)


# ---------------------------------------------------------------------------
# configuration

# keys present in training configs that this toolkit accepts without using
_TRAINING_KEYS = frozenset(
    {
        "resblock", "num_gpus", "batch_size", "learning_rate", "adam_b1", "adam_b2",
        "lr_decay", "seed", "num_workers", "dist_config", "fmax_for_loss",
        "discriminator_channel_mult_factor", "use_cqtd_instead_of_mrd",
    }
)

_ACTIVATIONS = ("snake", "snakebeta", "leaky_relu")


@dataclass(frozen=True)
class VocoderConfig:
    num_mels: int
    n_fft: int
    win_size: int
    hop_size: int
    sampling_rate: int
    fmin: float
    fmax: float
    segment_size: int
    upsample_rates: tuple
    upsample_kernel_sizes: tuple
    upsample_initial_channel: int
    resblock_kernel_sizes: tuple
    resblock_dilation_sizes: tuple
    resolutions: tuple
    mpd_reshapes: tuple
    activation: str
    snake_logscale: bool
    use_spectral_norm: bool
    discriminator_channel_mult: float
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        _freeze = object.__setattr__
        _freeze(self, "upsample_rates", tuple(int(v) for v in self.upsample_rates))
        _freeze(self, "upsample_kernel_sizes", tuple(int(v) for v in self.upsample_kernel_sizes))
        _freeze(self, "resblock_kernel_sizes", tuple(int(v) for v in self.resblock_kernel_sizes))
        _freeze(
            self,
            "resblock_dilation_sizes",
            tuple(tuple(int(d) for d in ds) for ds in self.resblock_dilation_sizes),
        )
        _freeze(self, "resolutions", tuple(tuple(int(v) for v in r) for r in self.resolutions))
        _freeze(self, "mpd_reshapes", tuple(int(v) for v in self.mpd_reshapes))
        self.validate()

    def validate(self) -> None:
        def fail(msg):
            raise ConfigError(msg)

        for name in ("num_mels", "n_fft", "win_size", "hop_size", "sampling_rate",
                     "segment_size", "upsample_initial_channel"):
            if getattr(self, name) <= 0:
                fail(f"{name} must be positive")
        upsample = math.prod(self.upsample_rates)
        if upsample != self.hop_size:
            fail(
                f"product(upsample_rates) = {upsample} does not equal hop_size = {self.hop_size}"
            )
        if not self.hop_size <= self.win_size <= self.n_fft:
            fail("require hop_size <= win_size <= n_fft")
        if not (self.fmin < self.fmax <= self.sampling_rate / 2):
            fail("require fmin < fmax <= sampling_rate / 2")
        if self.fmin < 0:
            fail("fmin must be nonnegative")
        if len(self.upsample_rates) != len(self.upsample_kernel_sizes):
            fail("upsample_rates and upsample_kernel_sizes differ in length")
        if len(self.resblock_kernel_sizes) != len(self.resblock_dilation_sizes):
            fail("resblock_kernel_sizes and resblock_dilation_sizes differ in length")
        if self.upsample_initial_channel % (2 ** len(self.upsample_rates)):
            fail("upsample_initial_channel must stay integral after halving per stage")
        for r in self.resolutions:
            if len(r) != 3 or not (0 < r[1] <= r[2] <= r[0]):
                fail(f"resolution {list(r)} must be [n_fft, hop, win] with hop <= win <= n_fft")
        if self.activation not in _ACTIVATIONS:
            fail(f"activation must be one of {_ACTIVATIONS}, got {self.activation!r}")
        if self.use_spectral_norm:
            fail("use_spectral_norm=true is not supported")
        if self.discriminator_channel_mult <= 0:
            fail("discriminator_channel_mult must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("extras")
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = json.loads(json.dumps(value))
        return out

    def fingerprint(self) -> str:
        """Short sha256 of the canonical JSON form, used as the config hash."""
        import hashlib

        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_REQUIRED = tuple(f for f in VocoderConfig.__dataclass_fields__ if f != "extras")


def config_from_dict(raw: dict[str, Any]) -> VocoderConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")
    unknown = sorted(set(raw) - set(_REQUIRED) - _TRAINING_KEYS)
    if unknown:
        warnings.warn(f"ignoring unknown config keys: {', '.join(unknown)}", stacklevel=3)
    kwargs = {k: raw[k] for k in _REQUIRED}
    try:
        kwargs["activation"] = str(kwargs["activation"])
        kwargs["snake_logscale"] = bool(kwargs["snake_logscale"])
        kwargs["use_spectral_norm"] = bool(kwargs["use_spectral_norm"])
        cfg = VocoderConfig(**kwargs, extras={k: raw[k] for k in set(raw) - set(_REQUIRED)})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config value: {exc}") from exc
    return cfg


def load_config(path) -> VocoderConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)


def default_config() -> VocoderConfig:
    """The bundled ``config_v1.json`` (24 kHz, 80 mels, hop 256)."""
    from importlib import resources

    text = resources.files("vocodekit.data").joinpath("config_v1.json").read_text()
    return config_from_dict(json.loads(text))


def check_rate(w: Waveform, expected: int) -> None:
    from .errors import SampleRateMismatchError

    if w.sample_rate != expected:
        raise SampleRateMismatchError(
            f"audio is {w.sample_rate} Hz but {expected} Hz is required; resample offline"
        )
