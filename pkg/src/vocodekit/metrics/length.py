"""Mel-frame versus waveform-length audit."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ValidationError


@dataclass(frozen=True)
class LengthReport:
    mel_frames: int
    hop: int
    expected_samples: int
    actual_samples: int
    diff_samples: int
    diff_seconds: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def length_consistency(mel_frames: int, waveform_len: int, hop: int,
                       sample_rate: int = 24000) -> LengthReport:
    """Pass iff the waveform is within one hop of ``mel_frames * hop`` samples."""
    for name, v in (("mel_frames", mel_frames), ("waveform_len", waveform_len), ("hop", hop),
                    ("sample_rate", sample_rate)):
        if int(v) != v or v <= 0:
            raise ValidationError(f"{name} must be a positive integer")
    expected = int(mel_frames) * int(hop)
    diff = int(waveform_len) - expected
    return LengthReport(int(mel_frames), int(hop), expected, int(waveform_len), diff,
                        diff / sample_rate, abs(diff) <= hop)
