"""Signal processing, network forward passes, losses and metrics for GAN vocoder analysis."""

__version__ = "0.1.0"

from .audio_io import VocoderConfig, Waveform, default_config, load_config, read_wav, write_wav
from .errors import BundleError, ValidationError, VocodeKitError, WavFormatError

__all__ = [
    "BundleError", "ValidationError", "VocodeKitError", "VocoderConfig", "WavFormatError",
    "Waveform", "__version__", "default_config", "load_config", "read_wav", "write_wav",
]
