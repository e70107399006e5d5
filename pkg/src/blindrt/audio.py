"""Audio representation, WAV ingestion, resampling and framing.

Everything downstream operates on mono float signals at 16 kHz; the frame
and sub-frame geometry defined here is shared by all estimators.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path

import numpy as np
from scipy import signal as sps
from scipy.io import wavfile

from .errors import UnsupportedEncodingError, WavFormatError

ESTIMATION_RATE = 16000

# Table-driven defaults for the frame geometry: 4923-sample frames hopped by
# 137 samples, split into 9 sub-frames of 547 samples each.
DEFAULT_FRAME_LEN = 4923
DEFAULT_HOP = 137
DEFAULT_SUBFRAME_LEN = 547
DEFAULT_MIN_SUBFRAMES = 3


@dataclass(frozen=True)
class AudioSignal:
    """Mono sample sequence with its sample rate.

    Samples are float64, finite, and read-only after construction.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-D sample array, got shape {arr.shape}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("samples contain NaN or Inf")
        if not isinstance(self.sample_rate, (int, np.integer)) or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameConfig:
    """Frame/sub-frame geometry used by the decay detector.

    frame_len must be an exact multiple of subframe_len; the detector needs
    at least min_subframes consecutive decaying sub-frames.
    """

    frame_len: int = DEFAULT_FRAME_LEN
    hop: int = DEFAULT_HOP
    subframe_len: int = DEFAULT_SUBFRAME_LEN
    min_subframes: int = DEFAULT_MIN_SUBFRAMES
    weight: float = 1.0

    def __post_init__(self):
        if self.frame_len <= 0 or self.subframe_len <= 0:
            raise ValueError("frame_len and subframe_len must be positive")
        if self.frame_len % self.subframe_len != 0:
            raise ValueError(
                f"frame_len {self.frame_len} is not a multiple of subframe_len {self.subframe_len}"
            )
        if self.hop < 1:
            raise ValueError("hop must be >= 1")
        if not 2 <= self.min_subframes <= self.subframes_per_frame:
            raise ValueError("min_subframes must lie in [2, subframes_per_frame]")
        if not 0.0 < self.weight <= 1.0:
            raise ValueError("weight must lie in (0, 1]")

    @property
    def subframes_per_frame(self) -> int:
        return self.frame_len // self.subframe_len


@dataclass(frozen=True)
class Frame:
    frame_index: int
    data: np.ndarray = field(repr=False)


def load_wav(path: str | Path) -> AudioSignal:
    """Read a WAV file into a normalized mono AudioSignal.

    PCM16 is scaled by 1/32768 so that full scale maps to 1.0; IEEE float32
    is taken as-is. Multi-channel input is reduced to channel 0. The sample
    rate is kept untouched; resample with :func:`resample_to` if needed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        rate, data = wavfile.read(io.BytesIO(path.read_bytes()))
    except Exception as exc:
        msg = str(exc)
        if "Unknown wave file format" in msg or "bit depth" in msg:
            raise UnsupportedEncodingError(f"{path}: {msg}") from exc
        raise WavFormatError(f"{path}: not a readable WAV file ({msg})") from exc
    if data.ndim == 2:
        data = data[:, 0]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedEncodingError(
            f"{path}: unsupported sample encoding {data.dtype}; expected PCM16 or float32"
        )
    return AudioSignal(samples, int(rate))


def save_wav(path: str | Path, signal: AudioSignal) -> None:
    """Write an AudioSignal as a float32 WAV file."""
    wavfile.write(str(path), signal.sample_rate, signal.samples.astype(np.float32))


def resample_to(signal: AudioSignal, target_rate: int) -> AudioSignal:
    """Band-limited rational-ratio resampling.

    Output length is round(len * target/source); content above the new
    Nyquist is attenuated by well over 60 dB (long Kaiser-windowed FIR).
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == signal.sample_rate:
        return AudioSignal(signal.samples.copy(), target_rate)
    g = gcd(signal.sample_rate, target_rate)
    up, down = target_rate // g, signal.sample_rate // g
    out_len = round(signal.samples.size * target_rate / signal.sample_rate)
    if signal.samples.size == 0:
        return AudioSignal(np.zeros(0), target_rate)
    m = max(up, down)
    taps = 2 * 32 * m + 1
    fir = sps.firwin(taps, 1.0 / m, window=("kaiser", 10.0))
    out = sps.resample_poly(signal.samples, up, down, window=fir)
    if out.size < out_len:
        out = np.pad(out, (0, out_len - out.size))
    return AudioSignal(out[:out_len], target_rate)


def frame_signal(signal: AudioSignal, cfg: FrameConfig) -> list[Frame]:
    """Slice the signal into hopped frames; trailing remainder is discarded.

    Frame lambda covers samples [lambda*hop, lambda*hop + frame_len). A
    signal shorter than one frame yields an empty list.
    """
    n = signal.samples.size
    if n < cfg.frame_len:
        return []
    count = (n - cfg.frame_len) // cfg.hop + 1
    return [
        Frame(i, signal.samples[i * cfg.hop : i * cfg.hop + cfg.frame_len])
        for i in range(count)
    ]


def split_subframes(frame: Frame, cfg: FrameConfig) -> np.ndarray:
    """Partition a frame into its sub-frames, shape (L, P).

    Row l holds samples [l*P, (l+1)*P) of the frame; concatenating the rows
    reproduces the frame exactly.
    """
    if frame.data.size != cfg.frame_len:
        raise ValueError(
            f"frame length {frame.data.size} does not match config frame_len {cfg.frame_len}"
        )
    return frame.data.reshape(cfg.subframes_per_frame, cfg.subframe_len)
