"""Speech denoising by spectral weighting.

STFT with half-overlapping 512-sample von Hann frames, a recursive
speech-presence-gated noise PSD tracker, decision-directed a-priori SNR and
a Wiener-type gain floored at W_min. The floor controls how strongly both
noise and diffuse reverberation are suppressed, which is what the downstream
decay detectors feed on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioSignal

DEFAULT_GAIN_FLOOR = 0.2
SUBBAND_GAIN_FLOOR = 0.35


@dataclass(frozen=True)
class StftConfig:
    """Analysis/synthesis geometry: von Hann window at 50% overlap."""

    window_len: int = 512
    hop: int = 256
    dft_len: int = 512

    def __post_init__(self):
        if self.window_len <= 0 or self.hop <= 0:
            raise ValueError("window_len and hop must be positive")
        if self.hop != self.window_len // 2:
            raise ValueError("hop must be window_len/2 (overlap-add identity needs it)")
        if self.dft_len < self.window_len:
            raise ValueError("dft_len must be >= window_len")

    def window(self) -> np.ndarray:
        # periodic von Hann: overlapped copies at 50% hop sum to exactly 1
        n = np.arange(self.window_len)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.window_len)


@dataclass(frozen=True)
class DenoiseConfig:
    gain_floor: float = DEFAULT_GAIN_FLOOR
    noise_psd_smoothing: float = 0.8
    snr_smoothing: float = 0.98
    noise_init_seconds: float = 0.1
    speech_presence_factor: float = 5.0
    stft: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self):
        if not 0.0 < self.gain_floor < 1.0:
            raise ValueError("gain_floor must lie in (0, 1)")
        for name in ("noise_psd_smoothing", "snr_smoothing"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")


def stft_analyze(signal: AudioSignal, cfg: StftConfig) -> np.ndarray:
    """Complex STFT grid, shape (frames, bins); empty for too-short input.

    Frame t covers samples [t*hop, t*hop + window_len); bins are the
    non-negative DFT frequencies of the windowed segment.
    """
    x = signal.samples
    n_bins = cfg.dft_len // 2 + 1
    if x.size < cfg.window_len:
        return np.zeros((0, n_bins), dtype=np.complex128)
    n_frames = (x.size - cfg.window_len) // cfg.hop + 1
    win = cfg.window()
    s = x.strides[0]
    frames = np.lib.stride_tricks.as_strided(
        x, shape=(n_frames, cfg.window_len), strides=(s * cfg.hop, s)
    )
    return np.fft.rfft(frames * win, n=cfg.dft_len, axis=1)


def stft_synthesize(grid: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Overlap-add resynthesis of an analysis grid.

    The window is applied only at analysis and sums to one at 50% overlap,
    so an unmodified grid reconstructs the signal exactly away from the
    first and last half-window.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[1] != cfg.dft_len // 2 + 1:
        raise ValueError(
            f"grid shape {grid.shape} does not match dft_len {cfg.dft_len}"
        )
    n_frames = grid.shape[0]
    if n_frames == 0:
        return np.zeros(0)
    frames = np.fft.irfft(grid, n=cfg.dft_len, axis=1)[:, : cfg.window_len]
    out = np.zeros((n_frames - 1) * cfg.hop + cfg.window_len)
    for t in range(n_frames):
        start = t * cfg.hop
        out[start : start + cfg.window_len] += frames[t]
    return out


def estimate_noise_psd(
    grid: np.ndarray, cfg: DenoiseConfig | None = None, sample_rate: int = 16000
) -> np.ndarray:
    """Per-frame noise PSD track, shape like |grid|^2.

    Initialized from the leading noise-only interval, then updated by a
    recursive average that only runs in frames whose periodogram stays below
    a speech-presence threshold. The estimate never exceeds the running
    periodogram maximum of its bin.
    """
    cfg = cfg or DenoiseConfig()
    if grid.shape[0] == 0:
        raise ValueError("empty STFT grid")
    periodogram = np.abs(grid) ** 2
    n_frames = periodogram.shape[0]
    init_samples = int(cfg.noise_init_seconds * sample_rate)
    init_frames = max(1, (init_samples - cfg.stft.window_len) // cfg.stft.hop + 1)
    init_frames = min(init_frames, n_frames)
    noise = periodogram[:init_frames].mean(axis=0)
    track = np.empty_like(periodogram)
    alpha = cfg.noise_psd_smoothing
    for t in range(n_frames):
        update = periodogram[t] <= cfg.speech_presence_factor * noise
        noise = np.where(update, alpha * noise + (1.0 - alpha) * periodogram[t], noise)
        track[t] = noise
    return track


def spectral_gain(speech_psd: np.ndarray, noise_psd: np.ndarray, gain_floor: float) -> np.ndarray:
    """Wiener gain from an a-priori SNR estimate, floored at gain_floor.

    xi = speech/noise, g = xi / (1 + xi); bins with zero noise get gain 1,
    bins with zero speech power fall to the floor.
    """
    speech_psd = np.asarray(speech_psd, dtype=np.float64)
    noise_psd = np.asarray(noise_psd, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = np.where(
            noise_psd > 0.0,
            speech_psd / noise_psd,
            np.where(speech_psd > 0.0, np.inf, 0.0),
        )
        g = np.where(np.isinf(xi), 1.0, xi / (1.0 + xi))
    return np.clip(g, gain_floor, 1.0)


def denoise(signal: AudioSignal, cfg: DenoiseConfig | None = None) -> AudioSignal:
    """Spectral-weighting denoiser; output has the input's exact length.

    The input is zero-padded by one hop on each side so every original
    sample sits in the exactly-reconstructed interior of the overlap-add.
    """
    cfg = cfg or DenoiseConfig()
    stft = cfg.stft
    x = signal.samples
    if x.size < stft.window_len:
        return AudioSignal(x.copy(), signal.sample_rate)
    pad_front = stft.hop
    tail = (-(x.size + pad_front - stft.window_len)) % stft.hop
    padded = np.concatenate([np.zeros(pad_front), x, np.zeros(tail + stft.hop)])
    grid = stft_analyze(AudioSignal(padded, signal.sample_rate), stft)
    noise_track = estimate_noise_psd(grid, cfg, signal.sample_rate)

    periodogram = np.abs(grid) ** 2
    gains = np.empty_like(periodogram)
    alpha = cfg.snr_smoothing
    prev_clean = np.zeros(grid.shape[1])
    for t in range(grid.shape[0]):
        noise = noise_track[t]
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma = np.where(noise > 0.0, periodogram[t] / noise, np.inf)
        excess = np.where(np.isfinite(gamma), np.maximum(gamma - 1.0, 0.0), 0.0)
        speech_prior = alpha * prev_clean + (1.0 - alpha) * excess * noise
        speech_prior = np.where(noise > 0.0, speech_prior, periodogram[t])
        g = spectral_gain(speech_prior, noise, cfg.gain_floor)
        gains[t] = g
        prev_clean = (g**2) * periodogram[t]
    out = stft_synthesize(grid * gains, stft)
    return AudioSignal(out[pad_front : pad_front + x.size], signal.sample_rate)
