"""Synthetic ground-truth machinery: RIR generation, Schroeder-integration
T60 oracle, speech-like excitation and noise mixing.

The generators are seeded and pure, so corpora are byte-reproducible. The
oracle (backward-integrated energy decay curve plus a line fit over the
-5..-35 dB span) is independent of every blind estimator in the package and
is what the estimator tests are judged against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio import AudioSignal
from .errors import EdcRangeError
from .ml import RT_RHO_CONSTANT

EDC_FLOOR_DB = -120.0
FIT_SPAN_DB = (-5.0, -35.0)

NOISE_KINDS = ("white", "babble", "fan")


@dataclass(frozen=True)
class SyntheticRirSpec:
    """Target decay for a synthetic room impulse response.

    Either a single fullband T60 or one T60 per filter-bank band. length
    defaults to 1.5 * max(T60) * sample_rate so the oracle sees enough decay.
    """

    t60: float | None = None
    band_t60: tuple[float, ...] | None = None
    length: int | None = None
    sample_rate: int = 16000
    seed: int = 0

    def __post_init__(self):
        if (self.t60 is None) == (self.band_t60 is None):
            raise ValueError("specify exactly one of t60 or band_t60")
        if self.t60 is not None and self.t60 <= 0:
            raise ValueError("t60 must be positive")
        if self.band_t60 is not None:
            if not self.band_t60 or any(t <= 0 for t in self.band_t60):
                raise ValueError("band_t60 values must be positive")
            object.__setattr__(self, "band_t60", tuple(float(t) for t in self.band_t60))
        length = self.length
        if length is None:
            top = self.t60 if self.t60 is not None else max(self.band_t60)
            length = int(np.ceil(1.5 * top * self.sample_rate))
        if length < 1:
            raise ValueError("length must be >= 1")
        object.__setattr__(self, "length", int(length))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "white"
    snr_db: float = np.inf
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if np.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")


def generate_rir(spec: SyntheticRirSpec, bank=None) -> np.ndarray:
    """Decaying-noise impulse response, h(k) = v(k) * exp(-rho * k * Ts).

    The per-band variant sums band-filtered independent sequences, each with
    the decay rate of its own band T60; ``bank`` must then provide
    ``filter_band(x, mu)`` for bands 1..len(band_t60) (see filterbanks).
    """
    rng = np.random.default_rng(spec.seed)
    k = np.arange(spec.length)
    if spec.t60 is not None:
        rho = RT_RHO_CONSTANT / spec.t60
        return rng.standard_normal(spec.length) * np.exp(-rho * k / spec.sample_rate)
    if bank is None:
        from .filterbanks import default_third_octave_bank

        bank = default_third_octave_bank(spec.sample_rate)
    rir = np.zeros(spec.length)
    for mu, t60 in enumerate(spec.band_t60, start=1):
        rho = RT_RHO_CONSTANT / t60
        decay = rng.standard_normal(spec.length) * np.exp(-rho * k / spec.sample_rate)
        rir += bank.filter_band(decay, mu)
    return rir


def schroeder_edc(rir: np.ndarray) -> np.ndarray:
    """Backward-integrated energy decay curve in dB relative to its start.

    EDC(k) = 10*log10(sum_{i>=k} h_i^2 / sum_i h_i^2), clamped at -120 dB.
    """
    h = np.asarray(rir, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("rir must be a non-empty 1-D array")
    if not np.all(np.isfinite(h)):
        raise ValueError("rir contains NaN or Inf")
    energy = np.cumsum((h * h)[::-1])[::-1]
    total = energy[0]
    if total <= 0:
        raise ValueError("all-zero rir has no energy decay curve")
    floor = 10.0 ** (EDC_FLOOR_DB / 10.0)
    return 10.0 * np.log10(np.maximum(energy / total, floor))


def fit_t60_from_edc(edc: np.ndarray, sample_rate: int = 16000) -> float:
    """T60 from a least-squares line over the -5..-35 dB span of the EDC."""
    edc = np.asarray(edc, dtype=np.float64)
    hi, lo = FIT_SPAN_DB
    below_hi = np.nonzero(edc <= hi)[0]
    below_lo = np.nonzero(edc <= lo)[0]
    if below_lo.size == 0 or below_hi.size == 0:
        raise EdcRangeError(
            f"energy decay curve never reaches {lo} dB (min {edc.min():.1f} dB)"
        )
    i0, i1 = below_hi[0], below_lo[0]
    if i1 <= i0:
        raise EdcRangeError("decay span too short for a line fit")
    t = np.arange(i0, i1 + 1) / sample_rate
    slope, _ = np.polyfit(t, edc[i0 : i1 + 1], 1)
    if slope >= 0:
        raise EdcRangeError("energy decay curve is not decaying over the fit span")
    return -60.0 / slope


def measure_t60(rir: np.ndarray, sample_rate: int = 16000) -> float:
    """Oracle shorthand: Schroeder EDC plus the -5..-35 dB line fit."""
    return fit_t60_from_edc(schroeder_edc(rir), sample_rate)


def synth_excitation(duration: float, seed: int, sample_rate: int = 16000) -> AudioSignal:
    """Speech-like excitation: modulated noise bursts separated by silences.

    Bursts last 200-600 ms, silences 315-650 ms, so every source-off gap is
    longer than one analysis frame of the estimators. Starts with a silence,
    which gives downstream noise trackers a clean initialization window.
    """
    if duration < 2.0:
        raise ValueError("duration must be at least 2 s")
    rng = np.random.default_rng(seed)
    n = round(duration * sample_rate)
    out = np.zeros(n)
    pos = int(rng.uniform(0.315, 0.65) * sample_rate)
    while pos < n:
        burst_len = int(rng.uniform(0.2, 0.6) * sample_rate)
        end = min(pos + burst_len, n)
        m = end - pos
        if m > 8:
            level = rng.uniform(0.25, 1.0)
            ramp = min(m // 4, int(0.02 * sample_rate))
            env = np.ones(m)
            if ramp > 0:
                edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
                env[:ramp] = edge
                env[-ramp:] = edge[::-1]
            mod_rate = rng.uniform(2.0, 6.0)
            phase = rng.uniform(0, 2 * np.pi)
            mod = 0.7 + 0.3 * np.sin(2 * np.pi * mod_rate * np.arange(m) / sample_rate + phase)
            out[pos:end] = level * env * mod * rng.standard_normal(m)
        pos = end + int(rng.uniform(0.315, 0.65) * sample_rate)
    return AudioSignal(out, sample_rate)


def generate_noise(kind: str, n: int, seed: int, sample_rate: int = 16000) -> np.ndarray:
    """Unit-scale noise stand-ins: white, babble-like, or fan-like."""
    rng = np.random.default_rng(seed)
    if kind == "white":
        return rng.standard_normal(n)
    if kind == "fan":
        # low-frequency rumble: white noise through a 200 Hz lowpass
        sos = sps.butter(4, 200.0, btype="lowpass", fs=sample_rate, output="sos")
        noise = sps.sosfilt(sos, rng.standard_normal(n))
        return noise / (np.std(noise) + 1e-12)
    if kind == "babble":
        # sum of slowly amplitude-modulated band noises
        edges = [(100, 400), (400, 900), (900, 1800), (1800, 3400)]
        acc = np.zeros(n)
        t = np.arange(n) / sample_rate
        for lo, hi in edges:
            sos = sps.butter(2, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
            band = sps.sosfilt(sos, rng.standard_normal(n))
            rate = rng.uniform(1.5, 5.0)
            phase = rng.uniform(0, 2 * np.pi)
            acc += band * (0.6 + 0.4 * np.sin(2 * np.pi * rate * t + phase))
        return acc / (np.std(acc) + 1e-12)
    raise ValueError(f"unknown noise kind {kind!r}")


def mix_at_snr(clean: AudioSignal, spec: NoiseSpec) -> AudioSignal:
    """Add generated noise scaled for the requested full-file SNR.

    snr_db = inf is the accepted sentinel for "no noise".
    """
    p_clean = float(np.mean(clean.samples**2))
    if p_clean <= 0:
        raise ValueError("clean signal is silent; SNR is undefined")
    if np.isinf(spec.snr_db) and spec.snr_db > 0:
        return AudioSignal(clean.samples.copy(), clean.sample_rate)
    noise = generate_noise(spec.kind, len(clean), spec.seed, clean.sample_rate)
    p_noise = float(np.mean(noise**2))
    gain = np.sqrt(p_clean / (p_noise * 10.0 ** (spec.snr_db / 10.0)))
    return AudioSignal(clean.samples + gain * noise, clean.sample_rate)


def reverberate(excitation: AudioSignal, rir: np.ndarray) -> AudioSignal:
    """Convolve excitation with an impulse response, trimmed to input length."""
    wet = sps.fftconvolve(excitation.samples, np.asarray(rir, dtype=np.float64))
    return AudioSignal(wet[: len(excitation)], excitation.sample_rate)
