"""Analysis filter banks: a 12-band cosine-modulated uniform bank and a
30-band 1/3-octave bank, plus per-band energy weights.

Neither bank downsamples; band signals keep the input length. The uniform
bank is used for subband RT averaging, the octave bank both for averaging
and for frequency-dependent RT estimation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .audio import AudioSignal
from .errors import DegenerateEnergyError, FilterDesignError

DCT_NUM_BANDS = 12
DCT_PROTOTYPE_LEN = 174
DCT_TARGET_STOPBAND_DB = 100.0
DCT_REQUIRED_STOPBAND_DB = 90.0

OCT_NUM_BANDS = 30
OCT_TOP_CENTER_HZ = 7100.0


def design_dct_prototype(
    length: int = DCT_PROTOTYPE_LEN,
    target_stopband_db: float = DCT_TARGET_STOPBAND_DB,
    num_bands: int = DCT_NUM_BANDS,
) -> tuple[np.ndarray, float]:
    """Kaiser-window lowpass prototype for the cosine-modulated bank.

    Linear phase, DC gain 1, cutoff at pi/(2*num_bands). Returns the
    coefficients and the measured stopband attenuation (max sidelobe beyond
    the design transition edge, relative to DC). Raises when the measured
    attenuation falls below 90 dB.
    """
    if length < 2 * num_bands:
        raise ValueError("prototype length must be at least 2 * num_bands")
    beta = 0.1102 * (target_stopband_db - 8.7)
    cutoff = np.pi / (2.0 * num_bands)
    n = np.arange(length)
    center = (length - 1) / 2.0
    ideal = (cutoff / np.pi) * np.sinc((cutoff / np.pi) * (n - center))
    proto = ideal * np.kaiser(length, beta)
    proto = proto / proto.sum()

    transition = (target_stopband_db - 8.0) / (2.285 * (length - 1))
    stop_edge = cutoff + transition / 2.0
    nfft = 1 << 16
    response = np.abs(np.fft.rfft(proto, nfft))
    freqs = np.linspace(0.0, np.pi, response.size)
    achieved = -20.0 * np.log10(response[freqs >= stop_edge].max() / response[0])
    if achieved < DCT_REQUIRED_STOPBAND_DB:
        raise FilterDesignError(
            f"prototype reaches only {achieved:.1f} dB stopband attenuation",
            achieved_db=float(achieved),
        )
    return proto, float(achieved)


@dataclass(frozen=True)
class DctBank:
    """Uniform cosine-modulated analysis bank without downsampling."""

    prototype: np.ndarray = field(repr=False)
    band_filters: np.ndarray = field(repr=False)
    num_bands: int
    stopband_db: float

    @classmethod
    def design(
        cls,
        num_bands: int = DCT_NUM_BANDS,
        prototype_len: int = DCT_PROTOTYPE_LEN,
        target_stopband_db: float = DCT_TARGET_STOPBAND_DB,
    ) -> "DctBank":
        proto, achieved = design_dct_prototype(prototype_len, target_stopband_db, num_bands)
        n = np.arange(prototype_len)
        # modulation phase centered on the prototype so the band ensemble
        # stays time-aligned with the input
        offset = n + 0.5 - prototype_len / 2.0
        mu = np.arange(1, num_bands + 1)[:, None]
        filters = 2.0 * proto[None, :] * np.cos((np.pi / num_bands) * (mu - 0.5) * offset)
        return cls(
            prototype=proto,
            band_filters=filters,
            num_bands=num_bands,
            stopband_db=achieved,
        )

    @property
    def prototype_len(self) -> int:
        return self.prototype.size

    def filter_band(self, x: np.ndarray, mu: int) -> np.ndarray:
        """Band mu (1-based) output, delay-compensated to input length."""
        if not 1 <= mu <= self.num_bands:
            raise ValueError(f"band index {mu} out of range 1..{self.num_bands}")
        delay = (self.prototype_len - 1) // 2
        full = sps.fftconvolve(x, self.band_filters[mu - 1])
        return full[delay : delay + len(x)]


@dataclass(frozen=True)
class ThirdOctaveBank:
    """1/3-octave bandpass bank anchored just under the Nyquist frequency.

    Center frequencies follow f_c(mu) = top_center * 2^((mu - num_bands)/3)
    with band edges a sixth of an octave on either side. Filters are applied
    causally; the bands feed energy measures, so group delay is left alone.
    """

    centers: np.ndarray = field(repr=False)
    sos: tuple = field(repr=False)
    sample_rate: int
    num_bands: int

    @classmethod
    def design(
        cls,
        sample_rate: int = 16000,
        num_bands: int = OCT_NUM_BANDS,
        top_center_hz: float = OCT_TOP_CENTER_HZ,
        order: int = 3,
    ) -> "ThirdOctaveBank":
        if top_center_hz * 2 ** (1 / 6) > sample_rate / 2:
            raise ValueError("top band edge exceeds the Nyquist frequency")
        mu = np.arange(1, num_bands + 1)
        centers = top_center_hz * 2.0 ** ((mu - num_bands) / 3.0)
        sos = tuple(
            sps.butter(
                order,
                [fc * 2 ** (-1 / 6), fc * 2 ** (1 / 6)],
                btype="bandpass",
                fs=sample_rate,
                output="sos",
            )
            for fc in centers
        )
        return cls(centers=centers, sos=sos, sample_rate=sample_rate, num_bands=num_bands)

    def center(self, mu: int) -> float:
        return float(self.centers[mu - 1])

    def filter_band(self, x: np.ndarray, mu: int) -> np.ndarray:
        if not 1 <= mu <= self.num_bands:
            raise ValueError(f"band index {mu} out of range 1..{self.num_bands}")
        return sps.sosfilt(self.sos[mu - 1], x)


@dataclass(frozen=True)
class SubbandSignals:
    """Per-band sample sequences, all of the input's length; 1-based bands."""

    bands: np.ndarray = field(repr=False)
    sample_rate: int

    def band(self, mu: int) -> np.ndarray:
        if not 1 <= mu <= self.bands.shape[0]:
            raise ValueError(f"band index {mu} out of range 1..{self.bands.shape[0]}")
        return self.bands[mu - 1]

    @property
    def num_bands(self) -> int:
        return self.bands.shape[0]


@lru_cache(maxsize=4)
def default_dct_bank() -> DctBank:
    return DctBank.design()


@lru_cache(maxsize=4)
def default_third_octave_bank(sample_rate: int = 16000) -> ThirdOctaveBank:
    return ThirdOctaveBank.design(sample_rate=sample_rate)


def analyze_dct(signal: AudioSignal, bank: DctBank | None = None) -> SubbandSignals:
    """Split a signal into the uniform bands, delay-compensated."""
    bank = bank or default_dct_bank()
    x = signal.samples
    out = np.empty((bank.num_bands, x.size))
    for mu in range(1, bank.num_bands + 1):
        out[mu - 1] = bank.filter_band(x, mu)
    return SubbandSignals(bands=out, sample_rate=signal.sample_rate)


def analyze_third_octave(signal: AudioSignal, bank: ThirdOctaveBank | None = None) -> SubbandSignals:
    """Split a signal into the 1/3-octave bands (causal, no delay comp)."""
    bank = bank or default_third_octave_bank(signal.sample_rate)
    if bank.sample_rate != signal.sample_rate:
        raise ValueError("bank and signal sample rates differ")
    x = signal.samples
    out = np.empty((bank.num_bands, x.size))
    for mu in range(1, bank.num_bands + 1):
        out[mu - 1] = bank.filter_band(x, mu)
    return SubbandSignals(bands=out, sample_rate=signal.sample_rate)


def band_energies(
    subbands: SubbandSignals, first_band: int, last_band: int
) -> tuple[np.ndarray, np.ndarray]:
    """Energies and normalized weights for bands first_band..last_band.

    Weights sum to one over the selected range; an all-zero selection has no
    defined weights and raises.
    """
    if not 1 <= first_band <= last_band <= subbands.num_bands:
        raise ValueError(
            f"band range [{first_band}, {last_band}] invalid for {subbands.num_bands} bands"
        )
    block = subbands.bands[first_band - 1 : last_band]
    energies = np.einsum("bk,bk->b", block, block)
    total = energies.sum()
    if total <= 0.0:
        raise DegenerateEnergyError("selected subbands carry no energy")
    return energies, energies / total


def dump_prototype(bank: DctBank, path: str | Path) -> None:
    """Write the designed prototype coefficients to a text artifact."""
    header = (
        f"cosine-modulated bank prototype: {bank.prototype_len} taps, "
        f"{bank.num_bands} bands, measured stopband {bank.stopband_db:.2f} dB"
    )
    np.savetxt(str(path), bank.prototype, header=header)
