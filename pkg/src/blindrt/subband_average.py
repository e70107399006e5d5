"""Fullband RT estimation by energy-weighted averaging of upper-subband
estimates, in a uniform-bank and a 1/3-octave-bank variant.

The denoised signal is split into bands; each considered band runs the
fullband decay-track estimator unchanged; band estimates are combined as a
convex combination with energy weights. Bands whose estimator finds no
decays are dropped and the weights renormalized over the survivors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import baseline
from .audio import AudioSignal
from .baseline import BaselineParams, FullbandResult
from .denoise import SUBBAND_GAIN_FLOOR, DenoiseConfig, denoise
from .errors import InsufficientDecaysError
from .filterbanks import (
    DctBank,
    SubbandSignals,
    ThirdOctaveBank,
    analyze_dct,
    analyze_third_octave,
    band_energies,
    default_dct_bank,
    default_third_octave_bank,
)

DCT_FIRST_BAND = 3
OCT_FIRST_BAND = 20


def _subband_baseline_params() -> BaselineParams:
    return BaselineParams(denoise=DenoiseConfig(gain_floor=SUBBAND_GAIN_FLOOR))


@dataclass(frozen=True)
class SubbandAverageParams:
    """Band range plus the per-band estimator parameters.

    The denoise config inside ``baseline`` is applied once to the fullband
    signal before splitting; per-band estimation itself runs undenoised.
    """

    first_band: int
    last_band: int
    baseline: BaselineParams = field(default_factory=_subband_baseline_params)

    def __post_init__(self):
        if not 1 <= self.first_band <= self.last_band:
            raise ValueError("band range is empty or negative")

    @classmethod
    def dct_defaults(cls) -> "SubbandAverageParams":
        return cls(first_band=DCT_FIRST_BAND, last_band=12)

    @classmethod
    def oct_defaults(cls) -> "SubbandAverageParams":
        return cls(first_band=OCT_FIRST_BAND, last_band=30)


def weighted_fullband(estimates: np.ndarray, weights: np.ndarray) -> float:
    """Convex combination of band estimates with non-negative weights."""
    estimates = np.asarray(estimates, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if estimates.shape != weights.shape or estimates.size == 0:
        raise ValueError("estimates and weights must be equal-length and non-empty")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("at least one weight must be positive")
    return float(np.sum(estimates * weights) / total)


def _estimate_over_bands(
    subbands: SubbandSignals, params: SubbandAverageParams
) -> FullbandResult:
    """Per-band decay-track estimation plus the weighted merge."""
    if params.last_band > subbands.num_bands:
        raise ValueError(
            f"band range up to {params.last_band} exceeds the bank's {subbands.num_bands}"
        )
    energies, _ = band_energies(subbands, params.first_band, params.last_band)
    band_rts: dict[int, float] = {}
    survivors: list[int] = []
    frames_total = 0
    n1, n2 = None, None
    for offset, mu in enumerate(range(params.first_band, params.last_band + 1)):
        try:
            result = baseline.estimate_track(subbands.band(mu), params.baseline)
        except InsufficientDecaysError:
            continue
        band_rts[mu] = result.t60
        survivors.append(offset)
        frames_total += result.frames_with_estimates
        n1 = result.n1 if n1 is None else min(n1, result.n1)
        n2 = result.n2 if n2 is None else max(n2, result.n2)
    if not survivors:
        raise InsufficientDecaysError("no subband produced an RT estimate")
    surviving_energy = energies[survivors]
    if surviving_energy.sum() <= 0.0:
        raise InsufficientDecaysError("surviving subbands carry no energy")
    weights = surviving_energy / surviving_energy.sum()
    rts = np.array([band_rts[mu] for mu in band_rts])
    t60 = weighted_fullband(rts, weights)
    return FullbandResult(
        t60=t60,
        frames_with_estimates=frames_total,
        n1=n1,
        n2=n2,
        track=(),
        band_rts=band_rts,
        band_weights={mu: float(w) for mu, w in zip(band_rts, weights)},
    )


def estimate_fullband_dct(
    signal: AudioSignal,
    params: SubbandAverageParams | None = None,
    bank: DctBank | None = None,
) -> FullbandResult:
    """Fullband RT by energy-weighted averaging over the upper uniform bands."""
    params = params or SubbandAverageParams.dct_defaults()
    cleaned = denoise(signal, params.baseline.denoise)
    subbands = analyze_dct(cleaned, bank or default_dct_bank())
    return _estimate_over_bands(subbands, params)


def estimate_fullband_oct(
    signal: AudioSignal,
    params: SubbandAverageParams | None = None,
    bank: ThirdOctaveBank | None = None,
) -> FullbandResult:
    """Fullband RT by energy-weighted averaging over upper 1/3-octave bands."""
    params = params or SubbandAverageParams.oct_defaults()
    cleaned = denoise(signal, params.baseline.denoise)
    subbands = analyze_third_octave(cleaned, bank or default_third_octave_bank(signal.sample_rate))
    return _estimate_over_bands(subbands, params)
