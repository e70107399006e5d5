"""Frequency-dependent RT estimation for the 1/3-octave bands.

Blind per-band estimation is only reliable in the upper bands, so the band
profile is modeled by a Rayleigh-shaped bump over an offset,

    f(mu) = mu / (alpha * b^2) * exp(-mu^2 / (2 * alpha^2 * b^2)) + m0,

with alpha fixed at 7.5. The offset m0 is the mean of the upper-band
estimates, the scale b is fit by exhaustive least squares over a small grid,
and the fitted curve is evaluated at every band, upper bands included. The
direct approach (running the per-band estimator on every band) is kept as
the comparison path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import baseline
from .audio import AudioSignal
from .baseline import BaselineParams
from .denoise import denoise
from .errors import InsufficientDecaysError
from .filterbanks import ThirdOctaveBank, analyze_third_octave, default_third_octave_bank
from .subband_average import OCT_FIRST_BAND, _subband_baseline_params

MODEL_ALPHA = 7.5
DEFAULT_B_GRID = tuple(round(0.5 * i, 10) for i in range(1, 11))
MIN_UPPER_BAND_ESTIMATES = 6


@dataclass(frozen=True)
class RayleighModel:
    """Parameters of the band-profile model."""

    scale: float
    offset: float
    alpha: float = MODEL_ALPHA

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class SubbandModelParams:
    first_band: int = OCT_FIRST_BAND
    num_bands: int = 30
    b_grid: tuple[float, ...] = DEFAULT_B_GRID
    alpha: float = MODEL_ALPHA
    min_band_estimates: int = MIN_UPPER_BAND_ESTIMATES
    baseline: BaselineParams = field(default_factory=_subband_baseline_params)

    def __post_init__(self):
        if not 1 <= self.first_band <= self.num_bands:
            raise ValueError("first_band out of range")
        if not self.b_grid or any(b <= 0 for b in self.b_grid):
            raise ValueError("b_grid values must be positive")
        if list(self.b_grid) != sorted(self.b_grid):
            raise ValueError("b_grid must be ascending")


@dataclass(frozen=True)
class SubbandRtResult:
    """Model-based per-band RT estimates for all bands."""

    band_rts: np.ndarray = field(repr=False)
    model: RayleighModel
    upper_estimates: dict[int, float]
    bands_attempted: int


def eval_model(mu, model: RayleighModel):
    """Model RT at band index mu (scalar or array)."""
    mu = np.asarray(mu, dtype=np.float64)
    b2 = model.scale**2
    bump = mu / (model.alpha * b2) * np.exp(-(mu**2) / (2.0 * model.alpha**2 * b2))
    out = bump + model.offset
    return float(out) if out.ndim == 0 else out


def compute_offset(upper_estimates) -> float:
    """Offset m0: arithmetic mean of the upper-band estimates."""
    values = np.asarray(list(upper_estimates), dtype=np.float64)
    if values.size == 0:
        raise ValueError("need at least one upper-band estimate")
    return float(values.mean())


def fit_scale(
    upper_estimates: Mapping[int, float],
    offset: float,
    b_grid=DEFAULT_B_GRID,
    alpha: float = MODEL_ALPHA,
) -> float:
    """Least-squares scale over the grid; ties resolve to the smaller b."""
    if not upper_estimates:
        raise ValueError("need at least one upper-band estimate")
    mus = np.array(sorted(upper_estimates), dtype=np.float64)
    targets = np.array([upper_estimates[int(m)] for m in mus])
    best_b, best_err = None, np.inf
    for b in b_grid:
        model = RayleighModel(scale=b, offset=offset, alpha=alpha)
        residual = eval_model(mus, model) - targets
        err = float(np.sum(residual**2))
        if err < best_err:
            best_b, best_err = b, err
    return best_b


def estimate_subbands(
    signal: AudioSignal,
    params: SubbandModelParams | None = None,
    bank: ThirdOctaveBank | None = None,
) -> SubbandRtResult:
    """Estimate the upper bands directly, fit the model, evaluate all bands.

    Only the upper bands (first_band..num_bands) run the per-band estimator;
    fewer than min_band_estimates successes aborts with an error. Bands that
    fail are excluded from both the offset and the residual sum.
    """
    params = params or SubbandModelParams()
    bank = bank or default_third_octave_bank(signal.sample_rate)
    if bank.num_bands != params.num_bands:
        raise ValueError("bank band count does not match params")
    cleaned = denoise(signal, params.baseline.denoise)
    subbands = analyze_third_octave(cleaned, bank)
    upper: dict[int, float] = {}
    attempted = 0
    for mu in range(params.first_band, params.num_bands + 1):
        attempted += 1
        try:
            upper[mu] = baseline.estimate_track(subbands.band(mu), params.baseline).t60
        except InsufficientDecaysError:
            continue
    if len(upper) < params.min_band_estimates:
        raise InsufficientDecaysError(
            f"only {len(upper)} upper bands produced estimates "
            f"(need {params.min_band_estimates})"
        )
    offset = compute_offset(upper.values())
    scale = fit_scale(upper, offset, params.b_grid, params.alpha)
    model = RayleighModel(scale=scale, offset=offset, alpha=params.alpha)
    band_rts = eval_model(np.arange(1, params.num_bands + 1), model)
    return SubbandRtResult(
        band_rts=band_rts,
        model=model,
        upper_estimates=upper,
        bands_attempted=attempted,
    )


def estimate_subbands_direct(
    signal: AudioSignal,
    params: SubbandModelParams | None = None,
    bank: ThirdOctaveBank | None = None,
) -> np.ndarray:
    """Comparison path: run the per-band estimator on every band.

    Returns one RT per band with NaN where no decays were found.
    """
    params = params or SubbandModelParams()
    bank = bank or default_third_octave_bank(signal.sample_rate)
    cleaned = denoise(signal, params.baseline.denoise)
    subbands = analyze_third_octave(cleaned, bank)
    out = np.full(params.num_bands, np.nan)
    for mu in range(1, params.num_bands + 1):
        try:
            out[mu - 1] = baseline.estimate_track(subbands.band(mu), params.baseline).t60
        except InsufficientDecaysError:
            continue
    return out
