"""Blind reverberation-time estimation from single-channel audio.

Four estimators share one statistical core: a fullband decay-track
estimator, two variants that average energy-weighted subband estimates
(uniform cosine-modulated bank or 1/3-octave bank), and a model-based
frequency-dependent estimator for all 30 octave bands. A seeded synthetic
reverberation oracle and a batch CLI round out the toolkit.
"""

from .audio import AudioSignal, FrameConfig, load_wav, resample_to, save_wav
from .baseline import BaselineParams, FullbandResult, estimate_fullband
from .denoise import DenoiseConfig, StftConfig, denoise
from .errors import (
    BlindRtError,
    DegenerateEnergyError,
    EdcRangeError,
    FilterDesignError,
    InsufficientDecaysError,
    LikelihoodUndefinedError,
    UnsupportedEncodingError,
    WavFormatError,
)
from .ml import DecayModelParams, DecaySegment, RtGrid, ml_estimate
from .subband_average import (
    SubbandAverageParams,
    estimate_fullband_dct,
    estimate_fullband_oct,
)
from .subband_model import (
    RayleighModel,
    SubbandModelParams,
    SubbandRtResult,
    estimate_subbands,
    estimate_subbands_direct,
)
from .synth import (
    NoiseSpec,
    SyntheticRirSpec,
    generate_rir,
    measure_t60,
    mix_at_snr,
    reverberate,
    synth_excitation,
)

__version__ = "0.1.0"

__all__ = [
    "AudioSignal",
    "BaselineParams",
    "BlindRtError",
    "DecayModelParams",
    "DecaySegment",
    "DegenerateEnergyError",
    "DenoiseConfig",
    "EdcRangeError",
    "FilterDesignError",
    "FrameConfig",
    "FullbandResult",
    "InsufficientDecaysError",
    "LikelihoodUndefinedError",
    "NoiseSpec",
    "RayleighModel",
    "RtGrid",
    "StftConfig",
    "SubbandAverageParams",
    "SubbandModelParams",
    "SubbandRtResult",
    "SyntheticRirSpec",
    "UnsupportedEncodingError",
    "WavFormatError",
    "denoise",
    "estimate_fullband",
    "estimate_fullband_dct",
    "estimate_fullband_oct",
    "estimate_subbands",
    "estimate_subbands_direct",
    "generate_rir",
    "load_wav",
    "measure_t60",
    "mix_at_snr",
    "ml_estimate",
    "resample_to",
    "reverberate",
    "save_wav",
    "synth_excitation",
]
