"""Statistical sound-decay model and maximum-likelihood RT estimation.

A sound decay observed after a source pause is modeled as zero-mean Gaussian
noise with an exponentially decaying envelope,

    d(k) = A * v(k) * exp(-rho * k * Ts),    v(k) i.i.d. N(0, 1),

so the per-sample decay factor is a = exp(-Ts * rho). The decay rate rho and
the reverberation time are interchangeable through T60 = 3 / (rho * log10(e)).
The RT estimate is the candidate from a finite grid that maximizes the
log-likelihood of an observed decay segment; the amplitude A is eliminated
analytically, which makes the argmax invariant to segment scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LikelihoodUndefinedError

# T60 = RT_RHO_CONSTANT / rho; this is 3 / log10(e) = 3 * ln(10).
RT_RHO_CONSTANT = 3.0 * np.log(10.0)

# Exponent threshold above which the likelihood sum is rescaled before
# accumulation; segments long enough to overflow exp() otherwise.
_GUARD_EXPONENT = 300.0


def decay_rate_to_rt(rho: float) -> float:
    """Convert a decay rate (1/s) to the reverberation time in seconds."""
    if rho <= 0:
        raise ValueError(f"decay rate must be positive, got {rho}")
    return RT_RHO_CONSTANT / rho


def rt_to_decay_rate(t60: float) -> float:
    """Convert a reverberation time in seconds to the decay rate (1/s)."""
    if t60 <= 0:
        raise ValueError(f"reverberation time must be positive, got {t60}")
    return RT_RHO_CONSTANT / t60


@dataclass(frozen=True)
class RtGrid:
    """Finite set of candidate reverberation times for the ML search."""

    rt_values: tuple[float, ...]
    sample_rate: int = 16000

    def __post_init__(self):
        vals = tuple(float(v) for v in self.rt_values)
        if not vals:
            raise ValueError("grid must contain at least one RT value")
        if any(v <= 0 for v in vals):
            raise ValueError("all grid RT values must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid RT values must be strictly increasing")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "rt_values", vals)

    @classmethod
    def default(cls, sample_rate: int = 16000) -> "RtGrid":
        """Candidates 0.2 s to 1.1 s in steps of 0.1 s."""
        return cls(tuple(round(0.2 + 0.1 * i, 10) for i in range(10)), sample_rate)

    def decay_factors(self) -> np.ndarray:
        """Per-sample decay factor a = exp(-Ts * rho) for every candidate."""
        rts = np.asarray(self.rt_values)
        return np.exp(-(RT_RHO_CONSTANT / rts) / self.sample_rate)

    def __len__(self) -> int:
        return len(self.rt_values)


@dataclass(frozen=True)
class DecaySegment:
    """A run of consecutive sub-frames flagged as a sound decay."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a decay segment needs at least 2 samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("decay segment contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class DecayModelParams:
    """Parameters of the seeded decay generator."""

    amplitude: float
    decay_rate: float
    length: int
    seed: int
    sample_rate: int = 16000

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.decay_rate <= 0:
            raise ValueError("decay_rate must be positive")
        if self.length < 2:
            raise ValueError("length must be >= 2")


def generate_decay(params: DecayModelParams) -> DecaySegment:
    """Draw one decay realization: A * v(k) * exp(-rho * k * Ts)."""
    rng = np.random.default_rng(params.seed)
    k = np.arange(params.length)
    envelope = params.amplitude * np.exp(-params.decay_rate * k / params.sample_rate)
    return DecaySegment(rng.standard_normal(params.length) * envelope)


def _as_samples(segment) -> np.ndarray:
    if isinstance(segment, DecaySegment):
        return segment.samples
    return np.asarray(segment, dtype=np.float64)


def log_likelihood(segment, a: float) -> float:
    """Log-likelihood of a decay segment under decay factor ``a``.

    Evaluates, with N the segment length and the amplitude eliminated,

        L = -(N/2) * [(N-1)*ln(a) + ln((2*pi/N) * sum_i a^(-2i) * y_i^2) + 1].

    The sum grows like a^(-2N); when the leading exponent exceeds the guard
    threshold it is factored out analytically so the accumulation cannot
    overflow. The result is exact either way.
    """
    y = _as_samples(segment)
    n = y.size
    if n < 1:
        raise ValueError("segment must not be empty")
    if not 0.0 < a < 1.0:
        raise ValueError(f"decay factor must lie in (0, 1), got {a}")
    if not np.any(y):
        raise LikelihoodUndefinedError("all-zero segment has no defined likelihood")
    ln_a = np.log(a)
    expo = -2.0 * np.arange(n) * ln_a
    shift = expo[-1] if expo[-1] > _GUARD_EXPONENT else 0.0
    s = float(np.sum(np.exp(expo - shift) * y * y))
    ln_sum = shift + np.log(s)
    return float(-(n / 2.0) * ((n - 1.0) * ln_a + np.log(2.0 * np.pi / n) + ln_sum + 1.0))


def ml_estimate(segment, grid: RtGrid) -> float:
    """RT candidate maximizing the decay log-likelihood; ties go to the
    smaller RT."""
    y = _as_samples(segment)
    if not np.any(y):
        raise LikelihoodUndefinedError("all-zero segment has no defined likelihood")
    scores = likelihood_profile(y, grid)
    return grid.rt_values[int(np.argmax(scores))]


def likelihood_profile(segment, grid: RtGrid) -> np.ndarray:
    """Log-likelihood evaluated at every grid candidate."""
    y = _as_samples(segment)
    n = y.size
    factors = grid.decay_factors()
    ln_a = np.log(factors)
    top = -2.0 * (n - 1) * ln_a
    scores = np.empty(len(factors))
    i = np.arange(n)
    for j in range(len(factors)):
        shift = top[j] if top[j] > _GUARD_EXPONENT else 0.0
        s = float(np.sum(np.exp(-2.0 * i * ln_a[j] - shift) * y * y))
        ln_sum = shift + np.log(s)
        scores[j] = -(n / 2.0) * ((n - 1.0) * ln_a[j] + np.log(2.0 * np.pi / n) + ln_sum + 1.0)
    return scores


class GridLikelihood:
    """Precomputed power table for repeated ML estimation on one grid.

    Evaluating many segments against the same grid dominates the estimator
    runtime; the a^(-2i) powers are precomputed up to a maximum segment
    length when that is safe, with a per-call fallback to the guarded path.
    """

    def __init__(self, grid: RtGrid, max_len: int):
        self.grid = grid
        self.max_len = max_len
        self._ln_a = np.log(grid.decay_factors())
        max_expo = -2.0 * (max_len - 1) * self._ln_a
        if np.max(max_expo) <= _GUARD_EXPONENT:
            i = np.arange(max_len)
            self._powers = np.exp(-2.0 * np.outer(self._ln_a, i))
        else:
            self._powers = None

    def estimate(self, y: np.ndarray) -> float:
        n = y.size
        if self._powers is None or n > self.max_len:
            return ml_estimate(y, self.grid)
        if not np.any(y):
            raise LikelihoodUndefinedError("all-zero segment has no defined likelihood")
        s = self._powers[:, :n] @ (y * y)
        ln_a = self._ln_a
        scores = -(n / 2.0) * ((n - 1.0) * ln_a + np.log(2.0 * np.pi / n) + np.log(s) + 1.0)
        return self.grid.rt_values[int(np.argmax(scores))]
