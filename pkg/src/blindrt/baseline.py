"""Fullband RT estimation: denoise, detect sound decays, ML per decay,
histogram over recent estimates, recursive smoothing, final time average.

A frame is flagged as containing a sound decay when energy, maximum and
minimum of consecutive sub-frames all move the way a decaying noise process
moves, strictly, for at least min_subframes-1 comparisons starting at the
first sub-frame. Each detected decay yields one grid ML estimate; the mode
of the last histogram_len estimates is smoothed recursively and the final
value is the mean of the smoothed track over the frames that produced
estimates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioSignal, Frame, FrameConfig
from .denoise import DenoiseConfig, denoise
from .errors import InsufficientDecaysError
from .ml import DecaySegment, GridLikelihood, RtGrid

DEFAULT_HISTOGRAM_LEN = 800
DEFAULT_SMOOTHING = 0.95


@dataclass(frozen=True)
class BaselineParams:
    frame: FrameConfig = field(default_factory=FrameConfig)
    histogram_len: int = DEFAULT_HISTOGRAM_LEN
    smoothing: float = DEFAULT_SMOOTHING
    grid: RtGrid = field(default_factory=RtGrid.default)
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)

    def __post_init__(self):
        if self.histogram_len < 1:
            raise ValueError("histogram_len must be >= 1")
        if not 0.0 < self.smoothing < 1.0:
            raise ValueError("smoothing must lie in (0, 1)")


@dataclass(frozen=True)
class FullbandResult:
    """Outcome of a fullband estimation run.

    n1/n2 are the first and last frame indices that produced an estimate;
    track holds the smoothed RT recorded at each such frame. For the
    subband-averaged estimators the per-band values and weights are attached.
    """

    t60: float
    frames_with_estimates: int
    n1: int
    n2: int
    track: tuple[float, ...] = ()
    band_rts: dict[int, float] | None = None
    band_weights: dict[int, float] | None = None


class HistogramTracker:
    """Ring of the most recent grid estimates with per-bin counts."""

    def __init__(self, grid: RtGrid, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.grid = grid
        self.capacity = capacity
        self._ring: deque[int] = deque()
        self.counts = np.zeros(len(grid), dtype=np.int64)
        self._index = {v: i for i, v in enumerate(grid.rt_values)}

    def push(self, estimate: float) -> float:
        """Insert one grid estimate and return the current histogram mode.

        The oldest entry is evicted once the ring is full; count ties
        resolve to the smaller RT.
        """
        try:
            idx = self._index[estimate]
        except KeyError:
            raise ValueError(f"estimate {estimate} is not a grid value") from None
        if len(self._ring) == self.capacity:
            self.counts[self._ring.popleft()] -= 1
        self._ring.append(idx)
        self.counts[idx] += 1
        return self.mode()

    def mode(self) -> float:
        if not self._ring:
            raise ValueError("histogram is empty")
        return self.grid.rt_values[int(np.argmax(self.counts))]

    def __len__(self) -> int:
        return len(self._ring)


def smooth(prev: float, new: float, beta: float) -> float:
    """One recursive smoothing step: beta*prev + (1-beta)*new."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    return beta * prev + (1.0 - beta) * new


def _subframe_stats(frames: np.ndarray, cfg: FrameConfig):
    """Energy, max and min per sub-frame for a (n_frames, frame_len) block."""
    n = frames.shape[0]
    sub = frames.reshape(n, cfg.subframes_per_frame, cfg.subframe_len)
    energy = np.einsum("flp,flp->fl", sub, sub)
    return energy, sub.max(axis=2), sub.min(axis=2)


def _leading_runs(frames: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Per frame: number of leading sub-frame comparisons that all pass."""
    energy, mx, mn = _subframe_stats(frames, cfg)
    w = cfg.weight
    cond = (
        (energy[:, :-1] > w * energy[:, 1:])
        & (mx[:, :-1] > w * mx[:, 1:])
        & (mn[:, :-1] < w * mn[:, 1:])
    )
    full = cond.all(axis=1)
    return np.where(full, cond.shape[1], np.argmin(cond, axis=1))


def detect_decay(frame: Frame, cfg: FrameConfig) -> DecaySegment | None:
    """Return the decay segment anchored at sub-frame 0, if one is present.

    The segment spans the maximal run of consecutive sub-frames from the
    start of the frame whose energy, maximum and minimum all keep moving in
    the decay direction; it is returned only when the run covers at least
    min_subframes-1 comparisons.
    """
    run = int(_leading_runs(frame.data[np.newaxis, :], cfg)[0])
    if run < cfg.min_subframes - 1:
        return None
    return DecaySegment(frame.data[: (run + 1) * cfg.subframe_len])


def update_histogram(tracker: HistogramTracker, estimate: float) -> float:
    """Insert a new ML estimate and return the preliminary (mode) RT."""
    return tracker.push(estimate)


def estimate_track(samples: np.ndarray, params: BaselineParams) -> FullbandResult:
    """Run detection, ML, histogram and smoothing over an already denoised
    sample sequence."""
    cfg = params.frame
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.size < cfg.frame_len:
        raise InsufficientDecaysError("signal shorter than one frame", frames_scanned=0)
    n_frames = (x.size - cfg.frame_len) // cfg.hop + 1
    s = x.strides[0]
    frames = np.lib.stride_tricks.as_strided(
        x, shape=(n_frames, cfg.frame_len), strides=(s * cfg.hop, s), writeable=False
    )
    runs = _leading_runs(frames, cfg)
    detected = np.nonzero(runs >= cfg.min_subframes - 1)[0]
    if detected.size == 0:
        raise InsufficientDecaysError(frames_scanned=n_frames)

    evaluator = GridLikelihood(params.grid, cfg.frame_len)
    tracker = HistogramTracker(params.grid, params.histogram_len)
    track: list[float] = []
    recorded_frames: list[int] = []
    smoothed = None
    for idx in detected:
        seg = frames[idx, : (runs[idx] + 1) * cfg.subframe_len]
        estimate = evaluator.estimate(seg)
        preliminary = tracker.push(estimate)
        if smoothed is None:
            smoothed = preliminary
        else:
            smoothed = smooth(smoothed, preliminary, params.smoothing)
        track.append(smoothed)
        recorded_frames.append(int(idx))
    return FullbandResult(
        t60=float(np.mean(track)),
        frames_with_estimates=len(track),
        n1=recorded_frames[0],
        n2=recorded_frames[-1],
        track=tuple(track),
    )


def estimate_fullband(signal: AudioSignal, params: BaselineParams | None = None) -> FullbandResult:
    """Denoise, then estimate the fullband RT from the decay track."""
    params = params or BaselineParams()
    if signal.sample_rate != params.grid.sample_rate:
        raise ValueError(
            f"signal rate {signal.sample_rate} does not match the estimator's "
            f"{params.grid.sample_rate}; resample first"
        )
    cleaned = denoise(signal, params.denoise)
    return estimate_track(cleaned.samples, params)
