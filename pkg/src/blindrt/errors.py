"""Exception types shared across the toolkit."""


class BlindRtError(Exception):
    """Base class for all toolkit errors."""


class WavFormatError(BlindRtError):
    """The file is not a readable RIFF/WAVE container."""


class UnsupportedEncodingError(WavFormatError):
    """The WAV sample encoding is not PCM16 or IEEE float32."""


class InsufficientDecaysError(BlindRtError):
    """No usable sound decays were found in the signal.

    Carries the number of frames that were scanned before giving up.
    """

    def __init__(self, message: str = "no sound decays detected", frames_scanned: int = 0):
        super().__init__(message)
        self.frames_scanned = frames_scanned


class LikelihoodUndefinedError(BlindRtError):
    """The decay likelihood is undefined (all-zero segment)."""


class DegenerateEnergyError(BlindRtError):
    """All considered subbands carry zero energy; weights are undefined."""


class EdcRangeError(BlindRtError):
    """The energy decay curve lacks the dynamic range needed for a fit."""


class FilterDesignError(BlindRtError):
    """A filter design failed to meet its specification.

    Carries the attenuation that was actually achieved, in dB.
    """

    def __init__(self, message: str, achieved_db: float):
        super().__init__(message)
        self.achieved_db = achieved_db
