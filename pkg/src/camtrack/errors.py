"""Exception types shared across the toolkit."""


class TrackError(Exception):
    """Base class for all camtrack errors."""


class MalformedFrameError(TrackError):
    """Frame data does not satisfy its container invariants."""


class EmptyRegionError(TrackError):
    """A rectangle has no overlap with the frame or mask it indexes."""


class SequenceError(TrackError):
    """A frame sequence cannot be enumerated or decoded."""


class ConfigError(TrackError):
    """Configuration file or override value is invalid."""
