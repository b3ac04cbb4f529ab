"""Exception types raised by the library."""


class EbicrError(Exception):
    """Base class for all library errors."""


class RankDeficient(EbicrError, ValueError):
    """The selected design columns do not have full column rank."""


class ZeroColumn(EbicrError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"design column {index} has (near) zero norm")


class ZeroSignal(EbicrError, ValueError):
    """A·X is identically zero, so the SNR is undefined."""


class ZeroResponse(EbicrError, ValueError):
    """The response matrix is identically zero."""


class IndexOutOfRange(EbicrError, IndexError):
    pass


class TooManyCandidates(EbicrError, ValueError):
    pass


class PathTooShort(EbicrError, ValueError):
    pass


class ConfigError(EbicrError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
