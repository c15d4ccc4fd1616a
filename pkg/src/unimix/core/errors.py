"""Exception hierarchy shared by all modules."""


class UnimixError(ValueError):
    """Base class for domain errors raised by unimix."""


class AlphabetError(UnimixError):
    """A symbol or string does not belong to the expected alphabet."""


class ZeroHistoryError(UnimixError):
    """Conditioning on a history of mass zero."""


class DegenerateError(UnimixError):
    """A construction has no well-defined result for its input."""


class NotAMeasureError(UnimixError):
    """An operation that requires a measure received a semimeasure."""


class HorizonError(UnimixError):
    """A requested horizon exceeds an enumeration or resource cap."""


class MembershipError(UnimixError):
    """A parameter is not a member of the class it was looked up in."""


class ConfigError(UnimixError):
    """Invalid experiment configuration or model description."""
