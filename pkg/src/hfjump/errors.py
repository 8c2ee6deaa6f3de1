"""Exception types shared across the library.

Row-oriented parse errors carry the 1-based data row number (header
excluded) so CLI messages can point at the offending line.
"""


class HFJumpError(Exception):
    """Base class for all library errors."""


class InsufficientData(HFJumpError):
    """Not enough observations for the requested estimator or test."""


class DegenerateScale(HFJumpError):
    """Scale estimate is zero, so a truncation threshold cannot be formed."""


class DomainError(HFJumpError):
    """Parameter outside its admissible range."""


class RowError(HFJumpError):
    """Base for errors tied to a specific input row."""

    def __init__(self, row: int, message: str = ""):
        self.row = row
        super().__init__(f"row {row}: {message}" if message else f"row {row}")


class ParseError(RowError):
    """Malformed CSV row."""


class NonPositivePrice(RowError):
    """Price field is zero or negative."""


class CrossedQuote(RowError):
    """Bid exceeds ask."""


class NoVolume(HFJumpError):
    """No signed volume in the aggregation window."""


class DegenerateSigma(HFJumpError):
    """Analyst dispersion below the stability floor."""


class ZeroRV(HFJumpError):
    """Realized variance is zero; jump proportion undefined."""


class MalformedSIC(HFJumpError):
    """SIC code is not exactly four digits."""


class ZeroTotalReturn(HFJumpError):
    """An announcement's total event return is zero; weights undefined."""

    def __init__(self, announcement: int):
        self.announcement = announcement
        super().__init__(f"announcement {announcement} has zero total return")


class Separation(HFJumpError):
    """Logit likelihood is unbounded (perfect separation)."""


class RankDeficient(HFJumpError):
    """Design matrix does not have full column rank."""


class MissingFactorMonth(HFJumpError):
    """A month in the return series is not covered by the factor file."""


class NoPreTick(HFJumpError):
    """No transaction strictly before the event time."""


class NoPostTick(HFJumpError):
    """No transaction inside the post-event window."""
