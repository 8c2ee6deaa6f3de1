"""Shared domain types: tick/quote series, session windows, tuning parameters.

Times are fractional seconds since midnight (Eastern), millisecond
resolution. Estimators always work on natural-log prices, which are
derived lazily from the stored price levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import CrossedQuote, MalformedSIC


@dataclass(frozen=True)
class SessionWindow:
    """Half-open trading window [start, end) in seconds since midnight."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"invalid session window [{self.start}, {self.end})")


REGULAR = SessionWindow(34200.0, 57600.0)      # 9:30am - 4:00pm
AFTER_HOURS = SessionWindow(57600.0, 66600.0)  # 4:00pm - 6:30pm
EXTENDED = SessionWindow(34200.0, 66600.0)     # 9:30am - 6:30pm
PRE_MARKET = SessionWindow(21600.0, 34200.0)   # 6:00am - 9:30am


def _as_float_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class TickSeries:
    """Timestamped transaction prices for one symbol-session."""

    symbol: str
    date: str
    times: np.ndarray
    prices: np.ndarray
    volumes: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "times", _as_float_array(self.times))
        object.__setattr__(self, "prices", _as_float_array(self.prices))
        if self.volumes is not None:
            object.__setattr__(self, "volumes", _as_float_array(self.volumes))
        if len(self.times) != len(self.prices):
            raise ValueError("times and prices must have equal length")
        if self.volumes is not None and len(self.volumes) != len(self.times):
            raise ValueError("volumes length mismatch")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("tick times must be strictly increasing")
        if np.any(self.prices <= 0):
            raise ValueError("prices must be positive")
        if self.volumes is not None and np.any(self.volumes < 0):
            raise ValueError("volumes must be nonnegative")

    def __len__(self) -> int:
        return len(self.times)

    def log_prices(self) -> np.ndarray:
        return np.log(self.prices)

    def take(self, mask_or_index) -> "TickSeries":
        vols = self.volumes[mask_or_index] if self.volumes is not None else None
        return TickSeries(self.symbol, self.date, self.times[mask_or_index],
                          self.prices[mask_or_index], vols)


@dataclass(frozen=True)
class QuoteSeries:
    """Timestamped best bid/ask pairs for one symbol-session."""

    symbol: str
    date: str
    times: np.ndarray
    bids: np.ndarray
    asks: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _as_float_array(self.times))
        object.__setattr__(self, "bids", _as_float_array(self.bids))
        object.__setattr__(self, "asks", _as_float_array(self.asks))
        if not (len(self.times) == len(self.bids) == len(self.asks)):
            raise ValueError("times, bids and asks must have equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) < 0):
            raise ValueError("quote times must be nondecreasing")
        if np.any(self.bids <= 0) or np.any(self.asks <= 0):
            raise ValueError("quotes must be positive")
        crossed = np.nonzero(self.bids > self.asks)[0]
        if crossed.size:
            raise CrossedQuote(int(crossed[0]) + 1, "bid above ask")

    def __len__(self) -> int:
        return len(self.times)

    def take(self, mask_or_index) -> "QuoteSeries":
        return QuoteSeries(self.symbol, self.date, self.times[mask_or_index],
                           self.bids[mask_or_index], self.asks[mask_or_index])


#: Identifier of the default pre-averaging weight g(x) = min(x, 1-x).
MIN_X_1MX = "MIN_X_1MX"

# name -> (callable g, limit of int g'^2, limit of int g^2)
WEIGHT_FUNCTIONS = {
    MIN_X_1MX: (lambda x: np.minimum(x, 1.0 - x), 1.0, 1.0 / 12.0),
}


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning parameters for the pre-averaging estimators and jump test.

    Defaults follow the baseline tuning used throughout: theta = 1/2,
    c = 5 truncation standard deviations, L = p = 10 for the subsampled
    covariance, and omega_bar = 0.24 for the truncation rate.
    """

    theta: float = 0.5
    trunc_c: float = 5.0
    trunc_omega_bar: float = 0.24
    subsample_L: int = 10
    subsample_p: int = 10
    noise_h_exponent: float = 1.0 / 5.0
    noise_l_exponent: float = 1.0 / 8.0
    weight: str = MIN_X_1MX

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.trunc_c <= 0:
            raise ValueError("trunc_c must be positive")
        if not 0 < self.trunc_omega_bar < 0.25:
            raise ValueError("trunc_omega_bar must lie in (0, 1/4)")
        if self.subsample_p < 2:
            raise ValueError("subsample_p must be >= 2")
        if self.subsample_L < 2:
            raise ValueError("subsample_L must be >= 2")
        if self.weight not in WEIGHT_FUNCTIONS:
            raise ValueError(f"unknown weight function {self.weight!r}")

    def k_n(self, n: int) -> int:
        """Pre-averaging window k_n = floor(theta * sqrt(n))."""
        return int(math.floor(self.theta * math.sqrt(n)))

    def h_n(self, n: int) -> int:
        return int(math.ceil(n ** self.noise_h_exponent))

    def l_n(self, n: int) -> int:
        return int(math.ceil(n ** self.noise_l_exponent))

    def with_(self, **kwargs) -> "EstimatorConfig":
        return replace(self, **kwargs)


def _validate_sic(sic: str) -> str:
    s = str(sic).strip()
    if len(s) != 4 or not s.isdigit():
        raise MalformedSIC(f"SIC code must be exactly 4 digits, got {sic!r}")
    return s


@dataclass(frozen=True)
class Announcement:
    """Earnings announcement metadata for one symbol-date."""

    symbol: str
    date: str
    time: float                 # seconds since midnight
    eps_actual: float
    eps_mean: float
    eps_std: float
    n_analysts: int
    sic: str

    def __post_init__(self):
        object.__setattr__(self, "sic", _validate_sic(self.sic))
        if self.eps_std < 0:
            raise ValueError("eps_std must be nonnegative")
        if self.n_analysts < 0:
            raise ValueError("n_analysts must be nonnegative")


Series = Union[TickSeries, QuoteSeries]


def session_slice(series: Series, window: SessionWindow) -> Series:
    """Restrict a series to observations with start <= t < end.

    Order is preserved and an empty result is allowed. Slicing is
    idempotent, and the EXTENDED window equals REGULAR + AFTER_HOURS.
    """
    mask = (series.times >= window.start) & (series.times < window.end)
    return series.take(mask)
