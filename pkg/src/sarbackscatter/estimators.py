"""scikit-learn style wrappers so the chain composes as a ``Pipeline``.

    Pipeline([("rc", RangeCompressor()), ("looks", SublookImager(m=8)),
              ("demod", OOKDemodulator())]).fit(raw).predict(raw)

Inputs are the toolkit's data objects rather than 2-D arrays.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .demod import MeasurementWindows, build_link_report, decide_bits, default_windows, empirical_ber, \
    measure_coherent, measure_scr
from .exceptions import NoModulationDetected, PlanError
from .processor import GridSpec, make_sublooks, max_sublooks, range_compress
from .validation import check_bits, check_int, check_range_compressed, check_raw_echo, check_stack


def _truth_position(obj) -> tuple[float, float]:
    truth = getattr(obj, "truth", None)
    if truth is not None and truth.targets:
        return truth.targets[0].x, truth.targets[0].y
    return 0.0, 0.0


class RangeCompressor(TransformerMixin, BaseEstimator):
    """Matched-filter every pulse; ``upsample`` interpolates the output in range."""

    def __init__(self, upsample: int = 8):
        self.upsample = upsample

    def fit(self, X, y=None):
        X = check_raw_echo(X)
        check_int("upsample", self.upsample)
        self.sample_rate_ = X.sample_rate
        self.n_pulses_ = X.num_pulses
        return self

    def transform(self, X):
        check_is_fitted(self, "sample_rate_")
        return range_compress(check_raw_echo(X), upsample=self.upsample)


class SublookImager(TransformerMixin, BaseEstimator):
    """Backproject ``m`` disjoint pulse blocks onto ``grid``.

    Without a grid, a default 64 x 64 grid (15 m x 6 m) is centred on the
    first truth target, or on the scene centre.
    """

    def __init__(self, m: int = 8, grid: GridSpec | None = None, threads: int = 1):
        self.m = m
        self.grid = grid
        self.threads = threads

    def fit(self, X, y=None):
        X = check_range_compressed(X)
        m = check_int("m", self.m)
        limit = max_sublooks(X.num_pulses)
        if m > limit:
            raise PlanError(f"m={m} is infeasible for {X.num_pulses} pulses; maximum feasible m is {limit}")
        self.grid_ = self.grid if self.grid is not None else GridSpec.centered(center=_truth_position(X))
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        return make_sublooks(check_range_compressed(X), self.m, self.grid_, threads=self.threads)


class OOKDemodulator(BaseEstimator):
    """Threshold the per-look reflector statistic into bits.

    ``statistic`` is ``"scr_db"`` (window power ratio) or ``"coherent"``
    (in-phase reflector amplitude).  ``predict`` raises
    :class:`NoModulationDetected` for a flat series.
    """

    def __init__(self, windows: MeasurementWindows | None = None, statistic: str = "scr_db",
                 looks_per_symbol: int = 2, threshold: str = "extremes", min_contrast_db: float = 1.0,
                 window_size: int = 3):
        self.windows = windows
        self.statistic = statistic
        self.looks_per_symbol = looks_per_symbol
        self.threshold = threshold
        self.min_contrast_db = min_contrast_db
        self.window_size = window_size

    def fit(self, X, y=None):
        X = check_stack(X)
        check_int("looks_per_symbol", self.looks_per_symbol)
        if self.statistic not in ("scr_db", "coherent"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.windows is not None:
            self.windows.check(X.grid)
            self.windows_ = self.windows
        else:
            self.windows_ = default_windows(X.grid, *_truth_position(X), size=check_int("window_size", self.window_size))
        return self

    def series(self, X):
        check_is_fitted(self, "windows_")
        X = check_stack(X)
        return measure_coherent(X, self.windows_) if self.statistic == "coherent" else measure_scr(X, self.windows_)

    def decide(self, X):
        return decide_bits(self.series(X), looks_per_symbol=self.looks_per_symbol, threshold=self.threshold,
                           min_contrast_db=self.min_contrast_db)

    def predict(self, X) -> np.ndarray:
        dec = self.decide(X)
        if not dec.modulated:
            raise NoModulationDetected(
                f"sublook contrast {dec.contrast_db:.2f} dB is below {self.min_contrast_db} dB"
            )
        return dec.bits

    def score(self, X, y) -> float:
        """1 - BER against the true bits ``y``."""
        return 1.0 - empirical_ber(self.predict(X), check_bits(y))

    def report(self, X, tx_bits=None, target_rcs=None):
        check_is_fitted(self, "windows_")
        return build_link_report(check_stack(X), self.windows_, tx_bits=tx_bits,
                                 looks_per_symbol=self.looks_per_symbol, statistic=self.statistic,
                                 threshold=self.threshold, min_contrast_db=self.min_contrast_db,
                                 target_rcs=target_rcs)
