"""Historical-simulation estimators for tail risk measures.

Everything here is nonparametric: the estimators operate on the empirical
distribution of an observed return series (gains positive, losses negative).
Four quantities are computed:

* ``var_hs``  - value at risk, the negated empirical lower quantile.
* ``es_hs``   - expected shortfall, the negated mean of the tail.
* ``sd_hs``   - shortfall deviation, the p-norm of the amounts by which
  observations fall short of the tail mean.
* ``sdr_hs``  - shortfall deviation risk, expected shortfall plus a
  dispersion penalty ``(1 - alpha) ** beta * sd``.

Two estimator modes are supported for the tail mean.  ``"literal"`` averages
the observations strictly below the quantile and divides by ``N * alpha``;
it reproduces the published simulation design but is not subadditive and
degenerates on tied tails.  ``"coherent"`` averages the fractional tail of
the empirical distribution (the lowest ``N * alpha`` observations, with the
boundary order statistic weighted fractionally); it is the plug-in form of
the tail mean of the empirical law and keeps every coherence axiom exactly,
so it is the default everywhere except the replication harness.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTailWarning,
    DomainError,
    InsufficientDataError,
    InsufficientTailError,
    InvalidParameterError,
)

__all__ = [
    "ReturnSeries",
    "RiskConfig",
    "RiskReport",
    "DescriptiveStats",
    "log_returns",
    "var_hs",
    "es_hs",
    "sd_hs",
    "sdr_hs",
    "descriptive_stats",
]

_MODES = ("literal", "coherent")


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """An immutable, finite, one-dimensional series of returns.

    Parameters
    ----------
    values : array_like
        Ordered observations; must be finite and non-empty.  The array is
        copied and frozen so a series can be shared between computations.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 1:
            raise InvalidParameterError(
                f"a return series must be one-dimensional, got shape {arr.shape}"
            )
        if arr.size == 0:
            raise InsufficientDataError("a return series needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise DomainError("a return series must contain only finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class RiskConfig:
    """Estimation parameters shared by the measures.

    alpha is the tail probability in (0, 1); beta >= 0 steers the dispersion
    penalty (1 - alpha) ** beta; p >= 1 (finite) is the norm power of the
    shortfall deviation; mode selects the tail-mean estimator.
    """

    alpha: float
    beta: float = 1.0
    p: float = 2.0
    mode: str = "coherent"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidParameterError(
                f"alpha must lie strictly between 0 and 1, got {self.alpha}"
            )
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise InvalidParameterError(f"beta must be finite and >= 0, got {self.beta}")
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise InvalidParameterError(
                f"p must be finite and >= 1, got {self.p} (the sup norm needs a different estimator)"
            )
        if self.mode not in _MODES:
            raise InvalidParameterError(
                f"mode must be one of {_MODES}, got {self.mode!r}"
            )

    def validate_for(self, series: ReturnSeries) -> None:
        """Raise unless the paired series can resolve the alpha tail."""
        _tail_index(len(series), self.alpha)

    @property
    def penalty(self) -> float:
        """The dispersion weight (1 - alpha) ** beta."""
        return (1.0 - self.alpha) ** self.beta


@dataclass(frozen=True)
class RiskReport:
    """All four measures for one series under one configuration.

    var, es, sd and sdr are loss magnitudes (positive when the tail loses
    money).  q_alpha = -var and e_alpha = -es restate the quantile and the
    tail mean on the return scale.  tail_count is the number of
    observations the tail mean averaged; degenerate_tail flags a literal
    mode estimate whose strict tail was empty.
    """

    var: float
    es: float
    sd: float
    sdr: float
    q_alpha: float
    e_alpha: float
    tail_count: int
    degenerate_tail: bool = False


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample moments of a return series.

    st_dev uses the N-1 divisor.  skewness and kurtosis are the third and
    fourth standardized central moments (kurtosis is raw: a mesokurtic
    sample scores 3); both are NaN when the sample variance is zero.
    """

    n: int
    mean: float
    st_dev: float
    skewness: float
    kurtosis: float
    minimum: float
    maximum: float

    @property
    def moments_defined(self) -> bool:
        return not (math.isnan(self.skewness) or math.isnan(self.kurtosis))


# ---------------------------------------------------------------------------
# sorted-array core
#
# All estimators sort once and reduce over the sorted array, so results are
# bit-identical under any permutation of the input (law invariance holds
# exactly, not just to rounding).
# ---------------------------------------------------------------------------


def _tail_index(n: int, alpha: float) -> tuple[float, int]:
    """Return (n * alpha, k) where k = ceil(n * alpha) is the 1-based rank
    of the order statistic realizing the empirical alpha-quantile."""
    if not (0.0 < alpha < 1.0):
        raise InvalidParameterError(
            f"alpha must lie strictly between 0 and 1, got {alpha}"
        )
    na = n * alpha
    if na < 1.0:
        raise InsufficientTailError(
            f"need N * alpha >= 1 to resolve the tail: N={n}, alpha={alpha} gives {na:.6g}"
        )
    return na, math.ceil(na)


def _var_sorted(xs: np.ndarray, alpha: float) -> float:
    _, k = _tail_index(xs.size, alpha)
    return -float(xs[k - 1])


def _es_sorted(xs: np.ndarray, alpha: float, mode: str) -> tuple[float, int, bool]:
    """Tail mean estimate on a sorted array.

    Returns (es, tail_count, degenerate) where tail_count is the number of
    observations strictly below the quantile (literal) or k (coherent).
    """
    na, k = _tail_index(xs.size, alpha)
    q = xs[k - 1]
    if mode == "literal":
        strict = int(np.searchsorted(xs, q, side="left"))
        if strict == 0:
            warnings.warn(
                "all tail observations tie the quantile; the strict-tail mean "
                "is empty and the estimate degenerates to 0",
                DegenerateTailWarning,
                stacklevel=3,
            )
            return 0.0, 0, True
        return -float(np.sum(xs[:strict])) / na, strict, False
    if mode == "coherent":
        # fractional tail average: full weight on the k-1 lowest order
        # statistics, weight na - (k - 1) on the boundary one.  Evaluated
        # in gap form, es = sum(q - x_i)/na - q with every gap >= 0, so
        # es >= -q holds in floating point, not just in exact arithmetic,
        # and constant tails give es == var with no rounding residue.
        gap_sum = float(np.sum(q - xs[: k - 1]))
        return gap_sum / na - float(q), k, False
    raise InvalidParameterError(f"mode must be one of {_MODES}, got {mode!r}")


def _sd_sorted(xs: np.ndarray, e: float, p: float) -> float:
    """p-norm of max(e - x, 0) over the full sample (divisor N)."""
    below = int(np.searchsorted(xs, e, side="left"))
    if below == 0:
        return 0.0
    gaps = e - xs[:below]
    return float((np.sum(gaps**p) / xs.size) ** (1.0 / p))


def _report_sorted(xs: np.ndarray, config: RiskConfig) -> RiskReport:
    na, k = _tail_index(xs.size, config.alpha)
    q = float(xs[k - 1])
    es, tail_count, degenerate = _es_sorted(xs, config.alpha, config.mode)
    sd = _sd_sorted(xs, -es, config.p)
    sdr = es + config.penalty * sd
    return RiskReport(
        var=-q,
        es=es,
        sd=sd,
        sdr=sdr,
        q_alpha=q,
        e_alpha=-es,
        tail_count=tail_count,
        degenerate_tail=degenerate,
    )


# ---------------------------------------------------------------------------
# public estimators
# ---------------------------------------------------------------------------


def log_returns(prices) -> ReturnSeries:
    """Convert a level series to log returns: ln(p_t) - ln(p_{t-1}).

    Prices must be strictly positive and at least two long; the result is
    one observation shorter than the input.
    """
    arr = np.asarray(prices, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError(
            f"prices must be one-dimensional, got shape {arr.shape}"
        )
    if arr.size < 2:
        raise InsufficientDataError(
            f"need at least two prices to form a return, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise DomainError("prices must be finite")
    if np.any(arr <= 0.0):
        bad = int(np.argmax(arr <= 0.0))
        raise DomainError(
            f"prices must be strictly positive for log returns, got {arr[bad]} at position {bad}"
        )
    return ReturnSeries(np.diff(np.log(arr)))


def var_hs(series: ReturnSeries, alpha: float) -> float:
    """Value at risk: the negated empirical alpha-quantile.

    The quantile is -inf{x : F(x) >= alpha} under the empirical
    distribution, realized by the ceil(N * alpha)-th ascending order
    statistic.  Requires N * alpha >= 1.
    """
    return _var_sorted(np.sort(series.values), alpha)


def es_hs(series: ReturnSeries, alpha: float, mode: str = "coherent") -> float:
    """Expected shortfall: the negated tail mean.

    mode "literal" divides the sum of observations strictly below the
    quantile by N * alpha and degenerates to 0 (with a
    DegenerateTailWarning) when every tail observation ties the quantile.
    mode "coherent" averages the fractional lowest-N*alpha tail of the
    empirical distribution and is subadditive on every sample.
    """
    es, _, _ = _es_sorted(np.sort(series.values), alpha, mode)
    return es


def sd_hs(series: ReturnSeries, alpha: float, p: float = 2.0, mode: str = "coherent") -> float:
    """Shortfall deviation: the p-norm of shortfalls below the tail mean.

    With e = -es_hs(series, alpha, mode), returns
    ``(mean(max(e - x, 0) ** p)) ** (1/p)`` over the full sample.  The
    divisor is N, not the tail count, because the norm is taken under the
    whole distribution.
    """
    cfg = RiskConfig(alpha=alpha, p=p, mode=mode)
    xs = np.sort(series.values)
    es, _, _ = _es_sorted(xs, alpha, mode)
    return _sd_sorted(xs, -es, cfg.p)


def sdr_hs(series: ReturnSeries, config: RiskConfig) -> RiskReport:
    """Shortfall deviation risk and its components.

    sdr = es + (1 - alpha) ** beta * sd.  beta = 0 recovers the plain sum
    es + sd; large beta collapses the penalty and sdr approaches es.
    """
    config.validate_for(series)
    return _report_sorted(np.sort(series.values), config)


def descriptive_stats(series: ReturnSeries) -> DescriptiveStats:
    """Mean, sample standard deviation, skewness, kurtosis and range.

    Requires N >= 2 for the standard deviation and N >= 4 for kurtosis;
    the error names the statistic that lacks data.  Zero-variance samples
    get NaN skewness and kurtosis rather than an error.
    """
    x = series.values
    n = x.size
    if n < 2:
        raise InsufficientDataError(
            f"standard deviation needs at least 2 observations, got {n}"
        )
    if n < 4:
        raise InsufficientDataError(f"kurtosis needs at least 4 observations, got {n}")
    mean = float(np.mean(x))
    centered = x - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        skew = kurt = float("nan")
    else:
        skew = float(np.mean(centered**3)) / m2**1.5
        kurt = float(np.mean(centered**4)) / m2**2
    return DescriptiveStats(
        n=n,
        mean=mean,
        st_dev=float(np.std(x, ddof=1)),
        skewness=skew,
        kurtosis=kurt,
        minimum=float(np.min(x)),
        maximum=float(np.max(x)),
    )
