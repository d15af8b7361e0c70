"""AR(1)-GARCH(1,1) return path generator for the four study scenarios.

The data-generating process is

    x_t     = ar1 * x_{t-1} + eps_t
    eps_t   = sigma_t * z_t
    sigma_t^2 = sigma^2 * (1 - arch - garch) + arch * eps_{t-1}^2
                + garch * sigma_{t-1}^2

with z_t an independent standardized innovation (mean 0, variance 1):
standard normal, or a Student-t(nu) variate scaled by sqrt((nu - 2) / nu).
The intercept is written in variance-targeting form, so sigma^2 is the
unconditional variance of eps_t for any admissible (arch, garch).

Recursions start from x = 0, eps = 0 and the unconditional variance, and a
burn-in prefix (default 1000 steps) is discarded so the retained sample is
effectively stationary.  All randomness flows through numpy SeedSequence,
and replicate streams are derived with spawn keys, so parallel execution
cannot reorder draws.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .measures import ReturnSeries

__all__ = [
    "GarchParams",
    "SimState",
    "ScenarioSpec",
    "SCENARIO_NAMES",
    "scenario_params",
    "student_scale",
    "standardized_innovation",
    "path_from_innovations",
    "simulate_path",
]

_LAWS = ("normal", "student")


@dataclass(frozen=True)
class GarchParams:
    """Parameters of the AR(1)-GARCH(1,1) recursion.

    sigma_uncond is the unconditional standard deviation of the shock
    eps_t.  Stationarity requires arch + garch < 1; the Student law needs
    nu > 2 so the standardization scale exists.
    """

    ar1: float = 0.10
    arch: float = 0.10
    garch: float = 0.85
    sigma_uncond: float = 0.0125
    innovation: str = "normal"
    nu: float | None = None

    def __post_init__(self):
        if not abs(self.ar1) < 1.0:
            raise InvalidParameterError(f"|ar1| must be < 1, got {self.ar1}")
        if self.arch < 0.0 or self.garch < 0.0:
            raise InvalidParameterError("arch and garch must be non-negative")
        if not self.arch + self.garch < 1.0:
            raise InvalidParameterError(
                f"arch + garch must be < 1 for a stationary variance, got {self.arch + self.garch}"
            )
        if not self.sigma_uncond > 0.0:
            raise InvalidParameterError(
                f"sigma_uncond must be positive, got {self.sigma_uncond}"
            )
        if self.innovation not in _LAWS:
            raise InvalidParameterError(
                f"innovation must be one of {_LAWS}, got {self.innovation!r}"
            )
        if self.innovation == "student":
            if self.nu is None or not self.nu > 2.0:
                raise InvalidParameterError(
                    f"a Student innovation needs nu > 2 to be standardized, got {self.nu}"
                )
        elif self.nu is not None:
            raise InvalidParameterError("nu only applies to the student innovation law")

    @property
    def omega(self) -> float:
        """Variance intercept sigma^2 * (1 - arch - garch)."""
        return self.sigma_uncond**2 * (1.0 - self.arch - self.garch)


@dataclass(frozen=True)
class SimState:
    """Lagged state (x, eps, sigma^2) carried through the recursion."""

    x_prev: float = 0.0
    eps_prev: float = 0.0
    sigma2_prev: float = 0.0

    def __post_init__(self):
        if not self.sigma2_prev >= 0.0:
            raise InvalidParameterError(
                f"sigma2_prev must be non-negative, got {self.sigma2_prev}"
            )


@dataclass(frozen=True)
class ScenarioSpec:
    """A named scenario and its resolved parameters."""

    name: str
    params: GarchParams


_SCENARIOS = {
    "normal-low": GarchParams(sigma_uncond=0.0125, innovation="normal"),
    "normal-high": GarchParams(sigma_uncond=0.022, innovation="normal"),
    "student-low": GarchParams(sigma_uncond=0.0125, innovation="student", nu=6.0),
    "student-high": GarchParams(sigma_uncond=0.022, innovation="student", nu=6.0),
}

SCENARIO_NAMES = tuple(_SCENARIOS)


def scenario_params(name: str) -> ScenarioSpec:
    """Resolve one of the four named volatility/tail scenarios."""
    try:
        return ScenarioSpec(name=name, params=_SCENARIOS[name])
    except KeyError:
        raise InvalidParameterError(
            f"unknown scenario {name!r}; valid names: {', '.join(SCENARIO_NAMES)}"
        ) from None


def student_scale(nu: float) -> float:
    """Factor sqrt((nu - 2) / nu) that gives a Student-t draw unit variance."""
    if not nu > 2.0:
        raise InvalidParameterError(f"nu must exceed 2, got {nu}")
    return math.sqrt((nu - 2.0) / nu)


def standardized_innovation(innovation: str, rng: np.random.Generator,
                            nu: float | None = None, size=None):
    """Draw innovations with mean 0 and variance 1 from the given law.

    Returns a scalar when size is None, else an ndarray of that shape.
    """
    if innovation == "normal":
        return rng.standard_normal(size)
    if innovation == "student":
        if nu is None:
            raise InvalidParameterError("the student law needs nu")
        return rng.standard_t(nu, size) * student_scale(nu)
    raise InvalidParameterError(f"innovation must be one of {_LAWS}, got {innovation!r}")


def path_from_innovations(params: GarchParams, z, burn_in: int = 0,
                          state: SimState | None = None,
                          return_variance: bool = False):
    """Run the recursion on externally supplied standardized innovations.

    This is the deterministic core behind ``simulate_path`` and the test
    hook for forcing innovations (for example all zeros).  ``z`` may be a
    vector (one path) or a matrix of shape (paths, steps); paths evolve
    independently and elementwise, so a batched run equals the stacked
    single-path runs bit for bit.  The first ``burn_in`` steps are
    discarded.  When ``state`` is omitted the recursion starts at x = 0,
    eps = 0 and the unconditional variance.
    """
    z_arr = np.asarray(z, dtype=float)
    single = z_arr.ndim == 1
    z2 = np.atleast_2d(z_arr)
    if z2.ndim != 2:
        raise InvalidParameterError(f"z must be 1- or 2-dimensional, got shape {z_arr.shape}")
    n_paths, n_steps = z2.shape
    if not 0 <= burn_in < n_steps:
        raise InvalidParameterError(
            f"burn_in must satisfy 0 <= burn_in < steps, got burn_in={burn_in}, steps={n_steps}"
        )
    if state is None:
        state = SimState(sigma2_prev=params.sigma_uncond**2)

    omega = params.omega
    x = np.empty_like(z2)
    sigma2_path = np.empty_like(z2) if return_variance else None
    sigma2 = np.full(n_paths, state.sigma2_prev)
    eps = np.full(n_paths, state.eps_prev)
    x_prev = np.full(n_paths, state.x_prev)
    for t in range(n_steps):
        sigma2 = omega + params.arch * eps * eps + params.garch * sigma2
        eps = np.sqrt(sigma2) * z2[:, t]
        x_prev = params.ar1 * x_prev + eps
        x[:, t] = x_prev
        if sigma2_path is not None:
            sigma2_path[:, t] = sigma2
    x = x[:, burn_in:]
    if sigma2_path is not None:
        sigma2_path = sigma2_path[:, burn_in:]
    if single:
        x = x[0]
        if sigma2_path is not None:
            sigma2_path = sigma2_path[0]
    return (x, sigma2_path) if return_variance else x


def simulate_path(params: GarchParams, n: int, burn_in: int = 1000,
                  seed=0) -> ReturnSeries:
    """Simulate a stationary return series of length n.

    ``seed`` may be an int or a numpy SeedSequence; equal seeds give
    bit-identical paths.  ``burn_in`` extra steps are simulated first and
    dropped.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if burn_in < 0:
        raise InvalidParameterError(f"burn_in must be non-negative, got {burn_in}")
    if isinstance(seed, np.random.SeedSequence):
        rng = np.random.default_rng(seed)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = standardized_innovation(params.innovation, rng, params.nu, size=n + burn_in)
    return ReturnSeries(path_from_innovations(params, z, burn_in=burn_in))


def replicate_seed(master_seed: int, replicate: int) -> np.random.SeedSequence:
    """Derived stream for one replicate: deterministic in (seed, index) and
    independent of the order replicates are launched in."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(replicate,))
