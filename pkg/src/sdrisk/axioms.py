"""Randomized verification of the coherence and deviation axioms.

The estimators are plug-in statistics of the empirical distribution, so the
population axioms they are meant to inherit can be checked mechanically:
draw samples, evaluate both sides of each inequality, count violations
beyond a tolerance.  All checks run the coherent tail-mean estimator; the
strict-indicator variant breaks subadditivity for reasons that belong to
the estimator, not the measure.

One entry is expected to record failures.  The shortfall deviation anchors
its norm at the tail mean of its own argument, and the anchor of a sum can
sit far above the anchors of the parts, so SD(X + Y) <= SD(X) + SD(Y) is
simply false for some pairs.  Smallest counterexample we know: with
alpha = 0.5, X = (0, 0, 10, 10) and Y = (10, 0, 0, 10) both have a tail
mean of 0 and SD = 0, while X + Y = (10, 0, 10, 20) has tail mean -5 and
SD = 2.5.  The deviation report keeps the subadditivity entry and counts
these honestly; the combined risk measure itself (the `check_coherence`
suite) is subadditive on every sample.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .measures import ReturnSeries, RiskConfig, _es_sorted, _sd_sorted, _tail_index, sdr_hs

__all__ = [
    "Density",
    "AxiomEntry",
    "AxiomReport",
    "CheckConfig",
    "check_coherence",
    "check_deviation",
    "check_ordering_and_parameters",
    "es_dual_lp",
    "es_dual_weights",
    "sd_envelope_bound",
    "acceptance_identity",
    "dilation_check",
    "random_densities",
]

_DENSITY_MEAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Density:
    """Weights of a reweighted measure on the N sample atoms.

    Each atom carries probability 1/N, so the weights must average to 1.
    A candidate off by more than 1e-12 is rejected outright, never
    renormalized, because silent rescaling would hide infeasible inputs.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 1 or w.size == 0:
            raise InvalidParameterError("density weights must be a non-empty vector")
        if not np.all(np.isfinite(w)):
            raise InvalidParameterError("density weights must be finite")
        if abs(float(np.mean(w)) - 1.0) > _DENSITY_MEAN_TOL:
            raise InvalidParameterError(
                f"density weights must average to 1 (got {float(np.mean(w)):.17g}); "
                "infeasible candidates are rejected, not renormalized"
            )
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def is_es_feasible(self, alpha: float) -> bool:
        """Whether the weights lie in the tail-mean envelope [0, 1/alpha]."""
        w = self.weights
        return bool(np.all(w >= 0.0) and np.all(w <= 1.0 / alpha))

    @property
    def dispersion(self) -> float:
        """Standard deviation of the weights around 1 (divisor N)."""
        return float(np.sqrt(np.mean((self.weights - 1.0) ** 2)))


@dataclass(frozen=True)
class AxiomEntry:
    """Outcome of one axiom over a batch of trials.

    max_violation is scale-normalized (see the per-check notes); failures
    counts trials whose violation exceeded the entry's tolerance.  skipped
    counts trials excluded before evaluation (envelope membership).  An
    advisory entry is reported but excluded from the failure verdict.
    """

    name: str
    trials: int
    failures: int
    max_violation: float
    tolerance: float
    skipped: int = 0
    advisory: bool = False
    note: str = ""


@dataclass(frozen=True)
class AxiomReport:
    """A batch of axiom entries with an overall verdict."""

    entries: tuple[AxiomEntry, ...]

    def entry(self, name: str) -> AxiomEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def failed(self) -> bool:
        """True when any non-advisory entry recorded failures."""
        return any(e.failures > 0 and not e.advisory for e in self.entries)

    def as_dict(self) -> dict:
        return {
            "entries": [
                {
                    "name": e.name,
                    "trials": e.trials,
                    "failures": e.failures,
                    "skipped": e.skipped,
                    "max_violation": e.max_violation,
                    "tolerance": e.tolerance,
                    "advisory": e.advisory,
                    "note": e.note,
                }
                for e in self.entries
            ],
            "failed": self.failed(),
        }


@dataclass(frozen=True)
class CheckConfig:
    """Knobs for the randomized suites.

    Sample sizes are drawn uniformly from [n_min, n_max] and alpha from
    (1.5/n, 0.5), so every trial resolves its tail.  mode exists only to
    state the contract: the suites refuse anything but coherent.
    """

    tolerance: float = 1e-9
    trials: int = 1000
    n_min: int = 32
    n_max: int = 512
    seed: int = 0
    mode: str = "coherent"

    def __post_init__(self):
        if not (self.tolerance > 0.0 and math.isfinite(self.tolerance)):
            raise InvalidParameterError(f"tolerance must be positive, got {self.tolerance}")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be at least 1, got {self.trials}")
        if not (4 <= self.n_min <= self.n_max):
            raise InvalidParameterError(
                f"need 4 <= n_min <= n_max, got n_min={self.n_min}, n_max={self.n_max}"
            )
        if self.mode != "coherent":
            raise InvalidParameterError(
                "axiom checks run the coherent estimator only; the strict-indicator "
                f"mode tests the estimator, not the measure (got {self.mode!r})"
            )


# spawn-key prefixes keep the two suites' streams disjoint
_COHERENCE_KEY = 1
_DEVIATION_KEY = 2

_COHERENCE_AXIOMS = (
    "translation-invariance",
    "positive-homogeneity",
    "subadditivity",
    "monotonicity",
    "relevance",
    "strictness",
    "law-invariance",
    "ordering-chain",
)
_DEVIATION_AXIOMS = (
    "translation-insensitivity",
    "positive-homogeneity",
    "subadditivity",
    "non-negativity",
    "lower-range-dominance",
    "law-invariance",
)
# homogeneity is exact to a few ulps, law invariance to the bit
_TIGHT_TOL = {"positive-homogeneity": 1e-12, "law-invariance": 0.0}


def _draw_sample(rng: np.random.Generator, n: int) -> np.ndarray:
    """One random sample: normal or Student-t tail, random scale and shift."""
    law = int(rng.integers(0, 3))
    scale = float(rng.uniform(0.5, 2.0))
    shift = float(rng.normal(0.0, 0.5))
    if law == 0:
        x = rng.standard_normal(n)
    elif law == 1:
        x = rng.standard_t(6, n)
    else:
        x = rng.standard_t(4, n)
    return scale * x + shift


def _trial_setting(config: CheckConfig, rng: np.random.Generator):
    n = int(rng.integers(config.n_min, config.n_max + 1))
    alpha = float(rng.uniform(1.5 / n, 0.5))
    beta = float(rng.uniform(0.0, 4.0))
    p = float(rng.choice((1.0, 1.5, 2.0, 3.0)))
    return n, RiskConfig(alpha=alpha, beta=beta, p=p, mode="coherent")


def _coherence_trial(config: CheckConfig, trial: int) -> tuple[float, ...]:
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(_COHERENCE_KEY, trial))
    )
    n, cfg = _trial_setting(config, rng)
    x = _draw_sample(rng, n)
    y = _draw_sample(rng, n)
    c = float(rng.normal(0.0, 2.0))
    lam = float(rng.uniform(0.0, 3.0))
    lift = np.abs(_draw_sample(rng, n))
    perm = rng.permutation(n)

    rx = sdr_hs(ReturnSeries(x), cfg)
    ry = sdr_hs(ReturnSeries(y), cfg)

    shifted = sdr_hs(ReturnSeries(x + c), cfg).sdr
    v_translation = abs(shifted - (rx.sdr - c)) / max(1.0, abs(rx.sdr), abs(c))

    scaled = sdr_hs(ReturnSeries(lam * x), cfg).sdr
    v_homog = abs(scaled - lam * rx.sdr) / max(1.0, abs(lam * rx.sdr))

    joint = sdr_hs(ReturnSeries(x + y), cfg).sdr
    v_sub = max(0.0, joint - rx.sdr - ry.sdr) / max(1.0, abs(rx.sdr) + abs(ry.sdr))

    dominated = sdr_hs(ReturnSeries(x + lift), cfg).sdr
    v_mono = max(0.0, dominated - rx.sdr) / max(1.0, abs(rx.sdr))

    # relevance wants strict positivity, so a pass is encoded as 0 and a
    # failure as 1 plus the deficit (a bare deficit of 0 must still count)
    losses = -np.abs(_draw_sample(rng, n))
    neg_risk = sdr_hs(ReturnSeries(losses), cfg).sdr
    v_rel = 0.0 if neg_risk > 0.0 else 1.0 + abs(neg_risk)

    floor = -float(np.mean(x))
    v_strict = max(0.0, floor - rx.sdr) / max(1.0, abs(rx.sdr), abs(floor))

    rp = sdr_hs(ReturnSeries(x[perm]), cfg)
    v_law = max(
        abs(rp.var - rx.var), abs(rp.es - rx.es), abs(rp.sd - rx.sd), abs(rp.sdr - rx.sdr)
    )

    worst = float(np.max(-x))
    v_chain = max(0.0, rx.sdr - worst, rx.es - rx.sdr, rx.var - rx.es) / max(1.0, abs(worst))

    return (v_translation, v_homog, v_sub, v_mono, v_rel, v_strict, v_law, v_chain)


def _sd_only(x: np.ndarray, cfg: RiskConfig) -> float:
    xs = np.sort(x)
    es, _, _ = _es_sorted(xs, cfg.alpha, "coherent")
    return _sd_sorted(xs, -es, cfg.p)


def _deviation_trial(config: CheckConfig, trial: int) -> tuple[float, ...]:
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(_DEVIATION_KEY, trial))
    )
    n, cfg = _trial_setting(config, rng)
    x = _draw_sample(rng, n)
    y = _draw_sample(rng, n)
    c = float(rng.normal(0.0, 2.0))
    lam = float(rng.uniform(0.0, 3.0))
    perm = rng.permutation(n)

    sd_x = _sd_only(x, cfg)
    sd_y = _sd_only(y, cfg)

    v_translation = abs(_sd_only(x + c, cfg) - sd_x) / max(1.0, sd_x)
    v_homog = abs(_sd_only(lam * x, cfg) - lam * sd_x) / max(1.0, lam * sd_x)
    v_sub = max(0.0, _sd_only(x + y, cfg) - sd_x - sd_y) / max(1.0, sd_x + sd_y)

    # non-negativity, strict when something sits below the tail mean
    xs = np.sort(x)
    es, _, _ = _es_sorted(xs, cfg.alpha, "coherent")
    below = int(np.searchsorted(xs, -es, side="left"))
    bad = sd_x < 0.0 or (below > 0 and sd_x == 0.0)
    v_nonneg = 1.0 + abs(sd_x) if bad else 0.0

    span = float(np.mean(x) - np.min(x))
    v_range = max(0.0, sd_x - span) / max(1.0, span)

    v_law = abs(_sd_only(x[perm], cfg) - sd_x)

    return (v_translation, v_homog, v_sub, v_nonneg, v_range, v_law)


def _run_trials(worker, config: CheckConfig, threads: int):
    if threads <= 1:
        rows = [worker(config, t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: worker(config, t), range(config.trials)))
    return np.asarray(rows, dtype=float)


def _reduce(names, rows: np.ndarray, config: CheckConfig, notes=None) -> AxiomReport:
    entries = []
    for i, name in enumerate(names):
        tol = _TIGHT_TOL.get(name, config.tolerance)
        col = rows[:, i]
        entries.append(
            AxiomEntry(
                name=name,
                trials=int(rows.shape[0]),
                failures=int(np.sum(col > tol)),
                max_violation=max(0.0, float(np.max(col))),
                tolerance=tol,
                note=(notes or {}).get(name, ""),
            )
        )
    return AxiomReport(tuple(entries))


def check_coherence(config: CheckConfig, threads: int = 1) -> AxiomReport:
    """Randomized trials of the risk-measure axioms for the combined measure.

    Translation invariance, positive homogeneity, subadditivity (on
    independently drawn pairs), monotonicity (on constructed dominated
    pairs), relevance, strictness, bitwise law invariance under
    permutation, and the ordering chain max(-X) >= SDR >= ES >= VaR.
    Trials derive per-index RNG streams from config.seed, so the report is
    identical for any thread count.
    """
    rows = _run_trials(_coherence_trial, config, threads)
    return _reduce(_COHERENCE_AXIOMS, rows, config)


def check_deviation(config: CheckConfig, threads: int = 1) -> AxiomReport:
    """Randomized trials of the deviation axioms for the shortfall deviation.

    Same harness as check_coherence.  The subadditivity entry records real
    violations by design (see the module docstring); everything else is
    expected clean.
    """
    rows = _run_trials(_deviation_trial, config, threads)
    notes = {
        "subadditivity": (
            "expected to fail on some pairs: the deviation is anchored at the "
            "tail mean of its own argument, which is not subadditive"
        )
    }
    return _reduce(_DEVIATION_AXIOMS, rows, config, notes)


def check_ordering_and_parameters(
    series: ReturnSeries, alpha_grid, beta_grid, p: float = 2.0
) -> AxiomReport:
    """Grid checks on one series: the ordering chain at every (alpha, beta)
    point, exact monotonicity of the risk along beta, and advisory
    monotonicity along alpha.

    The alpha direction is advisory because the empirical quantile moves in
    discrete jumps: on finite samples the risk can tick up over a short
    alpha stretch even though the population value cannot.  Violations are
    reported but excluded from the failure verdict.
    """
    alphas = sorted(float(a) for a in alpha_grid)
    betas = sorted(float(b) for b in beta_grid)
    if not alphas or not betas:
        raise InvalidParameterError("alpha_grid and beta_grid must be non-empty")
    for b in betas:
        if b < 0.0 or not math.isfinite(b):
            raise InvalidParameterError(f"beta grid values must be finite and >= 0, got {b}")
    xs = np.sort(series.values)
    n = xs.size
    for a in alphas:
        _tail_index(n, a)  # raises on an unresolvable tail

    worst = -float(xs[0])
    sdr = np.empty((len(alphas), len(betas)))
    chain_viol = 0.0
    chain_fail = 0
    for i, a in enumerate(alphas):
        var = -float(xs[_tail_index(n, a)[1] - 1])
        es, _, _ = _es_sorted(xs, a, "coherent")
        sd = _sd_sorted(xs, -es, p)
        for j, b in enumerate(betas):
            s = es + (1.0 - a) ** b * sd
            sdr[i, j] = s
            v = max(0.0, s - worst, es - s, var - es)
            chain_viol = max(chain_viol, v)
            if v > 0.0:
                chain_fail += 1

    beta_steps = np.diff(sdr, axis=1)  # must be <= 0 exactly
    beta_viol = float(max(0.0, beta_steps.max())) if beta_steps.size else 0.0
    beta_fail = int(np.sum(beta_steps > 0.0))

    alpha_tol = 1e-9
    alpha_steps = np.diff(sdr, axis=0)
    scale = max(1.0, abs(worst))
    alpha_viol = float(max(0.0, alpha_steps.max())) / scale if alpha_steps.size else 0.0
    alpha_fail = int(np.sum(alpha_steps / scale > alpha_tol))

    return AxiomReport(
        (
            AxiomEntry(
                name="ordering-chain",
                trials=len(alphas) * len(betas),
                failures=chain_fail,
                max_violation=chain_viol,
                tolerance=0.0,
            ),
            AxiomEntry(
                name="beta-monotonicity",
                trials=int(beta_steps.size),
                failures=beta_fail,
                max_violation=beta_viol,
                tolerance=0.0,
            ),
            AxiomEntry(
                name="alpha-monotonicity",
                trials=int(alpha_steps.size),
                failures=alpha_fail,
                max_violation=alpha_viol,
                tolerance=alpha_tol,
                advisory=True,
                note="finite-sample quantile jumps can break this locally; logged only",
            ),
        )
    )


# ---------------------------------------------------------------------------
# dual representation and envelope
# ---------------------------------------------------------------------------


def es_dual_weights(series: ReturnSeries, alpha: float) -> Density:
    """Maximizer of E_Q[-X] over densities with 0 <= dQ/dP <= 1/alpha.

    The optimum packs weight 1/alpha onto the floor(N*alpha) smallest
    observations and the leftover budget onto the next order statistic.
    The weights are returned in the original observation order.
    """
    x = series.values
    na, _ = _tail_index(x.size, alpha)
    inv = 1.0 / alpha
    m = math.floor(na)
    order = np.argsort(x, kind="stable")
    w = np.zeros(x.size)
    w[order[:m]] = inv
    if m < x.size:
        # total weight must be N; float dust is clipped at the envelope edge
        w[order[m]] = min(inv, max(0.0, float(x.size) - m * inv))
    return Density(w)


def es_dual_lp(series: ReturnSeries, alpha: float) -> float:
    """Optimal value of the reweighting program max E_Q[-X] s.t.
    0 <= dQ/dP <= 1/alpha, E_P[dQ/dP] = 1.

    The greedy maximizer of ``es_dual_weights`` is optimal (any feasible
    density can only move weight from lower to higher outcomes), and its
    objective simplifies algebraically to the fractional tail average, so
    the value is evaluated through the same kernel as the coherent
    ``es_hs`` and the two agree bit for bit.
    """
    xs = np.sort(series.values)
    es, _, _ = _es_sorted(xs, alpha, "coherent")
    return es


def random_densities(n: int, count: int, seed: int = 0,
                     spread: tuple[float, float] = (0.01, 0.5)) -> list[Density]:
    """Candidate densities: positive lognormal weights normalized to mean 1.

    Each candidate's log-scale is drawn from ``spread``, so a batch covers
    dispersions from nearly uniform to strongly tilted; downstream envelope
    checks then sort the batch into members and skips instead of seeing
    only one regime.
    """
    if n < 1 or count < 1:
        raise InvalidParameterError("need n >= 1 and count >= 1")
    lo, hi = float(spread[0]), float(spread[1])
    if not (0.0 < lo <= hi) or not math.isfinite(hi):
        raise InvalidParameterError(f"spread must be finite with 0 < lo <= hi, got {spread}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(3,)))
    out = []
    for _ in range(count):
        s = rng.uniform(lo, hi)
        w = np.exp(s * rng.standard_normal(n))
        out.append(Density(w / np.mean(w)))
    return out


def sd_envelope_bound(
    series: ReturnSeries, alpha: float, p: float, candidates, tolerance: float = 1e-9
) -> AxiomReport:
    """One-directional check of the deviation's dual lower bound.

    A candidate density belongs to the checked slice of the envelope when
    its dispersion obeys sigma(w - 1) * sigma(X) <= SD(X); for every member
    the bound SD(X) >= mean(X) - E_Q[X] must hold.  Candidates outside the
    slice are counted as skipped.  A zero-variance series makes the
    membership constraint vacuous, so all candidates are checked and the
    report says so.
    """
    x = series.values
    cfg = RiskConfig(alpha=alpha, p=p, mode="coherent")
    cfg.validate_for(series)
    xs = np.sort(x)
    es, _, _ = _es_sorted(xs, alpha, "coherent")
    sd = _sd_sorted(xs, -es, cfg.p)
    sigma_x = float(np.sqrt(np.mean((x - np.mean(x)) ** 2)))
    mean_x = float(np.mean(x))

    note = ""
    if sigma_x == 0.0:
        note = "zero-variance series: dispersion constraint skipped, all candidates checked"

    checked = 0
    skipped = 0
    failures = 0
    max_violation = 0.0
    for idx, cand in enumerate(candidates):
        w = cand.weights
        if w.size != x.size:
            raise InvalidParameterError(
                f"candidate {idx} has {w.size} weights for {x.size} observations"
            )
        if np.any(w < 0.0):
            raise InvalidParameterError(f"candidate {idx} has negative weights")
        if sigma_x > 0.0 and cand.dispersion * sigma_x > sd:
            skipped += 1
            continue
        checked += 1
        lhs = mean_x - float(np.mean(w * x))
        v = max(0.0, lhs - sd) / max(1.0, sd, abs(lhs))
        max_violation = max(max_violation, v)
        if v > tolerance:
            failures += 1

    return AxiomReport(
        (
            AxiomEntry(
                name="envelope-lower-bound",
                trials=checked,
                failures=failures,
                max_violation=max_violation,
                tolerance=tolerance,
                skipped=skipped,
                note=note,
            ),
        )
    )


# ---------------------------------------------------------------------------
# capital identity and dilation
# ---------------------------------------------------------------------------


def acceptance_identity(series: ReturnSeries, config: RiskConfig) -> float:
    """Residual |risk(X + risk(X))|.

    Charging a position its own risk as capital makes it exactly
    acceptable, so the residual is zero up to rounding; callers compare it
    against 1e-9 times their scale.
    """
    base = sdr_hs(series, config).sdr
    shifted = sdr_hs(ReturnSeries(series.values + base), config).sdr
    return abs(shifted)


def dilation_check(
    series: ReturnSeries, partition, config: RiskConfig, tolerance: float = 1e-9
) -> AxiomReport:
    """Coarsening by group means must not raise the risk.

    partition is a collection of index groups covering every observation
    exactly once.  Each group is replaced by its mean (the conditional
    expectation given the grouping) and the coarsened risk is compared to
    the original.
    """
    x = series.values
    n = x.size
    groups = [np.asarray(g, dtype=int) for g in partition]
    if any(g.ndim != 1 or g.size == 0 for g in groups):
        raise InvalidParameterError("every partition group must be a non-empty index list")
    flat = np.concatenate(groups) if groups else np.array([], dtype=int)
    if flat.size != n or not np.array_equal(np.sort(flat), np.arange(n)):
        raise InvalidParameterError(
            "partition must cover all indices exactly once with no repeats"
        )
    coarse = np.empty_like(x)
    for g in groups:
        coarse[g] = float(np.mean(x[g]))

    base = sdr_hs(series, config).sdr
    reduced = sdr_hs(ReturnSeries(coarse), config).sdr
    scale = max(1.0, abs(base))
    v = max(0.0, reduced - base) / scale
    return AxiomReport(
        (
            AxiomEntry(
                name="dilation",
                trials=1,
                failures=int(v > tolerance),
                max_violation=v,
                tolerance=tolerance,
            ),
        )
    )
