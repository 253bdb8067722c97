"""Finite-N estimate of the storage transition.

For each load ``alpha`` the harness draws random instances with
``p = round(alpha N)`` patterns and asks whether a weight vector with margin
at least the effective threshold exists. The load where a logistic fit of
the feasible fraction crosses 1/2 is the finite-N capacity estimate.

Trial ``t`` draws one pattern pool of the largest ``p`` on the grid from a
stream keyed by ``(base_seed, t)``; every load uses the first ``p`` rows of
that pool. Feasibility is therefore non-increasing in ``alpha`` trial by
trial, and results do not depend on how trials are scheduled.
"""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, special

from . import __version__
from .capacity import ModelParams, effective_threshold, storage_capacity
from .errors import ConvergenceError, DomainError, FitError, InfeasibleBias, OverflowGuard
from .perceptron import is_storable, max_margin, sample_instance
from .rng import stream

CSV_COLUMNS = ("alpha", "p", "feasible", "indeterminate", "trials", "ci_low", "ci_high")


@dataclass(frozen=True)
class McConfig:
    N: int
    alphas: tuple
    trials_per_alpha: int
    model: ModelParams
    tolerance: float = 1e-6
    restarts: int = 1
    base_seed: int = 0
    bootstrap: int = 1000
    workers: int = 1

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if self.N < 2:
            raise DomainError(f"N must be >= 2, got {self.N}")
        if self.trials_per_alpha < 1:
            raise DomainError("trials_per_alpha must be >= 1")
        if not alphas or any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise DomainError("alpha grid must be non-empty and strictly increasing")
        if min(self.pattern_count(a) for a in alphas) < 1:
            raise DomainError("every alpha must give at least one pattern")

    @property
    def kappa_tilde(self):
        return effective_threshold(self.model)

    def pattern_count(self, alpha):
        """``round(alpha N)`` with ties away from zero."""
        return int(math.floor(alpha * self.N + 0.5))


def trial_seed(base_seed, trial):
    """Integer seed of trial ``trial``; independent of the alpha grid."""
    state = np.random.SeedSequence([int(base_seed), int(trial)]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


# decision codes in the per-trial matrix
INFEASIBLE, FEASIBLE, INDETERMINATE = 0, 1, -1


def run_trial(config, trial):
    """Decisions of one trial at every load of the grid."""
    p_max = max(config.pattern_count(a) for a in config.alphas)
    pool = sample_instance(config.N, p_max, config.model.m_in, config.model.m_out,
                           trial_seed(config.base_seed, trial))
    kt = config.kappa_tilde
    decisions = []
    for alpha in config.alphas:
        inst = pool.head(config.pattern_count(alpha))
        try:
            res = max_margin(inst, tolerance=config.tolerance, restarts=config.restarts,
                             seed=trial_seed(config.base_seed, trial))
        except ConvergenceError:
            decisions.append(INDETERMINATE)
            continue
        decisions.append(FEASIBLE if is_storable(res, kt, config.tolerance) else INFEASIBLE)
    return decisions


def _run_trials(config, trials):
    jobs = [(config, t) for t in trials]
    if config.workers <= 1:
        rows = [run_trial(c, t) for c, t in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunk = max(1, len(jobs) // (4 * config.workers))
            rows = list(pool.map(run_trial, *zip(*jobs), chunksize=chunk))
    return np.array(rows, dtype=np.int8).reshape(len(jobs), len(config.alphas))


def decision_matrix(config):
    """``(trials, len(alphas))`` array of FEASIBLE / INFEASIBLE / INDETERMINATE codes."""
    return _run_trials(config, range(config.trials_per_alpha))


@dataclass(frozen=True)
class FeasibilityCount:
    feasible: int
    indeterminate: int
    trials: int


def feasibility_probability(config, alpha):
    """Feasible count among ``config.trials_per_alpha`` trials at load ``alpha``."""
    single = McConfig(config.N, (alpha,), config.trials_per_alpha, config.model,
                      config.tolerance, config.restarts, config.base_seed,
                      config.bootstrap, config.workers)
    if single.pattern_count(alpha) < 1:
        raise DomainError(f"alpha {alpha} gives no patterns at N = {config.N}")
    column = decision_matrix(single)[:, 0]
    return FeasibilityCount(int(np.sum(column == FEASIBLE)),
                            int(np.sum(column == INDETERMINATE)), int(column.size))


def wilson_interval(successes, n, z=1.959963984540054):
    if n == 0:
        return math.nan, math.nan
    phat = successes / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def fit_logistic(alphas, feasible, valid):
    """Binomial maximum-likelihood fit of ``P(alpha) = 1 / (1 + exp((alpha - c) / s))``.

    Returns ``(c, s)``. Raises :class:`FitError` when the feasible fraction
    is the same at every load.
    """
    alphas = np.asarray(alphas, dtype=float)
    feasible = np.asarray(feasible, dtype=float)
    valid = np.asarray(valid, dtype=float)
    keep = valid > 0
    alphas, feasible, valid = alphas[keep], feasible[keep], valid[keep]
    if alphas.size < 2:
        raise FitError("need at least two loads with decided trials")
    frac = feasible / valid
    if np.all(frac == frac[0]):
        raise FitError(f"feasible fraction is flat ({frac[0]:.3g}) across the grid")
    span = float(alphas[-1] - alphas[0])

    def nll(theta):
        c, log_s = theta
        t = (alphas - c) / math.exp(log_s)
        # log P = log_expit(-t), log(1-P) = log_expit(t)
        return -float(np.sum(feasible * special.log_expit(-t)
                             + (valid - feasible) * special.log_expit(t)))

    below = np.nonzero(frac >= 0.5)[0]
    c0 = float(alphas[below[-1]]) if below.size else float(alphas[0])
    best = None
    for s0 in (0.02 * span, 0.1 * span, 0.5 * span):
        res = optimize.minimize(nll, [c0, math.log(s0)], method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    c, log_s = best.x
    if not (math.isfinite(c) and math.isfinite(log_s)):
        raise FitError("logistic fit did not converge")
    return float(c), float(math.exp(log_s))


@dataclass(frozen=True)
class AlphaRow:
    alpha: float
    p: int
    feasible: int
    indeterminate: int
    trials: int
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class McResult:
    config: McConfig
    rows: tuple
    crossing_estimate: float
    crossing_band: tuple
    width: float
    extrapolated: bool
    alpha_theory: float
    kappa_tilde: float
    bootstrap_failures: int = 0
    decisions: np.ndarray = field(default=None, repr=False, compare=False)

    def summary(self):
        """JSON-ready dictionary of the result."""
        cfg = asdict(self.config)
        cfg["model"] = asdict(self.config.model)
        return {
            "version": __version__,
            "config": cfg,
            "kappa_tilde": self.kappa_tilde,
            "crossing_estimate": self.crossing_estimate,
            "crossing_band": list(self.crossing_band),
            "width": self.width,
            "extrapolated": self.extrapolated,
            "alpha_theory": self.alpha_theory,
            "bootstrap_failures": self.bootstrap_failures,
        }


def _rows_from(config, decisions):
    rows = []
    for i, alpha in enumerate(config.alphas):
        column = decisions[:, i]
        feasible = int(np.sum(column == FEASIBLE))
        indeterminate = int(np.sum(column == INDETERMINATE))
        lo, hi = wilson_interval(feasible, column.size - indeterminate)
        rows.append(AlphaRow(alpha, config.pattern_count(alpha), feasible, indeterminate,
                             int(column.size), lo, hi))
    return rows


def _fit_matrix(alphas, decisions):
    feasible = np.sum(decisions == FEASIBLE, axis=0)
    valid = np.sum(decisions != INDETERMINATE, axis=0)
    return fit_logistic(alphas, feasible, valid)


def theoretical_capacity(model):
    try:
        return storage_capacity(model).alpha_c
    except (InfeasibleBias, OverflowGuard, ConvergenceError):
        return math.nan


def capacity_crossing(config, decisions=None):
    """Run the trials, fit the transition and bootstrap its location.

    The confidence band is the 2.5 and 97.5 percentiles of the crossing over
    ``config.bootstrap`` resamples of whole trials.
    """
    if decisions is None:
        decisions = decision_matrix(config)
    rows = _rows_from(config, decisions)
    centre, width = _fit_matrix(config.alphas, decisions)

    rng = stream(config.base_seed, 0xB007)
    n = decisions.shape[0]
    boot = []
    failures = 0
    for _ in range(config.bootstrap):
        sample = decisions[rng.integers(0, n, size=n)]
        try:
            boot.append(_fit_matrix(config.alphas, sample)[0])
        except FitError:
            failures += 1
    band = (float(np.percentile(boot, 2.5)), float(np.percentile(boot, 97.5))) if boot \
        else (math.nan, math.nan)
    extrapolated = not config.alphas[0] <= centre <= config.alphas[-1]
    return McResult(config, tuple(rows), centre, band, width, extrapolated,
                    theoretical_capacity(config.model), config.kappa_tilde, failures, decisions)


def rows_to_csv(rows, header=None):
    """CSV text with columns :data:`CSV_COLUMNS`; ``header`` becomes a leading ``#`` line."""
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([f"{r.alpha:.12g}", r.p, r.feasible, r.indeterminate, r.trials,
                         f"{r.ci_low:.12g}", f"{r.ci_high:.12g}"])
    return buf.getvalue()


def summary_json(result):
    return json.dumps(result.summary(), indent=2, sort_keys=True)


def unbiased_output_check(N, samples, seed, m_in=0.0, weights=None):
    """Frequency of ``w.x >= 0`` over random patterns with bias ``m_in``.

    ``w`` is a standard Gaussian vector unless ``weights`` is given. For
    ``m_in = 0`` the frequency concentrates at 1/2 for every ``w``.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    w = stream(seed, 0).standard_normal(N) if weights is None else np.asarray(weights, float)
    if w.shape != (N,):
        raise DomainError(f"weights must have shape ({N},)")
    rng = stream(seed, 1)
    plus = 0
    done = 0
    chunk = 10000
    while done < samples:
        k = min(chunk, samples - done)
        x = np.where(rng.random((k, N)) < 0.5 * (1.0 + m_in), 1.0, -1.0)
        plus += int(np.sum(x @ w >= 0.0))
        done += k
    return plus / samples
