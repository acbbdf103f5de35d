"""Detection tests: thresholds, decision rules, and Monte Carlo error rates.

Each test compares a signed-count statistic against a threshold set to half
its planted-model mean, computed exactly through the cycle-expectation series
rather than by Monte Carlo.  The boundary convention is strict: 'planted' is
declared only when the statistic strictly exceeds the threshold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import (
    Graph,
    ModelParams,
    Seed,
    sample_null,
    sample_planted,
)
from .sphere import signed_cycle_expectation
from .stats import (
    ScanConfig,
    constrained_scan_statistic,
    scan_statistic,
    signed_cycle_count,
    signed_triangle_count,
)

__all__ = [
    "TestSpec",
    "ErrorEstimate",
    "CycleConstantCalibration",
    "gamma_tri",
    "gamma_scan",
    "gamma_cycle",
    "constraint_params",
    "calibrate_cycle_constant",
    "triangle_excess_ratio",
    "make_test_spec",
    "run_test",
    "statistic_value",
    "estimate_errors",
    "cycle_test_snr",
]

TEST_KINDS = ("global-triangle", "scan", "constrained-scan", "cycle")

# The 1/2 in front of every threshold is an arbitrary constant in (0, 1); it
# is exposed here as a single knob rather than hard-coded at each use site.
THRESHOLD_FRACTION = 0.5


def gamma_tri(params: ModelParams) -> float:
    """Global-test threshold: half the planted-model mean of the triangle count."""
    series = signed_cycle_expectation(3, params.p, params.d)
    return (
        THRESHOLD_FRACTION
        * math.comb(params.n, 3)
        * (params.k / params.n) ** 3
        * series.value
    )


def gamma_scan(params: ModelParams) -> float:
    """Scan-test threshold: half the within-community mean on a size-k_minus subset."""
    km = params.k_minus
    if km < 3:
        return 0.0
    series = signed_cycle_expectation(3, params.p, params.d)
    return THRESHOLD_FRACTION * math.comb(km, 3) * series.value


def gamma_cycle(params: ModelParams, ell: int) -> float:
    """Threshold for the global signed length-ell cycle test."""
    series = signed_cycle_expectation(ell, params.p, params.d)
    n_cycles = math.comb(params.n, ell) * math.factorial(ell - 1) // 2
    return (
        THRESHOLD_FRACTION * n_cycles * (params.k / params.n) ** ell * series.value
    )


def constraint_params(params: ModelParams, cycle_constant: float) -> tuple[float, float]:
    """Wedge-sum constraint parameters (sigma_sq, B) of the constrained scan.

    sigma_sq = k^3 p^2 + C^4 k^4 p^4 log^2(1/p) / d and
    B = (2048 k p^2 + 8) ceil(log k), with natural logarithms.
    """
    k, p, d = params.k, params.p, params.d
    if k < 2:
        raise ValueError(f"constraint parameters require k >= 2, got {k}")
    sigma_sq = k**3 * p**2 + cycle_constant**4 * k**4 * p**4 * math.log(1 / p) ** 2 / d
    bound = (2048.0 * k * p**2 + 8.0) * math.ceil(math.log(k))
    return sigma_sq, bound


def triangle_excess_ratio(p: float, d: int) -> float:
    """Conditional triangle excess: E[signed triangle] / p^3 under the full model.

    Equals P(G_12 G_13 G_23 = 1 | G_23 = 1)/p^2 - 1; read-only diagnostic.
    """
    return signed_cycle_expectation(3, p, d).value / p**3


@dataclass(frozen=True)
class CycleConstantCalibration:
    """Smallest C >= 1 with series/scale in [C^-ell, C^ell] over the grid."""

    constant: float
    ratios: tuple[tuple[float, float, int, float], ...]  # (p, d, ell, ratio)


def calibrate_cycle_constant(p, d_grid, ell_list) -> CycleConstantCalibration:
    """Calibrate the sandwich constant over a (p, d, ell) grid.

    `p` may be a single density or a sequence of densities.  The constant is
    nondecreasing in the grid and floored at 1.
    """
    p_values = [float(p)] if np.isscalar(p) else [float(v) for v in p]
    d_values = [int(v) for v in d_grid]
    ells = [int(v) for v in ell_list]
    if not p_values or not d_values or not ells:
        raise ValueError("calibration grids must be non-empty")
    constant = 1.0
    rows = []
    for pv in p_values:
        for dv in d_values:
            for ell in ells:
                res = signed_cycle_expectation(ell, pv, dv)
                ratio = res.ratio
                rows.append((pv, dv, ell, ratio))
                constant = max(constant, max(ratio, 1.0 / ratio) ** (1.0 / ell))
    return CycleConstantCalibration(constant=constant, ratios=tuple(rows))


@dataclass(frozen=True)
class TestSpec:
    """A fully pinned test: kind, parameters, threshold, and scan options."""

    __test__ = False  # not a pytest collection target

    kind: str
    params: ModelParams
    threshold: float
    sigma_sq: float | None = None
    B: float | None = None
    cycle_constant: float | None = None
    ell: int | None = None
    scan_mode: str = "planted-oracle"
    restarts: int = 8

    def __post_init__(self):
        if self.kind not in TEST_KINDS:
            raise ValueError(f"kind must be one of {TEST_KINDS}, got {self.kind!r}")
        # +-inf thresholds express always-null / always-planted rules; only a
        # NaN threshold is meaningless
        if math.isnan(self.threshold):
            raise ValueError("threshold must not be NaN")
        if self.kind == "cycle" and (self.ell is None or self.ell < 3):
            raise ValueError("cycle tests need ell >= 3")
        if self.kind == "constrained-scan":
            if self.sigma_sq is None or self.B is None:
                raise ValueError("constrained-scan specs need sigma_sq and B")
            if self.sigma_sq < 0 or self.B < 0:
                raise ValueError("sigma_sq and B must be >= 0")


def make_test_spec(
    kind: str,
    params: ModelParams,
    ell: int | None = None,
    cycle_constant: float | None = None,
    scan_mode: str = "planted-oracle",
    restarts: int = 8,
) -> TestSpec:
    """Build a TestSpec with its threshold (and constraints) computed from params."""
    if kind == "global-triangle":
        return TestSpec(kind=kind, params=params, threshold=gamma_tri(params))
    if kind == "scan":
        return TestSpec(
            kind=kind,
            params=params,
            threshold=gamma_scan(params),
            scan_mode=scan_mode,
            restarts=restarts,
        )
    if kind == "constrained-scan":
        if cycle_constant is None:
            cycle_constant = calibrate_cycle_constant(
                params.p, [max(4, params.d)], [3, 4]
            ).constant
        sigma_sq, bound = constraint_params(params, cycle_constant)
        return TestSpec(
            kind=kind,
            params=params,
            threshold=gamma_scan(params),
            sigma_sq=sigma_sq,
            B=bound,
            cycle_constant=cycle_constant,
            scan_mode=scan_mode,
            restarts=restarts,
        )
    if kind == "cycle":
        if ell is None:
            raise ValueError("cycle tests need ell")
        return TestSpec(
            kind=kind, params=params, threshold=gamma_cycle(params, ell), ell=ell
        )
    raise ValueError(f"unknown test kind {kind!r}")


def _scan_config(spec: TestSpec) -> ScanConfig:
    return ScanConfig(
        k_minus=spec.params.k_minus,
        mode=spec.scan_mode,
        restarts=spec.restarts,
        sigma_sq=spec.sigma_sq,
        B=spec.B,
    )


def statistic_value(spec: TestSpec, graph: Graph, oracle_subset=None):
    """The raw statistic for a graph, or None for an infeasible constrained scan."""
    if spec.kind == "global-triangle":
        return signed_triangle_count(graph, spec.params.p)
    if spec.kind == "cycle":
        return signed_cycle_count(graph, spec.params.p, spec.ell)
    cfg = _scan_config(spec)
    if cfg.mode == "planted-oracle" and oracle_subset is None:
        # under the null there is no community; exchangeability makes any
        # fixed subset equivalent, so use the first k_minus vertices
        oracle_subset = np.arange(cfg.k_minus)
    if spec.kind == "scan":
        value, _ = scan_statistic(graph, spec.params.p, cfg, oracle_subset)
    else:
        value, _ = constrained_scan_statistic(graph, spec.params.p, cfg, oracle_subset)
    return value


def run_test(spec: TestSpec, graph: Graph, oracle_subset=None) -> str:
    """Decide 'planted' or 'null'; strict inequality, infeasible scans say 'null'."""
    value = statistic_value(spec, graph, oracle_subset)
    if value is None:
        return "null"
    return "planted" if value > spec.threshold else "null"


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo type I / type II error rates with 95% half-widths."""

    type1: float
    type2: float
    trials: int
    type1_half_width: float
    type2_half_width: float
    excluded: int
    seed: Seed = field(repr=False)

    @staticmethod
    def half_width(rate: float, trials: int) -> float:
        if trials <= 0:
            return math.nan
        return 1.96 * math.sqrt(rate * (1.0 - rate) / trials)


_NULL_ARM, _PLANTED_ARM = 0, 1


def _null_trial(spec: TestSpec, seed: Seed, trial: int) -> bool:
    """True when the null draw raises a false alarm."""
    rng = seed.stream(trial, arm=_NULL_ARM)
    graph = sample_null(spec.params.n, spec.params.p, rng)
    return run_test(spec, graph) == "planted"


def _planted_trial(spec: TestSpec, seed: Seed, trial: int):
    """Returns None when the community size falls outside [k_minus, k_plus],
    else True when the planted draw is missed."""
    rng = seed.stream(trial, arm=_PLANTED_ARM)
    sample = sample_planted(spec.params, rng)
    members = sample.members
    if not spec.params.k_minus <= members.size <= spec.params.k_plus:
        return None
    oracle = None
    if spec.kind in ("scan", "constrained-scan"):
        oracle = members[: spec.params.k_minus]  # smallest k_minus members
    return run_test(spec, sample.graph, oracle) == "null"


def estimate_errors(
    spec: TestSpec, trials: int, seed: Seed | int, workers: int = 1
) -> ErrorEstimate:
    """Estimate type I / type II errors over seeded, order-independent trials.

    Planted trials whose community size falls outside [k_minus, k_plus] are
    excluded and counted rather than resampled, so the membership law is not
    biased.  Trial streams are derived from (seed, arm, index); worker count
    never changes the result.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if isinstance(seed, int):
        seed = Seed(seed)

    indices = range(trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            alarms = list(pool.map(lambda t: _null_trial(spec, seed, t), indices))
            misses = list(pool.map(lambda t: _planted_trial(spec, seed, t), indices))
    else:
        alarms = [_null_trial(spec, seed, t) for t in indices]
        misses = [_planted_trial(spec, seed, t) for t in indices]

    type1 = sum(alarms) / trials
    valid = [m for m in misses if m is not None]
    excluded = trials - len(valid)
    type2 = sum(valid) / len(valid) if valid else math.nan
    return ErrorEstimate(
        type1=type1,
        type2=type2,
        trials=trials,
        type1_half_width=ErrorEstimate.half_width(type1, trials),
        type2_half_width=ErrorEstimate.half_width(type2, len(valid)) if valid else math.nan,
        excluded=excluded,
        seed=seed,
    )


def cycle_test_snr(params: ModelParams, ell: int) -> float:
    """Mean shift over null standard deviation for the global length-ell cycle test.

    (number of cycles) (k/n)^ell series(ell) / sqrt((number of cycles)
    (p(1-p))^ell); the ratio is maximized at ell = 3.
    """
    ell = int(ell)
    if ell < 3:
        raise ValueError(f"cycle length must be >= 3, got {ell}")
    series = signed_cycle_expectation(ell, params.p, params.d)
    n_cycles = math.comb(params.n, ell) * math.factorial(ell - 1) / 2.0
    mean_shift = n_cycles * (params.k / params.n) ** ell * series.value
    null_sd = math.sqrt(n_cycles * (params.p * (1.0 - params.p)) ** ell)
    return mean_shift / null_sd
