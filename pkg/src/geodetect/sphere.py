"""Harmonic analysis on the unit sphere S^{d-1}.

Everything downstream rests on the law mu of the inner product of two
independent uniform points on S^{d-1}, its cap threshold tau(p, d) chosen so
that the cap has probability exactly p, the polynomials orthonormal in
L^2(mu), and the coefficients of the cap indicator in that basis.  From those
ingredients the expectation of a signed length-ell cycle under the full
geometric model has the exact series representation

    sum_{m >= 1} c_m^ell / N_m^(ell/2 - 1),

where c_m is the m-th coefficient of the cap indicator and N_m is the
dimension of the degree-m harmonic space.  This module evaluates that series
to near machine precision at desk scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, gammaln, roots_legendre

__all__ = [
    "InnerProductLaw",
    "ThresholdResult",
    "GegenbauerBasis",
    "CycleExpectationResult",
    "QuadratureWarning",
    "inner_product_tail",
    "solve_threshold",
    "gegenbauer_eval",
    "multiplicity",
    "log_multiplicity",
    "gegenbauer_coefficient",
    "signed_cycle_expectation",
    "sample_uniform_sphere",
]

# Truncation / quadrature policy.  The series is cut at the first m >= 8 where
# five consecutive terms are below 1e-16 of the partial sum; the hard cap
# mirrors the small-m / large-m split of the underlying analysis.  Quadrature
# refines composite 64-point Gauss-Legendre panels until two successive levels
# agree, capped at 2^14 total nodes.
_SERIES_RTOL = 1e-16
_SERIES_SMALL_RUN = 5
_SERIES_MIN_M = 8
_HARD_CAP_CLAMP = 256  # intermediate recurrence values overflow past m ~ 300
_QUAD_RTOL = 1e-10
_QUAD_ATOL = 1e-15
_QUAD_ORDER = 64
_QUAD_PANELS = (4, 8, 16, 32, 64, 128, 256)


class QuadratureWarning(UserWarning):
    """Raised as a warning when node-doubling fails to reach its tolerance."""


def _check_dimension(d) -> int:
    d = int(d)
    if d < 3:
        raise ValueError(f"dimension must be >= 3, got {d}")
    return d


def _log_gamma_half_ratio(z: float) -> float:
    """log(Gamma(z + 1/2) / Gamma(z)) without cancellation for large z.

    Direct gammaln differences lose ~9 digits near z = 5e7; the asymptotic
    expansion sqrt(z) * (1 - 1/(8z) + 1/(128 z^2) + 5/(1024 z^3) - ...) is
    exact to double precision once z >= 1e4.
    """
    if z < 1e4:
        return float(gammaln(z + 0.5) - gammaln(z))
    u = 1.0 / z
    corr = u * (-1.0 / 8.0 + u * (1.0 / 128.0 + u * (5.0 / 1024.0 - u * 21.0 / 32768.0)))
    return 0.5 * math.log(z) + math.log1p(corr)


def _mu_log_normalizer(d: int) -> float:
    # Gamma(d/2) / (Gamma((d-1)/2) sqrt(pi))
    return _log_gamma_half_ratio((d - 1) / 2.0) - 0.5 * math.log(math.pi)


class InnerProductLaw:
    """Law mu of <U1, U2> for independent uniform points on S^{d-1}.

    Density on [-1, 1]:  mu(x) = Gamma(d/2) / (Gamma((d-1)/2) sqrt(pi))
    * (1 - x^2)^((d-3)/2).  Symmetric about 0; for d = 3 it is the uniform
    density 1/2.
    """

    def __init__(self, d: int):
        self.d = _check_dimension(d)
        self._log_norm = _mu_log_normalizer(self.d)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        half = (self.d - 3) / 2.0
        if half == 0.0:  # d = 3 is the uniform law; avoid 0 * -inf at x = +-1
            return self._log_norm + np.zeros_like(x)
        with np.errstate(divide="ignore"):
            return self._log_norm + half * np.log1p(-x * x)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def tail(self, t):
        """P(X >= t) for X ~ mu."""
        return inner_product_tail(t, self.d)


def inner_product_tail(t: float, d: int) -> float:
    """P(<U1, U2> >= t) for independent uniform points on S^{d-1}.

    Uses the Beta representation: (X + 1)/2 ~ Beta((d-1)/2, (d-1)/2), so the
    tail equals the regularized incomplete beta I_{(1-t)/2}(a, a), which is
    accurate to ~1e-13 even for d ~ 1e8 and avoids cancellation for t > 0.
    """
    d = _check_dimension(d)
    t = float(t)
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [-1, 1], got {t}")
    a = (d - 1) / 2.0
    return float(betainc(a, a, (1.0 - t) / 2.0))


@dataclass(frozen=True)
class ThresholdResult:
    """Cap threshold tau with P(X >= tau) = p and the achieved residual."""

    p: float
    d: int
    tau: float
    residual: float


def solve_threshold(p: float, d: int) -> ThresholdResult:
    """Solve inner_product_tail(tau, d) = p by bisection.

    The tail is continuous and strictly decreasing, so bisection on [0, 1)
    for p <= 1/2 (and on (-1, 0] otherwise) is robust even when the law is
    extremely steep at large d.  Terminates at residual <= 1e-10.
    """
    d = _check_dimension(d)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if abs(inner_product_tail(0.0, d) - p) <= 1e-13:
        # exact symmetry point; the common p = 1/2 case
        return ThresholdResult(p=p, d=d, tau=0.0, residual=abs(0.5 - p))
    if p <= 0.5:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = -1.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if inner_product_tail(mid, d) >= p:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    residual = abs(inner_product_tail(tau, d) - p)
    if residual > 1e-10:
        raise ArithmeticError(
            f"threshold bisection stalled: p={p}, d={d}, residual={residual:.3e}"
        )
    return ThresholdResult(p=p, d=d, tau=tau, residual=residual)


def _recurrence_coeffs(m: int, d: int) -> tuple[float, float]:
    # q_{m+1} = a_m x q_m - b_m q_{m-1}
    a = math.sqrt((2 * m + d) * (2 * m + d - 2) / ((m + 1) * (m + d - 2)))
    b = math.sqrt(
        m * (m + d - 3) * (m + d / 2.0)
        / ((m + 1) * (m + d - 2) * (m + d / 2.0 - 2.0))
    )
    return a, b


def gegenbauer_eval(m: int, d: int, x):
    """Evaluate the orthonormal polynomial q_m at x via the three-term recurrence.

    Seeds: q_0 = 1 and q_1 = sqrt(d) x.  The recurrence coefficients are well
    defined for every d >= 3 and m >= 1.
    """
    m = int(m)
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    d = _check_dimension(d)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("x must lie in [-1, 1]")
    q_prev = np.ones_like(x)
    if m == 0:
        return q_prev if q_prev.ndim else float(q_prev)
    q_cur = math.sqrt(d) * x
    for mm in range(1, m):
        a, b = _recurrence_coeffs(mm, d)
        q_prev, q_cur = q_cur, a * x * q_cur - b * q_prev
    return q_cur if q_cur.ndim else float(q_cur)


def log_multiplicity(m: int, d: int) -> float:
    """log N_m where N_m is the number of distinct degree-m spherical harmonics."""
    m = int(m)
    d = _check_dimension(d)
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    if m == 0:
        return 0.0
    if m == 1:
        return math.log(d)
    # N_m = (d + 2m - 2)/m * binom(d + m - 3, m - 1)
    return float(
        math.log(d + 2 * m - 2)
        - math.log(m)
        + gammaln(d + m - 2)
        - gammaln(m)
        - gammaln(d - 1)
    )


def multiplicity(m: int, d: int) -> float:
    """Number of distinct degree-m spherical harmonics on S^{d-1}, exact.

    Computed from the integer identity N_m = C(d+m-1, m) - C(d+m-3, m-2).
    Raises OverflowError (rather than returning inf) when the exact value does
    not fit a double; use log_multiplicity for those regimes.
    """
    m = int(m)
    d = _check_dimension(d)
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    if m == 0:
        return 1.0
    if log_multiplicity(m, d) > 700.0:
        raise OverflowError(
            f"N_m overflows double precision for m={m}, d={d}; "
            "use log_multiplicity"
        )
    exact = math.comb(d + m - 1, m) - (math.comb(d + m - 3, m - 2) if m >= 2 else 0)
    return float(exact)


@lru_cache(maxsize=8)
def _panel_rule(order: int):
    return roots_legendre(order)


def _panel_nodes(lo: float, hi: float, panels: int):
    base_x, base_w = _panel_rule(_QUAD_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    return (mids + half * base_x[None, :]).ravel(), np.tile(half * base_w, panels)


def _coeffs_on_nodes(theta, w, d: int, max_m: int):
    """All coefficients c_0..c_max_m at once on nodes in the angle variable.

    The substitution x = sin(theta) absorbs the endpoint branch point of the
    weight: mu(x) dx becomes an entire function of theta (proportional to
    cos^{d-2} theta), so Gauss-Legendre panels converge spectrally for every
    d.  Running r_m := q_m * weight instead of bare q_m keeps every
    intermediate finite: where the weight underflows, r is exactly 0 and
    stays 0, so the exponential growth of q_m near |x| = 1 never
    materializes.
    """
    x = np.sin(theta)
    # log cos(theta) via log1p(-2 sin^2(theta/2)): full relative precision even
    # when (d - 2) amplifies a 1-ulp error in cos by 1e8
    with np.errstate(divide="ignore"):
        log_cos = np.log1p(-2.0 * np.sin(0.5 * theta) ** 2)
        log_w = _mu_log_normalizer(d) + (d - 2.0) * log_cos
    weight = np.exp(log_w)
    coeffs = np.empty(max_m + 1)
    r_prev = weight
    coeffs[0] = w @ r_prev
    if max_m == 0:
        return coeffs
    r_cur = math.sqrt(d) * x * weight
    coeffs[1] = w @ r_cur
    for m in range(1, max_m):
        a, b = _recurrence_coeffs(m, d)
        r_prev, r_cur = r_cur, a * x * r_cur - b * r_prev
        coeffs[m + 1] = w @ r_cur
    return coeffs


def _default_hard_cap(d: int) -> int:
    return min(max(64, math.ceil(d ** 0.25)), _HARD_CAP_CLAMP)


@dataclass(frozen=True)
class GegenbauerBasis:
    """Per-(d, tau) cache: cap-indicator coefficients and harmonic multiplicities.

    coeffs[m] = integral over [tau, 1] of q_m d(mu); log_mults[m] = log N_m.
    Immutable after construction and safe to share across workers.
    """

    d: int
    tau: float
    max_m: int
    coeffs: np.ndarray
    log_mults: np.ndarray
    quad_error: float
    quad_nodes: int
    quad_converged: bool

    @property
    def mults(self) -> np.ndarray:
        """N_m as floats (inf where a double overflows; see log_mults)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_mults)

    @classmethod
    def build(cls, d: int, tau: float, max_m: int | None = None) -> "GegenbauerBasis":
        d = _check_dimension(d)
        tau = float(tau)
        if not -1.0 <= tau < 1.0:
            raise ValueError(f"tau must lie in [-1, 1), got {tau}")
        if max_m is None:
            max_m = _default_hard_cap(d)
        max_m = int(max_m)

        # Upper integration limit: beyond x_hi the remaining mu-mass is below
        # e^-750 even after multiplying by the worst-case polynomial growth
        # (|q_m| <= (2 sqrt(d) + 1)^m), so truncating there changes nothing at
        # double precision while letting the panels resolve the O(1/sqrt(d))
        # scale on which mu concentrates.
        budget = 750.0 + (max_m + 1) * math.log(2.0 * math.sqrt(d) + 1.0)
        x_mass = math.sqrt(min(1.0, 2.0 * budget / max(d - 3, 1)))
        x_hi = min(1.0, max(x_mass, tau + 30.0 / math.sqrt(d)))
        theta_lo, theta_hi = math.asin(tau), math.asin(x_hi)

        prev = None
        err = math.inf
        nodes = 0
        converged = False
        for panels in _QUAD_PANELS:
            theta, w = _panel_nodes(theta_lo, theta_hi, panels)
            coeffs = _coeffs_on_nodes(theta, w, d, max_m)
            nodes = panels * _QUAD_ORDER
            if prev is not None:
                err = float(np.max(np.abs(coeffs - prev)))
                if np.all(
                    np.abs(coeffs - prev) <= _QUAD_RTOL * np.abs(coeffs) + _QUAD_ATOL
                ):
                    converged = True
                    break
            prev = coeffs
        if not converged:
            warnings.warn(
                f"coefficient quadrature did not reach tolerance at {nodes} nodes "
                f"(d={d}, tau={tau:.6g}); achieved error estimate {err:.3e}",
                QuadratureWarning,
                stacklevel=2,
            )
        log_mults = np.array([log_multiplicity(m, d) for m in range(max_m + 1)])
        return cls(
            d=d,
            tau=tau,
            max_m=max_m,
            coeffs=coeffs,
            log_mults=log_mults,
            quad_error=err,
            quad_nodes=nodes,
            quad_converged=converged,
        )


@lru_cache(maxsize=64)
def _cached_basis(p: float, d: int, max_m: int | None) -> GegenbauerBasis:
    tau = solve_threshold(p, d).tau
    return GegenbauerBasis.build(d, tau, max_m)


def basis_for_density(p: float, d: int, max_m: int | None = None) -> GegenbauerBasis:
    """Basis at the threshold tau(p, d), cached per (p, d, max_m)."""
    return _cached_basis(float(p), int(d), max_m)


def gegenbauer_coefficient(m: int, d: int, tau: float) -> float:
    """Coefficient c_m = integral over [tau, 1] of q_m d(mu)."""
    m = int(m)
    if m < 0:
        raise ValueError(f"order must be >= 0, got {m}")
    basis = GegenbauerBasis.build(d, tau, max_m=max(m, 8))
    return float(basis.coeffs[m])


@dataclass(frozen=True)
class CycleExpectationResult:
    """Signed length-ell cycle expectation under the full geometric model.

    value          series sum over m >= 1 of c_m^ell / N_m^(ell/2 - 1)
    truncation_m   index of the last term added
    tail_bound     10x the magnitude of the last term examined
    scale          reference p^ell log^(ell/2)(1/p) / d^(ell/2 - 1)
    truncation_failed   hard cap hit with tail_bound > 1e-12 |value|
    below_dimension_guard   d < (5 log(1/p))^4, outside the warranted regime
    """

    ell: int
    p: float
    d: int
    value: float
    truncation_m: int
    tail_bound: float
    scale: float
    truncation_failed: bool
    below_dimension_guard: bool

    @property
    def ratio(self) -> float:
        """value / scale; bracketed by C^{-ell}, C^ell for the calibrated C."""
        return self.value / self.scale


def signed_cycle_expectation(
    ell: int, p: float, d: int, max_terms: int | None = None
) -> CycleExpectationResult:
    """Exact series for E[prod over cycle edges of (G_e - p)] under the full model.

    Terms are accumulated in sign/log space so that the huge harmonic
    multiplicities N_m never overflow.  Truncation follows the stated rule;
    `max_terms` forces a fixed-length partial sum (used by tests to pin the
    single-term value c_1^ell / d^(ell/2 - 1)).
    """
    ell = int(ell)
    if ell < 3:
        raise ValueError(f"cycle length must be >= 3, got {ell}")
    d = _check_dimension(d)
    p = float(p)
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if d < 4:
        raise ValueError(f"series evaluation requires d >= 4, got {d}")

    hard_cap = _default_hard_cap(d)
    if max_terms is not None:
        hard_cap = min(hard_cap, int(max_terms))
    basis = basis_for_density(p, d, None)

    half = ell / 2.0 - 1.0
    total = 0.0
    small_run = 0
    last_abs = 0.0
    stop_m = hard_cap
    stopped_by_rule = False
    for m in range(1, hard_cap + 1):
        cm = float(basis.coeffs[m])
        if cm == 0.0:
            term = 0.0
        else:
            mag = math.exp(ell * math.log(abs(cm)) - half * basis.log_mults[m])
            term = -mag if (cm < 0.0 and ell % 2 == 1) else mag
        total += term
        last_abs = abs(term)
        if max_terms is None:
            small_run = small_run + 1 if last_abs <= _SERIES_RTOL * abs(total) else 0
            if m >= _SERIES_MIN_M and small_run >= _SERIES_SMALL_RUN:
                stop_m = m
                stopped_by_rule = True
                break

    tail_bound = 10.0 * last_abs
    failed = (
        max_terms is None
        and not stopped_by_rule
        and tail_bound > 1e-12 * abs(total)
    )
    scale = p ** ell * math.log(1.0 / p) ** (ell / 2.0) / d ** half
    return CycleExpectationResult(
        ell=ell,
        p=p,
        d=d,
        value=total,
        truncation_m=stop_m,
        tail_bound=tail_bound,
        scale=scale,
        truncation_failed=failed,
        below_dimension_guard=d < (5.0 * math.log(1.0 / p)) ** 4,
    )


def sample_uniform_sphere(d: int, rng: np.random.Generator, size: int | None = None):
    """Uniform points on S^{d-1} as normalized standard Gaussian vectors.

    Returns shape (d,) for size=None, else (size, d).
    """
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if size is None:
        z = rng.standard_normal(d)
        return z / np.linalg.norm(z)
    z = rng.standard_normal((int(size), d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
