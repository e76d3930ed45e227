"""Computable embodiments of the analysis: problem constants, the variance
factor alpha(b), empirical variance-bound checks, and the linear-rate
constants C for the four smoothness / strong-convexity regimes.

Expectations are exact enumerations over a schedule's partition batches,
matching how the solvers actually sample; this distribution choice is
recorded in every report.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .estimators import (ENUMERATION_CAP, estimator_mean_bruteforce,
                         saag2_direction)
from .objective import (batch_grad, batch_smooth_value, full_grad,
                        objective_value, prox, row_loss, row_slope)


class RegimeError(ValueError):
    """Rate-constant parameters violate a validity condition of the bound."""


@dataclass(frozen=True)
class ProblemConstants:
    """Smoothness constant L and strong-convexity constant mu (L >= mu >= 0)."""

    L: float
    mu: float

    def __post_init__(self):
        if self.L <= 0 or self.mu < 0 or self.L < self.mu:
            raise ValueError("constants must satisfy L >= mu >= 0 and L > 0")


def alpha_b(n, b):
    """Variance factor (n - b) / (b * (n - 1)) as an exact rational.

    Equals 1 at b = 1 and 0 at b = n, and decreases in b.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 1 <= b <= n:
        raise ValueError(f"batch size {b} out of range [1, {n}]")
    return Fraction(n - b, b * (n - 1))


def estimate_constants(spec):
    """Curvature constants from the data: L bounds every component Hessian.

    logistic: L = max ||x_i||^2 / 4 + lambda2
    squared hinge: L = 2 max ||x_i||^2 + lambda2
    least squares: L = max ||x_i||^2 + lambda2
    mu = lambda2 in all cases.
    """
    max_sq = max(row.squared_norm() for row in spec.data.rows)
    lam2 = spec.reg.lambda2
    if spec.loss == "logistic":
        lipschitz = max_sq / 4.0 + lam2
    elif spec.loss == "squared_hinge":
        lipschitz = 2.0 * max_sq + lam2
    else:
        lipschitz = max_sq + lam2
    return ProblemConstants(L=lipschitz, mu=lam2)


@dataclass
class VarianceBoundReport:
    lhs: float
    rhs: float
    r_const: float
    passed: bool
    ragged: bool
    note: str


def variance_bound_check(spec, w, snap, schedule, constants, reference):
    """Check the variance bound of the biased snap estimator by enumeration.

    LHS is the exact mean of ||direction(B) - grad f(w)||^2 over the
    schedule's batches. RHS is
        8 L a [F(w) - F*] + 8 L (a m^2 + (m-1)^2) / m^2 [F(w~) - F*] + R'
    with a = alpha(b) and R' = 2 (m-1)^2 R / m^2, where R is the largest
    squared batch-gradient norm at the reference optimum. For smooth problems
    (lambda1 = 0) F is just the smooth objective, so the same formula covers
    both regimes.
    """
    n = spec.data.n
    if n > ENUMERATION_CAP:
        raise ValueError(f"n = {n} too large to enumerate (cap {ENUMERATION_CAP})")
    g = full_grad(spec, w)
    lhs = 0.0
    r_max = 0.0
    for batch in schedule.batches:
        diff = saag2_direction(spec, w, batch, snap) - g
        lhs += float(diff @ diff)
        gb = batch_grad(spec, reference.w, batch)
        r_max = max(r_max, float(gb @ gb))
    lhs /= schedule.m
    m = schedule.m
    a = float(alpha_b(n, schedule.b)) if n >= 2 else 0.0
    r_const = 2.0 * (m - 1) ** 2 / m ** 2 * r_max
    bracket_w = objective_value(spec, w) - reference.value
    bracket_snap = objective_value(spec, snap.point) - reference.value
    big_l = constants.L
    rhs = (8.0 * big_l * a * bracket_w
           + 8.0 * big_l * (a * m ** 2 + (m - 1) ** 2) / m ** 2 * bracket_snap
           + r_const)
    ragged = n % schedule.b != 0
    note = "expectation over partition batches"
    if ragged:
        note += "; n = m*b does not hold exactly (ragged last batch)"
    return VarianceBoundReport(lhs=lhs, rhs=rhs, r_const=r_const,
                               passed=lhs <= rhs, ragged=ragged, note=note)


@dataclass(frozen=True)
class RateParams:
    """Free analysis constant beta > 1, the start-vs-snap coupling constant c
    (0 < c << m), and the problem sizes."""

    beta: float
    c: float
    m: int
    b: int
    n: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 1 <= self.b <= self.n:
            raise ValueError("b out of range")
        if not 0 < self.c <= self.m:
            raise ValueError("need 0 < c <= m (and c small compared to m)")


@dataclass
class RateReport:
    theorem: int
    C: float
    C_exact: Fraction
    contraction: bool
    note: str


def theoretical_rate(theorem, params, constants=None):
    """Evaluate the linear-rate constant C for one of the four regimes.

    Theorem 1: smooth regularizer, no strong convexity.
    Theorem 2: smooth regularizer, strong convexity (needs L, mu).
    Theorem 3: non-smooth regularizer, no strong convexity.
    Theorem 4: non-smooth regularizer, strong convexity (needs L, mu).

    All arithmetic is exact rational; a RegimeError names the violated
    condition when a denominator is not positive. The reported contraction
    flag is C < 1; convergence then holds up to an additive neighborhood
    constant driven by the batch gradients at the optimum, which vanishes at
    b = n.
    """
    if theorem not in (1, 2, 3, 4):
        raise ValueError("theorem must be 1, 2, 3 or 4")
    a = alpha_b(params.n, params.b) if params.n >= 2 else Fraction(0)
    beta = Fraction(params.beta)
    c = Fraction(params.c)
    m = Fraction(params.m)
    note = "contraction holds up to a neighborhood constant (batch gradients at the optimum)"
    if params.n != params.m * params.b:
        note += f"; approximate: n = {params.n} but m*b = {params.m * params.b}"

    if theorem in (1, 3):
        denom = beta - 1 - 4 * a
        if denom <= 0:
            raise RegimeError(
                f"theorem {theorem} requires beta > 1 + 4*alpha(b) = {float(1 + 4 * a)}")
        c_exact = (4 * a / denom) * (c / m) \
            + 4 * (a * m ** 2 + (m - 1) ** 2) / (m ** 2 * denom)
    else:
        if constants is None:
            raise ValueError(f"theorem {theorem} needs problem constants L and mu")
        if constants.mu <= 0:
            raise RegimeError(f"theorem {theorem} requires strong convexity (mu > 0)")
        if beta <= 1:
            raise RegimeError(f"theorem {theorem} requires beta > 1")
        big_l = Fraction(constants.L)
        mu = Fraction(constants.mu)
        bm1 = beta - 1
        if theorem == 2:
            num = (c * big_l * beta / (m * mu)
                   + 4 * (a * m ** 2 + (m - 1) ** 2) / (m ** 2 * bm1)
                   - c * (m - 1) / m ** 2
                   + 4 * a / bm1)
            den = 1 - 4 * a / bm1 - c * ((m - 1) / m ** 2 - (4 * a / bm1) / m)
        else:
            num = (big_l * c * beta / (m * mu)
                   + 4 * c * a / (m * bm1)
                   - c * (m - 1) / m ** 2
                   + 4 * (a * m ** 2 + (m - 1) ** 2) / (m ** 2 * bm1))
            den = 1 - 4 * a / bm1 - c * (m - 1) / m ** 2 + 4 * c * a / (m * bm1)
        if den <= 0:
            raise RegimeError(
                f"theorem {theorem} denominator is not positive at beta = {params.beta}")
        c_exact = num / den
    return RateReport(theorem=theorem, C=float(c_exact), C_exact=c_exact,
                      contraction=c_exact < 1, note=note)


def best_beta(theorem, c, m, b, n, constants=None, grid_size=200):
    """Search a log grid beta in [1.01, 1e4] for the smallest C.

    Invalid regimes on the grid are skipped; returns (beta, RateReport) or
    raises RegimeError when no grid point is valid.
    """
    best = None
    for beta in np.logspace(np.log10(1.01), 4.0, grid_size):
        try:
            report = theoretical_rate(
                theorem, RateParams(beta=float(beta), c=c, m=m, b=b, n=n), constants)
        except RegimeError:
            continue
        if best is None or report.C < best[1].C:
            best = (float(beta), report)
    if best is None:
        raise RegimeError(f"no valid beta in [1.01, 1e4] for theorem {theorem}")
    return best


# ---------------------------------------------------------------------------
# verification suites (library side of the `verify` command)

def gradient_check(spec, w, h=1e-6, batch=None):
    """Max relative coordinate error of the analytic batch gradient against
    central finite differences of the batch smooth objective."""
    if batch is None:
        batch = np.arange(spec.data.n)
    g = batch_grad(spec, w, batch)
    worst = 0.0
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        fd = (batch_smooth_value(spec, w + e, batch)
              - batch_smooth_value(spec, w - e, batch)) / (2 * h)
        denom = max(abs(g[j]), abs(fd), 1e-8)
        worst = max(worst, abs(g[j] - fd) / denom)
    return worst


def prox_check(reg, z, eta, grid=4001):
    """Gap between the closed-form prox and a scalar brute-force minimizer of
    (1/(2 eta)) (t - z)^2 + lambda1 |t|, refined over four grid passes.

    The grid search runs in extended precision so the objective stays
    resolvable near its flat bottom."""
    best_err = 0.0
    eta_l = np.longdouble(eta)
    lam1 = np.longdouble(reg.lambda1)
    for zj in np.atleast_1d(z):
        zl = np.longdouble(zj)
        lo, hi = -abs(zl) - 1, abs(zl) + 1
        t_best = np.longdouble(0.0)
        for _ in range(4):
            ts = np.linspace(lo, hi, grid, dtype=np.longdouble)
            vals = (ts - zl) ** 2 / (2 * eta_l) + lam1 * np.abs(ts)
            t_best = ts[int(np.argmin(vals))]
            span = (hi - lo) / (grid - 1)
            lo, hi = t_best - 2 * span, t_best + 2 * span
        closed = prox(np.array([zj]), eta, reg)[0]
        best_err = max(best_err, abs(float(closed - t_best)))
    return best_err


def bias_identity_gap(spec, w, snap, schedule, snap_denom=None):
    """Norm of mean_B[direction] - grad f(w) - ((m-1)/m) grad f(w~).

    Exactly zero in expectation for the biased snap estimator on an
    equal-size partition.
    """
    mean = estimator_mean_bruteforce("saag2", spec, w, snap, schedule,
                                     snap_denom=snap_denom)
    m = schedule.m
    expected = full_grad(spec, w) + (m - 1) / m * full_grad(spec, snap.point)
    return float(np.linalg.norm(mean - expected))


def unbiasedness_gap(spec, w, snap, schedule):
    """Norm of mean_B[unbiased direction] - grad f(w)."""
    mean = estimator_mean_bruteforce("svrg", spec, w, snap, schedule)
    return float(np.linalg.norm(mean - full_grad(spec, w)))


def quadratic_bound_check(spec, constants, n_pairs=1000, seed=0, scale=1.0):
    """Sampled validation of the quadratic upper bound implied by L:
    f_i(y) <= f_i(x) + grad f_i(x)^T (y - x) + L/2 ||y - x||^2.

    Returns the worst violation (<= 0 when the bound holds everywhere).
    """
    rng = np.random.default_rng(seed)
    d = spec.data.d
    lam2 = spec.reg.lambda2
    big_l = constants.L
    worst = -np.inf
    for _ in range(n_pairs):
        x = scale * rng.standard_normal(d)
        y = scale * rng.standard_normal(d)
        i = int(rng.integers(spec.data.n))
        fx = row_loss(spec, x, i) + 0.5 * lam2 * float(x @ x)
        fy = row_loss(spec, y, i) + 0.5 * lam2 * float(y @ y)
        row = spec.data.rows[i]
        gx = np.zeros(d)
        if row.nnz:
            gx[row.indices - 1] = row_slope(spec, x, i) * row.values
        gx += lam2 * x
        bound = fx + float(gx @ (y - x)) + 0.5 * big_l * float((y - x) @ (y - x))
        worst = max(worst, fy - bound)
    return worst
