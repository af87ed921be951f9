"""Deterministic supercritical curves and the limit Gaussian covariance.

For a weight model with E[W^2] > 0 the giant component emerges at
lambda_crit = 1 / E[W^2].  Above it, the limiting volume fraction theta(lambda)
is the unique positive root of the concave map f(t) = phi_1(lambda t) - t, the
vertex fraction is rho = phi_0(lambda theta), and beta = -f'(theta) > 0 sets
the 1/beta fluctuation scale.  The joint fluctuation limit of (count, volume)
of the giant is a centered bivariate Gaussian whose covariance is assembled
here from the kernel of the weighted empirical fluctuation processes:

    psi_cov(p, q, s, t) = E[W^(p+q) (exp(-W max(s,t)) - exp(-W (s+t)))].

The pair at parameter lambda is a linear combination of the two kernel
coordinates evaluated at time lambda * theta(lambda), with coefficients
(1, lambda*phi_0'(lambda theta)/beta) for the count and (0, 1/beta) for the
volume.  The Erdos-Renyi closed forms (constant weight 1) are kept as exact
analytic anchors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import chol_with_jitter
from .weights import WeightModel, mixed_moment, phi, phi_prime

__all__ = [
    "ConvergenceError",
    "SupercriticalCurves",
    "LimitCovariance",
    "ErClosedForms",
    "DEFAULT_MARGIN",
    "lambda_crit",
    "theta",
    "rho",
    "beta",
    "psi_cov",
    "supercritical_curves",
    "x_cov",
    "er_closed_forms",
]

#: Default relative margin above lambda_crit required of lambda grids.  beta
#: vanishes at criticality, so 1/beta blows up on grids that hug the edge.
DEFAULT_MARGIN = 1e-3

_ROOT_TOL = 1e-12
_MAX_BISECT = 200


class ConvergenceError(RuntimeError):
    """Bisection failed to reach its tolerance within the step budget."""


def lambda_crit(model: WeightModel) -> float:
    """Critical edge-intensity parameter, 1 / E[W^2]."""
    return 1.0 / mixed_moment(model, 2, 0.0)


def theta(model: WeightModel, lam: float) -> float:
    """Limiting giant volume fraction: positive root of phi_1(lambda t) = t.

    Returns 0 for lambda <= lambda_crit.  Above criticality the root is
    located to 1e-12 absolute by guaranteed bisection: f(t) =
    phi_1(lambda t) - t is strictly concave with f(0) = 0, f'(0) =
    lambda E[W^2] - 1 > 0 and f(E[W]) < 0, so we first bisect the monotone
    derivative on [0, E[W]] to bracket the maximizer, then bisect f itself on
    the right branch.
    """
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if lam <= lambda_crit(model):
        return 0.0
    mean_w = mixed_moment(model, 1, 0.0)

    def f(t: float) -> float:
        return phi(model, 1, lam * t) - t

    def f_prime(t: float) -> float:
        return lam * mixed_moment(model, 2, lam * t) - 1.0

    # Stage 1: the derivative decreases strictly from f'(0) > 0 to
    # f'(E[W]) < 0; bisect it to a point a with f'(a) > 0, hence 0 < a < theta.
    lo, hi = 0.0, mean_w
    for _ in range(_MAX_BISECT):
        if hi - lo <= _ROOT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if f_prime(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    a, b = lo, mean_w
    if not f(a) > 0.0:
        # Only reachable when lambda sits so close to lambda_crit that the
        # maximizer is below resolvable scale.
        raise ConvergenceError(
            f"could not bracket the root at lambda={lam:g}; "
            "lambda is numerically indistinguishable from lambda_crit"
        )
    # Stage 2: f > 0 on (0, theta) and f < 0 beyond, so sign bisection on
    # [a, E[W]] converges unconditionally.
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (a + b)
        if f(mid) >= 0.0:
            a = mid
        else:
            b = mid
        if b - a <= _ROOT_TOL:
            return 0.5 * (a + b)
    raise ConvergenceError(
        f"root bisection did not reach tolerance {_ROOT_TOL:g} in {_MAX_BISECT} steps"
    )


def rho(model: WeightModel, lam: float) -> float:
    """Limiting giant vertex fraction, phi_0(lambda * theta(lambda))."""
    return phi(model, 0, lam * theta(model, lam))


def beta(model: WeightModel, lam: float) -> float:
    """Negative slope of the fixed-point map at its root; in (0, 1).

    Defined only above criticality: everything downstream divides by it, and
    it tends to 0 at lambda_crit.
    """
    lam = float(lam)
    crit = lambda_crit(model)
    if lam <= crit:
        raise ValueError(
            f"beta requires lambda > lambda_crit = {crit:g}, got lambda = {lam:g}"
        )
    return 1.0 - lam * mixed_moment(model, 2, lam * theta(model, lam))


def psi_cov(model: WeightModel, p: int, q: int, s: float, t: float) -> float:
    """Covariance kernel of the weighted empirical fluctuation pair.

    E[W^(p+q) (exp(-W max(s,t)) - exp(-W (s+t)))]; symmetric in (s, t) and
    zero whenever either time is 0.
    """
    if p not in (0, 1) or q not in (0, 1):
        raise ValueError(f"p and q must be in {{0, 1}}, got ({p}, {q})")
    s = float(s)
    t = float(t)
    if s < 0.0 or t < 0.0:
        raise ValueError(f"times must be >= 0, got ({s}, {t})")
    k = p + q
    return mixed_moment(model, k, max(s, t)) - mixed_moment(model, k, s + t)


@dataclass(frozen=True)
class SupercriticalCurves:
    """Tabulated (lambda, theta, rho, beta) for a model over a lambda grid."""

    model: WeightModel
    lambda_crit: float
    lambdas: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    beta: np.ndarray

    def __len__(self) -> int:
        return self.lambdas.size


def supercritical_curves(
    model: WeightModel,
    lambdas,
    margin: float = DEFAULT_MARGIN,
) -> SupercriticalCurves:
    """Tabulate theta, rho, beta over a strictly ascending supercritical grid.

    Every grid point must satisfy lambda >= lambda_crit * (1 + margin); the
    first offender is named in the error.
    """
    grid = np.asarray(lambdas, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("lambda grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("lambda grid must be strictly ascending")
    crit = lambda_crit(model)
    threshold = crit * (1.0 + margin)
    if grid[0] < threshold:
        raise ValueError(
            f"lambda = {grid[0]:.17g} is below the supercritical threshold "
            f"lambda_crit * (1 + margin) = {threshold:.17g} (lambda_crit = {crit:.17g})"
        )
    th = np.array([theta(model, lam) for lam in grid])
    rh = np.array([phi(model, 0, lam * t) for lam, t in zip(grid, th)])
    be = np.array([beta(model, lam) for lam in grid])
    for arr in (grid, th, rh, be):
        arr.setflags(write=False)
    return SupercriticalCurves(
        model=model, lambda_crit=crit, lambdas=grid, theta=th, rho=rh, beta=be
    )


@dataclass(frozen=True)
class LimitCovariance:
    """Joint covariance of the limit fluctuation pair over a lambda grid.

    ``matrix`` is the 2m x 2m covariance with coordinates ordered
    (count_1, volume_1, count_2, volume_2, ...).  ``coeff`` holds the factor
    multiplying the weighted kernel coordinate inside the count fluctuation,
    lambda * phi_0'(lambda theta) / beta, and ``inv_beta`` is the volume
    fluctuation scale 1/beta.  ``jitter`` records the diagonal jitter the PSD
    factorization needed (0 means clean).
    """

    lambdas: np.ndarray
    matrix: np.ndarray
    coeff: np.ndarray
    inv_beta: np.ndarray
    jitter: float

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 cross-covariance of the pair at grid points i and j."""
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    @property
    def var_count(self) -> np.ndarray:
        return np.diag(self.matrix)[0::2]

    @property
    def var_volume(self) -> np.ndarray:
        return np.diag(self.matrix)[1::2]

    @property
    def cov_count_volume(self) -> np.ndarray:
        m = self.lambdas.size
        return np.array([self.matrix[2 * i, 2 * i + 1] for i in range(m)])


def x_cov(curves: SupercriticalCurves) -> LimitCovariance:
    """Covariance of the limit pair by bilinearity from the kernel.

    With T_i = lambda_i * theta_i, the count coordinate is
    psi_0(T_i) + coeff_i * psi_1(T_i) and the volume coordinate is
    psi_1(T_i) / beta_i, so every entry is a linear combination of kernel
    values of weight order 0, 1, 2.  The assembled matrix is validated PSD by
    the jittered Cholesky policy.
    """
    model = curves.model
    lams = curves.lambdas
    m = lams.size
    times = lams * curves.theta
    coeff = np.array(
        [lam * phi_prime(model, 0, t) / b for lam, t, b in zip(lams, times, curves.beta)]
    )
    inv_beta = 1.0 / curves.beta

    def kernel(k: int, s: float, t: float) -> float:
        return mixed_moment(model, k, max(s, t)) - mixed_moment(model, k, s + t)

    cov = np.zeros((2 * m, 2 * m))
    for i in range(m):
        for j in range(i, m):
            k0 = kernel(0, times[i], times[j])
            k1 = kernel(1, times[i], times[j])
            k2 = kernel(2, times[i], times[j])
            cc = k0 + (coeff[i] + coeff[j]) * k1 + coeff[i] * coeff[j] * k2
            cv = (k1 + coeff[i] * k2) * inv_beta[j]
            vc = (k1 + coeff[j] * k2) * inv_beta[i]
            vv = k2 * inv_beta[i] * inv_beta[j]
            cov[2 * i, 2 * j] = cc
            cov[2 * i, 2 * j + 1] = cv
            cov[2 * i + 1, 2 * j] = vc
            cov[2 * i + 1, 2 * j + 1] = vv
            if j > i:
                cov[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = (
                    cov[2 * i : 2 * i + 2, 2 * j : 2 * j + 2].T
                )
    _, jitter = chol_with_jitter(cov)
    for arr in (cov, coeff, inv_beta):
        arr.setflags(write=False)
    return LimitCovariance(
        lambdas=lams, matrix=cov, coeff=coeff, inv_beta=inv_beta, jitter=jitter
    )


@dataclass(frozen=True)
class ErClosedForms:
    """Erdos-Renyi analytic anchors at a supercritical lambda."""

    rho_er: float
    sigma_sq: float
    u: float
    v: float


_ER_MODEL = WeightModel.constant(1.0)


def er_closed_forms(lam: float) -> ErClosedForms:
    """Closed forms for constant weight 1: giant fraction, its asymptotic
    variance, and the Brownian time-change pair (u, v).

    rho_er solves 1 - exp(-lambda x) = x on (0, 1); then
    sigma_sq = rho (1 - rho) / (1 - lambda (1 - rho))^2,
    u = 1/(1 - rho) - lambda, v = rho/(1 - rho), and v / u^2 = sigma_sq.
    """
    lam = float(lam)
    if lam <= 1.0:
        raise ValueError(f"Erdos-Renyi closed forms require lambda > 1, got {lam}")
    r = theta(_ER_MODEL, lam)  # for W = 1 the fixed point equals the fraction
    one_minus = 1.0 - r
    sigma_sq = r * one_minus / (1.0 - lam * one_minus) ** 2
    return ErClosedForms(
        rho_er=r,
        sigma_sq=sigma_sq,
        u=1.0 / one_minus - lam,
        v=r / one_minus,
    )
