"""Sampling of the limit Gaussian objects for distribution-level comparison.

Three samplers: the joint kernel pair (order-0 and order-1 weighted empirical
fluctuations) on a finite time set, the limit fluctuation pair of the giant
over a lambda grid, and the Brownian time-change representation available in
the constant-weight-1 case.  All draws are centered Gaussians; reproducibility
is per seed within this artifact, and checks against them are statistical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import chol_with_jitter
from .theory import SupercriticalCurves, er_closed_forms, psi_cov, x_cov
from .weights import WeightModel

__all__ = [
    "LimitPathSample",
    "psi_cov_matrix",
    "sample_psi_pair",
    "sample_x_path",
    "er_brownian_path",
]

# evaluation times closer than this are treated as one point
_TIME_DEDUP_TOL = 1e-14


@dataclass(frozen=True)
class LimitPathSample:
    """One draw of the limit fluctuation pair on a lambda grid.

    ``x0`` is the count-fluctuation coordinate, ``x1`` the volume one
    (``None`` for the Brownian representation, which only covers counts).
    """

    lambdas: np.ndarray
    x0: np.ndarray
    x1: np.ndarray | None
    seed: int


def psi_cov_matrix(model: WeightModel, times) -> np.ndarray:
    """Joint 2m x 2m kernel covariance at m time points.

    Coordinates are ordered (order-0 at t_1..t_m, then order-1 at t_1..t_m).
    """
    ts = np.asarray(times, dtype=np.float64)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if np.any(ts < 0.0):
        raise ValueError("times must be >= 0")
    if np.unique(ts).size != ts.size:
        raise ValueError("times must be distinct")
    m = ts.size
    cov = np.empty((2 * m, 2 * m))
    for p in (0, 1):
        for q in (0, 1):
            for i in range(m):
                for j in range(m):
                    cov[p * m + i, q * m + j] = psi_cov(model, p, q, ts[i], ts[j])
    return cov


def _psd_factor(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Sampling factor F with F @ F.T ~= cov, honoring exact degeneracies.

    Zero-variance coordinates are almost surely zero and get a zero row.
    Coordinates whose covariance rows are bitwise equal are perfectly
    correlated copies and share one factor row, so their draws come out
    identical rather than jitter-close.  The reduced matrix goes through the
    jittered Cholesky policy.
    """
    dim = cov.shape[0]
    diag = np.diag(cov)
    active = np.flatnonzero(diag > 0.0)
    factor = np.zeros((dim, 0))
    jitter = 0.0
    if active.size:
        sub = cov[np.ix_(active, active)]
        _, first, inverse = np.unique(sub, axis=0, return_index=True, return_inverse=True)
        reduced = sub[np.ix_(first, first)]
        lower, jitter = chol_with_jitter(reduced)
        factor = np.zeros((dim, lower.shape[1]))
        factor[active] = lower[inverse]
    return factor, jitter


def sample_psi_pair(model: WeightModel, times, count: int, seed: int) -> np.ndarray:
    """``count`` joint draws of the kernel pair at the given times.

    Returns an array of shape (count, 2, m): ``[:, p, i]`` is the order-p
    coordinate at times[i].
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    ts = np.asarray(times, dtype=np.float64)
    cov = psi_cov_matrix(model, ts)
    factor, _ = _psd_factor(cov)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, factor.shape[1]))
    draws = z @ factor.T
    return draws.reshape(count, 2, ts.size)


def sample_x_path(curves: SupercriticalCurves, count: int, seed: int) -> list[LimitPathSample]:
    """Joint draws of the limit fluctuation pair over the curve grid.

    The kernel pair is evaluated on the deduplicated set of times
    lambda_i * theta_i (an arbitrary finite set, no monotonicity assumed) and
    assembled with the coefficient table of the limit covariance.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    cov = x_cov(curves)
    times = curves.lambdas * curves.theta
    # dedupe times within tolerance, keeping a map from grid index to unique time
    uniq: list[float] = []
    time_idx = np.empty(times.size, dtype=np.int64)
    for i, t in enumerate(times):
        for u, known in enumerate(uniq):
            if abs(t - known) <= _TIME_DEDUP_TOL:
                time_idx[i] = u
                break
        else:
            time_idx[i] = len(uniq)
            uniq.append(float(t))
    draws = sample_psi_pair(curves.model, np.array(uniq), count, seed)
    psi0 = draws[:, 0, :][:, time_idx]
    psi1 = draws[:, 1, :][:, time_idx]
    x0 = psi0 + cov.coeff[None, :] * psi1
    x1 = psi1 * cov.inv_beta[None, :]
    return [
        LimitPathSample(lambdas=curves.lambdas, x0=x0[k], x1=x1[k], seed=seed)
        for k in range(count)
    ]


def er_brownian_path(lambdas, count: int, seed: int) -> list[LimitPathSample]:
    """Count-fluctuation draws for constant weight 1 via Brownian time change.

    Samples B(v(lambda)) / u(lambda) with independent Gaussian increments
    over the increasing times v(lambda); the grid is rejected if the computed
    v fails to be non-decreasing, since that would falsify the increment
    scheme.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    grid = np.asarray(lambdas, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("lambda grid must be a non-empty 1-d sequence")
    forms = [er_closed_forms(lam) for lam in grid]
    v = np.array([f.v for f in forms])
    u = np.array([f.u for f in forms])
    dv = np.diff(np.concatenate(([0.0], v)))
    if np.any(dv < 0.0):
        raise ValueError(
            "Brownian time change requires non-decreasing v(lambda) along the grid"
        )
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, grid.size))
    brownian = np.cumsum(np.sqrt(dv)[None, :] * z, axis=1)
    x0 = brownian / u[None, :]
    lams = grid.copy()
    lams.setflags(write=False)
    return [
        LimitPathSample(lambdas=lams, x0=x0[k], x1=None, seed=seed)
        for k in range(count)
    ]
