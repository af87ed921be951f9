"""Simultaneous breadth-first walk encoding of the dynamic graph.

One draw of exponential clocks xi_j (rate w_j) encodes the giant component
for every edge intensity lambda at once: the path

    H(t) = (1/n) * sum_j w_j * 1[xi_j <= lambda t] - t

jumps by w_j/n at time xi_j/lambda and drifts down at slope -1 in between.
Its excursions above the running infimum correspond to connected components;
the longest excursion (first one on ties) is the giant.  The excursion
interval (g, d) gives the scaled volume d - g, and the vertices of the giant
are exactly the clocks landing in the closed window [lambda g, lambda d].

Because rescaling time by 1/lambda does not change the clock order, one sort
per realization serves every lambda; the per-lambda scan is a handful of
vectorized passes with all crossing times computed in closed form (the slope
is exactly -1), so there is no time discretization anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

from ._numeric import pairwise_cumsum
from .theory import SupercriticalCurves
from .weights import WeightVector

__all__ = [
    "WalkRealization",
    "ExcursionResult",
    "GiantPath",
    "sample_clocks",
    "longest_excursion",
    "all_excursions",
    "sweep",
    "walk_value",
]

# near-tie rule for "descent re-hits the running infimum"; exact ties have
# probability zero but floating point needs a deterministic decision
_LEVEL_TOL = 1e-12


@dataclass(frozen=True)
class WalkRealization:
    """One draw of clocks plus everything precomputed for per-lambda scans.

    The prefix sums of 1/n in clock order are k/n and stay implicit; volumes
    are extracted by correctly rounded summation over the clock window, which
    is order independent.
    """

    weights: np.ndarray       # original vertex order
    clocks: np.ndarray        # xi_j, original vertex order
    order: np.ndarray         # permutation sorting clocks ascending
    sorted_clocks: np.ndarray
    sorted_weights: np.ndarray
    mass_prefix: np.ndarray   # pairwise prefix sums of w/n in clock order

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def total_mass(self) -> float:
        """(1/n) * sum_j w_j, the total jump mass of the walk."""
        return float(self.mass_prefix[-1])

    @classmethod
    def from_clocks(cls, weights, clocks) -> "WalkRealization":
        """Build from explicit clocks (used by tests to inject hand values)."""
        w = np.asarray(weights, dtype=np.float64).copy()
        xi = np.asarray(clocks, dtype=np.float64).copy()
        if w.ndim != 1 or w.shape != xi.shape or w.size == 0:
            raise ValueError("weights and clocks must be equal-length non-empty 1-d arrays")
        if np.any(w <= 0.0) or np.any(xi <= 0.0):
            raise ValueError("weights and clocks must be strictly positive")
        order = np.argsort(xi)
        sorted_clocks = xi[order]
        sorted_w = w[order]
        mass_prefix = pairwise_cumsum(sorted_w / w.size)
        for arr in (w, xi, order, sorted_clocks, sorted_w, mass_prefix):
            arr.setflags(write=False)
        return cls(
            weights=w,
            clocks=xi,
            order=order,
            sorted_clocks=sorted_clocks,
            sorted_weights=sorted_w,
            mass_prefix=mass_prefix,
        )


@dataclass(frozen=True)
class ExcursionResult:
    """The excursion picked as the giant at one lambda.

    ``volume`` is the scaled volume d - g (the giant volume over n);
    ``total_volume`` is the actual weight sum over the clock window and
    agrees with n * (d - g) up to accumulated rounding.
    """

    g: float
    d: float
    volume: float
    count_fraction: float
    vertex_count: int
    total_volume: float


@dataclass(frozen=True)
class GiantPath:
    """Per-lambda giant statistics for one realization, coupled by one draw.

    Fluctuations are centered with the curves of the realization's own weight
    vector: fluc_count = (L - rho_n * n)/sqrt(n), fluc_volume =
    (V - theta_n * n)/sqrt(n).
    """

    lambdas: np.ndarray
    results: tuple[ExcursionResult, ...]
    fluc_count: np.ndarray
    fluc_volume: np.ndarray


def sample_clocks(w: WeightVector, seed: int) -> WalkRealization:
    """Draw the exponential clocks xi_j ~ Exp(w_j) for a weight vector."""
    rng = np.random.default_rng(seed)
    xi = rng.standard_exponential(w.n) / w.weights
    return WalkRealization.from_clocks(w.weights, xi)


def _scan(r: WalkRealization, lam: float):
    """Decompose the walk at intensity lam into its excursions.

    Returns arrays (g, d, start_idx, end_idx) over all excursions, in time
    order.  The path value just before jump k is B_k = S_{k-1} - t_k with
    S the jump-mass prefix and t_k = xi_(k)/lam; a jump opens a new excursion
    exactly when the preceding descent reached the running infimum, i.e. when
    B_k <= min(B_1..B_{k-1}) up to the near-tie tolerance.  Each excursion
    ends where the slope -1 descent from its last jump re-hits its base
    level, in closed form.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    t = r.sorted_clocks / lam
    s_after = r.mass_prefix
    s_before = np.concatenate(([0.0], s_after[:-1]))
    value_before = s_before - t
    value_after = s_after - t
    running_min = np.minimum.accumulate(value_before)
    prev_min = np.concatenate(([np.inf], running_min[:-1]))
    opens = value_before <= prev_min + _LEVEL_TOL * (1.0 + np.abs(prev_min))
    starts = np.flatnonzero(opens)
    ends = np.concatenate((starts[1:] - 1, [t.size - 1]))
    g = t[starts]
    d = t[ends] + (value_after[ends] - value_before[starts])
    return g, d, starts, ends


def _result_at(r: WalkRealization, g, d, starts, ends, idx: int) -> ExcursionResult:
    n = r.n
    lo, hi = int(starts[idx]), int(ends[idx])
    count = hi - lo + 1
    total_volume = fsum(r.sorted_weights[lo : hi + 1].tolist())
    return ExcursionResult(
        g=float(g[idx]),
        d=float(d[idx]),
        volume=float(d[idx] - g[idx]),
        count_fraction=count / n,
        vertex_count=count,
        total_volume=total_volume,
    )


def longest_excursion(r: WalkRealization, lam: float) -> ExcursionResult:
    """First-longest excursion of the walk at intensity lam.

    Lengths within the near-tie tolerance of the maximum count as tied and
    the earliest wins, so float noise cannot flip a real-arithmetic tie.
    """
    g, d, starts, ends = _scan(r, lam)
    lengths = d - g
    top = float(lengths.max())
    idx = int(np.flatnonzero(lengths >= top - _LEVEL_TOL * (1.0 + top))[0])
    return _result_at(r, g, d, starts, ends, idx)


def all_excursions(r: WalkRealization, lam: float) -> list[ExcursionResult]:
    """Every excursion at intensity lam, in time order."""
    g, d, starts, ends = _scan(r, lam)
    return [_result_at(r, g, d, starts, ends, i) for i in range(g.size)]


def sweep(r: WalkRealization, lambdas, curves_n: SupercriticalCurves) -> GiantPath:
    """Giant statistics across a lambda grid from the one realization.

    ``curves_n`` must be the curves of this realization's weight vector on
    exactly the requested grid; they provide the finite-n centering.
    """
    grid = np.asarray(lambdas, dtype=np.float64)
    if not np.array_equal(grid, curves_n.lambdas):
        raise ValueError("lambda grid does not match the grid of curves_n")
    n = r.n
    sqrt_n = np.sqrt(n)
    results = []
    fluc_count = np.empty(grid.size)
    fluc_volume = np.empty(grid.size)
    for i, lam in enumerate(grid):
        res = longest_excursion(r, lam)
        results.append(res)
        fluc_count[i] = (res.vertex_count - curves_n.rho[i] * n) / sqrt_n
        fluc_volume[i] = (res.total_volume - curves_n.theta[i] * n) / sqrt_n
    fluc_count.setflags(write=False)
    fluc_volume.setflags(write=False)
    return GiantPath(
        lambdas=curves_n.lambdas,
        results=tuple(results),
        fluc_count=fluc_count,
        fluc_volume=fluc_volume,
    )


def walk_value(r: WalkRealization, lam: float, t: float) -> float:
    """Exact step-function evaluation of H(t) at intensity lam."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    t = float(t)
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    pos = int(np.searchsorted(r.sorted_clocks, lam * t, side="right"))
    x1 = float(r.mass_prefix[pos - 1]) if pos > 0 else 0.0
    return x1 - t
