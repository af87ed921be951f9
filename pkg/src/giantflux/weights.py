"""Vertex-weight distributions and their moment functionals.

A weight model describes the law of a vertex weight W: constant, finite
discrete, or the empirical distribution of an explicit weight vector.  All
three are finitely supported, so every expectation used by the rest of the
package is an exact finite sum.  The module also generates finite-n weight
vectors (iid draws, or deterministic quantile vectors) and reports the
diagnostics that justify treating a vector as a good finite-n stand-in for
its limiting law.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "WeightModel",
    "WeightVector",
    "AssumptionDiagnostics",
    "mixed_moment",
    "phi",
    "phi_prime",
    "sample_weight_vector",
    "assumption_diagnostics",
]

_PROB_SUM_TOL = 1e-12


def _frozen(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WeightModel:
    """Distribution of a strictly positive vertex weight W.

    ``kind`` is one of ``constant``, ``discrete``, ``empirical``.  ``values``
    holds the support (for ``empirical``, every entry of the underlying
    vector, duplicates included) and ``probs`` the matching probabilities
    (``None`` means uniform over ``values``).  Build instances through the
    classmethods; they validate positivity and probability normalization.
    """

    kind: str
    values: np.ndarray
    probs: np.ndarray | None

    @classmethod
    def constant(cls, c: float) -> "WeightModel":
        c = float(c)
        if not c > 0.0:
            raise ValueError(f"constant weight must be > 0, got {c}")
        return cls("constant", _frozen([c]), _frozen([1.0]))

    @classmethod
    def discrete(cls, atoms: Sequence[tuple[float, float]]) -> "WeightModel":
        """Finite discrete law from (weight, probability) pairs."""
        if len(atoms) == 0:
            raise ValueError("discrete model needs at least one atom")
        w = _frozen([a[0] for a in atoms])
        p = _frozen([a[1] for a in atoms])
        if np.any(w <= 0.0):
            raise ValueError(f"atom weights must be > 0, got {w.tolist()}")
        if np.any(p <= 0.0) or np.any(p > 1.0):
            raise ValueError(f"atom probabilities must lie in (0, 1], got {p.tolist()}")
        total = float(np.sum(p))
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1 within {_PROB_SUM_TOL}")
        return cls("discrete", w, p)

    @classmethod
    def empirical(cls, weights: Sequence[float]) -> "WeightModel":
        """Uniform law over an explicit, non-empty weight vector."""
        w = _frozen(weights)
        if w.size == 0:
            raise ValueError("empirical model needs a non-empty weight sequence")
        if np.any(w <= 0.0):
            raise ValueError("empirical weights must all be > 0")
        return cls("empirical", w, None)

    @classmethod
    def from_config(cls, config: dict) -> "WeightModel":
        """Parse the JSON wire form used in experiment configs."""
        if not isinstance(config, dict) or "type" not in config:
            raise ValueError("weight model config must be an object with a 'type' field")
        kind = config["type"]
        if kind == "constant":
            if "c" not in config:
                raise ValueError("constant weight model config needs field 'c'")
            return cls.constant(config["c"])
        if kind == "discrete":
            if "atoms" not in config:
                raise ValueError("discrete weight model config needs field 'atoms'")
            return cls.discrete([(a[0], a[1]) for a in config["atoms"]])
        if kind == "empirical":
            if "weights" not in config:
                raise ValueError("empirical weight model config needs field 'weights'")
            return cls.empirical(config["weights"])
        raise ValueError(f"unknown weight model type {kind!r}")

    def to_config(self) -> dict:
        if self.kind == "constant":
            return {"type": "constant", "c": float(self.values[0])}
        if self.kind == "discrete":
            assert self.probs is not None
            return {
                "type": "discrete",
                "atoms": [[float(w), float(p)] for w, p in zip(self.values, self.probs)],
            }
        return {"type": "empirical", "weights": self.values.tolist()}


@dataclass(frozen=True)
class WeightVector:
    """A concrete length-n weight vector together with its provenance."""

    n: int
    weights: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        if self.n < 1 or self.weights.shape != (self.n,):
            raise ValueError(f"weight vector length {self.weights.shape} does not match n={self.n}")
        if np.any(self.weights <= 0.0):
            raise ValueError("weight vector entries must all be > 0")


@dataclass(frozen=True)
class AssumptionDiagnostics:
    """Finite-n health check for a weight vector.

    ``max_weight_sq_over_n`` tracks whether a single heavy vertex dominates;
    the asymptotic requirement is that it vanish, which cannot be checked at
    one n, so ``warning`` uses the heuristic threshold 0.01 (strict).
    """

    second_moment: float
    max_weight_sq_over_n: float
    warning: bool


def _check_t(t: float) -> float:
    t = float(t)
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    return t


def mixed_moment(model: WeightModel, k: int, t: float) -> float:
    """E[W^k exp(-W t)], exact for the finitely supported models.

    Only k in {0, 1, 2} is supported: nothing downstream needs higher
    moments, and refusing k > 2 keeps the moment assumptions honest.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"moment order k must be in {{0, 1, 2}}, got {k}")
    t = _check_t(t)
    w = model.values
    terms = w**k * np.exp(-t * w)
    if model.probs is None:
        # np.mean sums pairwise, keeping accumulation error O(log n) ulps
        return float(np.mean(terms))
    return float(np.dot(model.probs, terms))


def phi(model: WeightModel, p: int, t: float) -> float:
    """E[W^p (1 - exp(-W t))] for p in {0, 1}.

    Non-decreasing in t, zero at t=0, bounded above by E[W^p].
    """
    if p not in (0, 1):
        raise ValueError(f"p must be 0 or 1, got {p}")
    return mixed_moment(model, p, 0.0) - mixed_moment(model, p, t)


def phi_prime(model: WeightModel, p: int, t: float) -> float:
    """d/dt of ``phi(model, p, t)``, i.e. E[W^(p+1) exp(-W t)]."""
    if p not in (0, 1):
        raise ValueError(f"p must be 0 or 1, got {p}")
    return mixed_moment(model, p + 1, t)


def _quantile_vector(model: WeightModel, n: int) -> np.ndarray:
    """Deterministic inverse-CDF vector at midpoint levels (j - 1/2)/n.

    Midpoints avoid evaluating the inverse CDF at 0 or 1.
    """
    assert model.probs is not None
    order = np.argsort(model.values, kind="stable")
    atoms = model.values[order]
    cum = np.cumsum(model.probs[order])
    cum[-1] = 1.0  # guard against the probability sum rounding below 1
    levels = (np.arange(1, n + 1) - 0.5) / n
    idx = np.searchsorted(cum, levels, side="left")
    return atoms[idx]


def sample_weight_vector(model: WeightModel, n: int, mode: str, seed: int) -> WeightVector:
    """Generate a length-n weight vector from the model.

    ``iid`` draws independent samples of W.  ``quantile`` returns the
    deterministic vector w_j = F^{-1}((j - 1/2)/n), which reproduces the
    model's moments without sampling noise; it is rejected for empirical
    models since those already *are* a finite vector.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if mode == "quantile":
        if model.kind == "empirical":
            raise ValueError("quantile mode is not defined for empirical models")
        if model.kind == "constant":
            w = np.full(n, float(model.values[0]))
        else:
            w = _quantile_vector(model, n)
        return WeightVector(n=n, weights=_frozen(w), provenance="quantile")
    if mode == "iid":
        rng = np.random.default_rng(seed)
        if model.kind == "constant":
            w = np.full(n, float(model.values[0]))
        elif model.kind == "discrete":
            w = rng.choice(model.values, size=n, p=model.probs)
        else:
            w = model.values[rng.integers(0, model.values.size, size=n)]
        return WeightVector(n=n, weights=_frozen(w), provenance=f"iid-sample(seed={seed})")
    raise ValueError(f"unknown sampling mode {mode!r}; expected 'iid' or 'quantile'")


def assumption_diagnostics(v: WeightVector) -> AssumptionDiagnostics:
    """Second moment and heavy-vertex diagnostic for a weight vector."""
    w = v.weights
    second = float(np.mean(w * w))
    heavy = float(np.max(w)) ** 2 / v.n
    return AssumptionDiagnostics(
        second_moment=second,
        max_weight_sq_over_n=heavy,
        warning=heavy > 0.01,
    )
