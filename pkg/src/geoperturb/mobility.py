"""Mobility model and adversary belief machinery.

Transition probabilities are estimated from visit counts; the belief over
cells evolves as prior -> (Bayes on the released cell) -> posterior ->
(one Markov step) -> next prior. The delta-location set keeps the
smallest group of high-prior cells holding at least 1-delta of the mass.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .grid import LocationGrid

__all__ = [
    "SIMPLEX_TOL",
    "TransitionMatrix",
    "BeliefState",
    "PossibleLocationSet",
    "estimate_transition_matrix",
    "load_visit_counts_csv",
    "advance_prior",
    "bayes_posterior",
    "delta_location_set",
    "optimal_inference",
]

SIMPLEX_TOL = 1e-9


def _check_simplex(vec: np.ndarray, name: str = "probability vector") -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if (vec < -SIMPLEX_TOL).any():
        raise ValueError(f"{name} has negative entries")
    if abs(vec.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{name} sums to {vec.sum()!r}, expected 1")
    return vec


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic inter-cell transfer probabilities."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("transition matrix must be square")
        if (m < 0).any():
            raise ValueError("transition probabilities must be nonnegative")
        rows = m.sum(axis=1)
        if np.abs(rows - 1.0).max() > SIMPLEX_TOL:
            raise ValueError("transition matrix rows must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return self.m.shape[0]


@dataclass(frozen=True)
class BeliefState:
    """Prior/posterior pair over the grid at one timestamp."""

    prior: np.ndarray
    posterior: np.ndarray
    timestamp: int

    def __post_init__(self):
        object.__setattr__(self, "prior", _check_simplex(self.prior, "prior"))
        object.__setattr__(self, "posterior", _check_simplex(self.posterior, "posterior"))


@dataclass(frozen=True)
class PossibleLocationSet:
    """Smallest set of highest-prior cells with mass >= 1 - delta."""

    members: np.ndarray  # sorted cell indices
    delta: float
    mass: float
    surrogate: int | None = None  # set when the real location was excluded

    def __contains__(self, cell: int) -> bool:
        return bool(np.isin(cell, self.members))

    def __len__(self) -> int:
        return len(self.members)


def estimate_transition_matrix(counts, reachability=None) -> TransitionMatrix:
    """Row-normalize visit counts into transfer probabilities.

    Zero-count rows become self-loops so the matrix stays row-stochastic
    without inventing mobility. A count on a pair marked unreachable is an
    error, as is any negative count.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise ValueError("counts must be a square matrix")
    if (counts < 0).any():
        raise ValueError("visit counts must be nonnegative")
    if reachability is not None:
        reachability = np.asarray(reachability, dtype=bool)
        if reachability.shape != counts.shape:
            raise ValueError("reachability shape must match counts")
        if (counts[~reachability] > 0).any():
            raise ValueError("positive count on a geographically unreachable pair")
    totals = counts.sum(axis=1)
    m = np.zeros_like(counts)
    nonzero = totals > 0
    m[nonzero] = counts[nonzero] / totals[nonzero, None]
    for i in np.flatnonzero(~nonzero):
        m[i, i] = 1.0
    return TransitionMatrix(m)


def load_visit_counts_csv(path, n: int) -> np.ndarray:
    """Read (row, col, count) triples into an n x n count matrix."""
    counts = np.zeros((n, n), dtype=float)
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'row,col,count'")
            i, j, c = int(row[0]), int(row[1]), float(row[2])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"{path}:{lineno}: index out of range for n={n}")
            counts[i, j] += c
    return counts


def advance_prior(posterior, transitions: TransitionMatrix) -> np.ndarray:
    """One Markov step: next prior = posterior (row vector) times M."""
    posterior = _check_simplex(posterior, "posterior")
    if posterior.shape[0] != transitions.n:
        raise ValueError("posterior dimension does not match transition matrix")
    prior = posterior @ transitions.m
    # guard against drift from repeated multiplication
    return prior / prior.sum()


def bayes_posterior(prior, channel_column) -> np.ndarray:
    """Condition the prior on an observed release.

    ``channel_column[i]`` is the likelihood of the observed release given
    the real location is cell i. A zero denominator means the observation
    was impossible under the model, which the caller must not emit.
    """
    prior = _check_simplex(prior, "prior")
    lik = np.asarray(channel_column, dtype=float)
    if lik.shape != prior.shape:
        raise ValueError("channel column dimension mismatch")
    if (lik < 0).any():
        raise ValueError("likelihoods must be nonnegative")
    joint = prior * lik
    denom = joint.sum()
    if denom <= 0:
        raise ValueError("impossible observation: zero posterior mass")
    return joint / denom


def delta_location_set(prior, delta: float, real: int | None = None,
                       grid: LocationGrid | None = None,
                       metric: str = "3d") -> PossibleLocationSet:
    """Extract the delta-location set, substituting a surrogate if needed.

    Cells are ranked by prior descending (ties by index ascending) and the
    shortest prefix reaching mass 1-delta is kept. If ``real`` falls
    outside the set, the member nearest to it (per ``metric``) becomes the
    surrogate protected location; ``grid`` is required for that lookup.
    """
    prior = _check_simplex(prior, "prior")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    n = prior.shape[0]
    order = np.lexsort((np.arange(n), -prior))
    csum = np.cumsum(prior[order])
    target = 1.0 - delta
    k = int(np.searchsorted(csum, target - SIMPLEX_TOL)) + 1
    k = min(k, n)
    members = np.sort(order[:k])
    mass = float(prior[members].sum())
    assert mass >= target - SIMPLEX_TOL, "delta-set mass below threshold"
    if k > 1:
        # minimality: dropping the lightest member must break the threshold
        assert mass - prior[order[k - 1]] < target, "delta-set is not minimal"

    surrogate = None
    if real is not None and real not in set(members.tolist()):
        if grid is None:
            raise ValueError("grid required to pick a surrogate for an excluded real cell")
        d = grid.distance_matrix(metric)[real, members]
        surrogate = int(members[int(np.argmin(d))])
    return PossibleLocationSet(members=members, delta=float(delta), mass=mass,
                               surrogate=surrogate)


def optimal_inference(posterior, grid: LocationGrid, metric: str = "3d") -> int:
    """Cell minimizing the expected distance to the truth under the posterior."""
    posterior = _check_simplex(posterior, "posterior")
    if posterior.shape[0] != grid.n_cells:
        raise ValueError("posterior dimension does not match grid")
    cost = grid.distance_matrix(metric) @ posterior
    return int(np.argmin(cost))  # argmin takes the lowest index on ties
