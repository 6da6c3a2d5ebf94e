"""Finite Markov chains: validation, classification and the discriminant."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ChainValidationError, NegativeEntry, NotReversible, NotSquare, RowSumViolation

ROW_SUM_TOL = 1e-12
DETAILED_BALANCE_TOL = 1e-10
SYMMETRY_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """A validated row-stochastic transition matrix.

    ``p[x, y]`` is the probability of moving from state ``x`` to state ``y``.
    Construct through :func:`load_chain`; the matrix is stored read-only.
    """

    p: np.ndarray
    labels: Optional[tuple] = None

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def __repr__(self):
        return f"MarkovChain(n={self.n})"


@dataclass(frozen=True, eq=False)
class ChainClassification:
    ergodic: bool
    reversible: bool
    symmetric: bool
    stationary: Optional[np.ndarray] = field(default=None)


@dataclass(frozen=True, eq=False)
class Discriminant:
    """Symmetric matrix with entries sqrt(p[x, y] * p[y, x])."""

    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]


def load_chain(matrix, labels: Optional[Sequence[str]] = None) -> MarkovChain:
    """Validate ``matrix`` and wrap it as a :class:`MarkovChain`.

    Rows are checked against a 1e-12 row-sum tolerance and are never
    renormalized.

    Raises:
        NotSquare: if the input is not an n x n array with n >= 1.
        NegativeEntry: for the first negative entry in row-major order.
        RowSumViolation: for the first row whose sum is off by more than 1e-12.
    """
    p = np.array(matrix, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
        raise NotSquare(p.shape)
    if not np.all(np.isfinite(p)):
        x, y = np.argwhere(~np.isfinite(p))[0]
        raise ChainValidationError(f"non-finite entry p[{x}][{y}] = {p[x, y]!r}")
    neg = np.argwhere(p < 0)
    if len(neg):
        x, y = neg[0]
        raise NegativeEntry(int(x), int(y), float(p[x, y]))
    sums = p.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if len(bad):
        raise RowSumViolation(int(bad[0]), float(sums[bad[0]]))
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != p.shape[0]:
            raise ValueError(f"expected {p.shape[0]} labels, got {len(labels)}")
    return MarkovChain(_frozen(p), labels)


def is_strongly_connected(p: np.ndarray) -> bool:
    """Strong connectivity of the digraph with an arc wherever p > 0."""
    if p.shape[0] == 1:
        return True
    ncomp, _ = connected_components(p > 0, directed=True, connection="strong")
    return ncomp == 1


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """Solve pi P = pi with sum(pi) = 1 as one stacked linear system.

    Assumes the fixed point is unique (strongly connected support).
    """
    n = p.shape[0]
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def classify(chain: MarkovChain) -> ChainClassification:
    p = chain.p
    symmetric = bool(np.max(np.abs(p - p.T)) <= SYMMETRY_TOL)
    ergodic = is_strongly_connected(p)
    if not ergodic:
        return ChainClassification(False, False, symmetric, None)
    pi = _frozen(stationary_distribution(p))
    flow = pi[:, None] * p
    reversible = bool(np.max(np.abs(flow - flow.T)) <= DETAILED_BALANCE_TOL)
    return ChainClassification(True, reversible, symmetric, pi)


def discriminant(chain: MarkovChain) -> Discriminant:
    p = chain.p
    n = chain.n
    d = np.zeros((n, n))
    iu, ju = np.triu_indices(n)
    vals = np.sqrt(p[iu, ju] * p[ju, iu])
    d[iu, ju] = vals
    d[ju, iu] = vals
    return Discriminant(_frozen(d))


def verify_similarity(
    chain: MarkovChain,
    disc: Discriminant,
    classification: Optional[ChainClassification] = None,
) -> float:
    """Max-abs residual of D - D_pi P D_pi^{-1}, D_pi = diag(sqrt(pi)).

    Raises:
        NotReversible: if the chain is not ergodic and reversible.
    """
    cls = classification if classification is not None else classify(chain)
    if not (cls.ergodic and cls.reversible):
        raise NotReversible("similarity to the discriminant needs an ergodic reversible chain")
    s = np.sqrt(cls.stationary)
    conj = s[:, None] * chain.p / s[None, :]
    return float(np.max(np.abs(disc.d - conj)))
