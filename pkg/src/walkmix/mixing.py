"""Average mixing matrices of the discrete and continuous walks.

The discrete matrix has (x, y) entry equal to the long-run time average of
the probability that the walk started in S e_y sits on an outgoing arc of x.
It is computed three ways: by a finite Cesaro average, from the eigenspace
projections of U, and from the closed form in the spectral idempotents E_r
of the discriminant,

    M = sum_r E_r**2 + 1/2 (P^T - I) sum_{r >= 2} E_r**2 / (1 - lam_r^2),

where ``**2`` is the entrywise square and r = 1 is the eigenvalue 1.  The
continuous walk exp(itD) has average mixing matrix sum_r E_r**2, computed
in closed form and by numerical time integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .chain import ChainClassification, Discriminant, MarkovChain, classify
from .errors import (
    ConsistencyError,
    IncompleteIdempotents,
    MinusOneEigenvalue,
    NotAutomorphism,
    NotErgodic,
    NotReversible,
)
from .spectral import SpectralDecomposition, decompose, flat_eigenvector_test
from .walk import SzegedyWalk, WalkIdempotents, completeness_residual

NEGATIVE_CLAMP = 1e-10
COLUMN_SUM_TOL = 1e-8
COMPLETENESS_TOL = 1e-7
EXACT_UNIFORM_TOL = 1e-8
EMPIRICAL_UNIFORM_TOL = 5e-3
DEFAULT_T = 20000

_EXACT_METHODS = ("walk-idempotents", "closed-form", "idempotent-squares")


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """A column-stochastic mixing matrix and how it was obtained.

    kind is "discrete" or "continuous"; method is one of "empirical",
    "walk-idempotents", "closed-form", "idempotent-squares", "time-integral".
    """

    m: np.ndarray
    kind: str
    method: str
    params: Dict[str, object] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def exact(self) -> bool:
        return self.method in _EXACT_METHODS

    def column_residual(self) -> float:
        return float(np.max(np.abs(self.m.sum(axis=0) - 1.0)))


def _finalize(m: np.ndarray, kind: str, method: str, **params) -> MixingMatrix:
    m = np.array(m, dtype=float)
    low = float(m.min())
    if low < -NEGATIVE_CLAMP:
        raise ConsistencyError(f"{method} mixing matrix has entry {low:.3e} < 0")
    m[m < 0] = 0.0
    m.setflags(write=False)
    out = MixingMatrix(m, kind, method, params)
    res = out.column_residual()
    if res > COLUMN_SUM_TOL:
        raise ConsistencyError(f"{method} mixing matrix column sums off by {res:.3e}")
    return out


def _vertex_sums(amplitudes: np.ndarray, n: int) -> np.ndarray:
    """Squared moduli of n^2 x k arc amplitudes summed over outgoing arcs."""
    sq = (amplitudes * amplitudes.conj()).real
    return sq.reshape(n, n, -1).sum(axis=1)


def mixing_empirical(walk: SzegedyWalk, T: int = DEFAULT_T) -> MixingMatrix:
    """Finite Cesaro average over t = 0 .. T-1 of the vertex distributions.

    All n initial states S e_y are evolved together, one product with U per
    step.  U and S are real, so the whole computation stays real.
    """
    if T < 1 or int(T) != T:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    n = walk.n
    u = walk.u
    v = np.array(walk.s)
    acc = np.zeros_like(v)
    for _ in range(int(T)):
        acc += v * v
        v = u @ v
    m = acc.reshape(n, n, n).sum(axis=1) / T
    return _finalize(m, "discrete", "empirical", T=int(T))


def mixing_from_walk_idempotents(walk: SzegedyWalk, idem: WalkIdempotents) -> MixingMatrix:
    """Sum over the projections F of U of the vertex sums of |F S|^2.

    Raises:
        IncompleteIdempotents: if (sum F) S differs from S by more than 1e-7.
    """
    res = completeness_residual(walk, idem)
    if res > COMPLETENESS_TOL:
        raise IncompleteIdempotents(res)
    n = walk.n
    m = np.zeros((n, n))
    for f in idem.projections:
        m += _vertex_sums(f @ walk.s, n)
    return _finalize(m, "discrete", "walk-idempotents", source=idem.source)


def mixing_closed(
    chain: MarkovChain,
    disc_decomp: SpectralDecomposition,
    classification: Optional[ChainClassification] = None,
) -> MixingMatrix:
    """Closed form of the discrete average mixing matrix.

    The product (P^T - I) @ (sum ...) is taken in that order.

    Raises:
        NotErgodic, NotReversible: if the chain is not ergodic and reversible.
        MinusOneEigenvalue: if the discriminant has eigenvalue -1 (possible for
            periodic chains, which are strongly connected but bipartite).
    """
    cls = classification if classification is not None else classify(chain)
    if not cls.ergodic:
        raise NotErgodic("the closed form needs an ergodic chain")
    if not cls.reversible:
        raise NotReversible("the closed form needs a reversible chain")
    lams = disc_decomp.eigenvalues
    if lams[0] != 1.0:
        raise ConsistencyError(f"top discriminant eigenvalue is {lams[0]!r}, expected 1")
    if np.any(lams == -1.0):
        raise MinusOneEigenvalue("discriminant has eigenvalue -1")
    n = chain.n
    squares = [e * e for e in disc_decomp.idempotents]
    first = sum(squares)
    tail = np.zeros((n, n))
    for lam, sq in zip(lams[1:], squares[1:]):
        tail += sq / (1.0 - lam * lam)
    m = first + 0.5 * (chain.p.T - np.eye(n)) @ tail
    return _finalize(m, "discrete", "closed-form")


def continuous_mixing_closed(disc_decomp: SpectralDecomposition) -> MixingMatrix:
    """Sum of the entrywise squares of the spectral idempotents of D."""
    m = sum(e * e for e in disc_decomp.idempotents)
    return _finalize(m, "continuous", "idempotent-squares")


def continuous_mixing_numerical(
    disc: Discriminant,
    T: float,
    steps: int,
    disc_decomp: Optional[SpectralDecomposition] = None,
    chunk: int = 4096,
) -> MixingMatrix:
    """Midpoint-rule average of |exp(itD)|^2 (entrywise) over t in [0, T].

    exp(itD) is evaluated as sum_r exp(i t lam_r) E_r.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    if disc_decomp is None:
        disc_decomp = decompose(disc.d, unit_interval=True)
    lams = np.asarray(disc_decomp.eigenvalues)
    es = np.stack(disc_decomp.idempotents)
    n = es.shape[1]
    dt = T / steps
    acc = np.zeros((n, n))
    for start in range(0, steps, chunk):
        k = np.arange(start, min(start + chunk, steps))
        t = (k + 0.5) * dt
        phases = np.exp(1j * np.outer(t, lams))
        evo = np.einsum("tr,rxy->txy", phases, es)
        acc += (evo * evo.conj()).real.sum(axis=0)
    return _finalize(acc / steps, "continuous", "time-integral", T=float(T), steps=int(steps))


def is_uniform_mixing(m: MixingMatrix, tol: Optional[float] = None) -> bool:
    """Whether every entry is within ``tol`` of 1/n.

    The default tolerance is 1e-8 for exact methods and 5e-3 for the
    empirical and time-integral approximations.
    """
    if tol is None:
        tol = EXACT_UNIFORM_TOL if m.exact else EMPIRICAL_UNIFORM_TOL
    return bool(np.max(np.abs(m.m - 1.0 / m.n)) <= tol)


def uniform_mixing_criterion(
    disc_decomp: SpectralDecomposition,
    tol: float = 1e-8,
    chain: Optional[MarkovChain] = None,
) -> bool:
    """Spectral test for uniform mixing of the continuous walk.

    True iff every eigenvalue of D is simple with a +1/-1 eigenvector.  When
    true, the continuous closed form is cross-checked against J/n at 1e-9,
    and, if ``chain`` is given and reversible, so is the discrete closed form.

    Raises:
        ConsistencyError: if a cross-check contradicts a positive verdict.
    """
    verdict = all(flat_eigenvector_test(disc_decomp, tol))
    if not verdict:
        return False
    n = disc_decomp.n
    mc = continuous_mixing_closed(disc_decomp)
    if np.max(np.abs(mc.m - 1.0 / n)) > 1e-9:
        raise ConsistencyError("criterion holds but the continuous mixing matrix is not J/n")
    if chain is not None:
        cls = classify(chain)
        if cls.ergodic and cls.reversible:
            md = mixing_closed(chain, disc_decomp, cls)
            if np.max(np.abs(md.m - 1.0 / n)) > 1e-9:
                raise ConsistencyError("criterion holds but the discrete mixing matrix is not J/n")
    return True


@dataclass(frozen=True, eq=False)
class PropertyReport:
    trace_discrete: float
    trace_continuous: float
    trace_inequality_ok: bool
    symmetric_ok: Optional[bool]
    symmetric_residual: Optional[float]
    column_stochastic_residual: float
    automorphism_residuals: Dict[Tuple[int, ...], float]
    column_stochastic_ok: bool = True
    automorphisms_ok: bool = True

    @property
    def passed(self) -> bool:
        return (
            self.trace_inequality_ok
            and self.symmetric_ok is not False
            and self.column_stochastic_ok
            and self.automorphisms_ok
        )


def verify_properties(
    chain: MarkovChain,
    m_discrete: MixingMatrix,
    m_continuous: MixingMatrix,
    automorphisms: Iterable[Sequence[int]] = (),
    tol: float = 1e-8,
) -> PropertyReport:
    """Check trace, symmetry, automorphism and column-sum properties.

    Raises:
        NotAutomorphism: if a supplied permutation does not preserve p exactly.
    """
    md = m_discrete.m
    tr_d = float(np.trace(md))
    tr_c = float(np.trace(m_continuous.m))
    sym_ok = sym_res = None
    if classify(chain).symmetric:
        sym_res = float(np.max(np.abs(md - md.T)))
        sym_ok = sym_res <= tol
    col = m_discrete.column_residual()

    p = chain.p
    residuals = {}
    for sigma in automorphisms:
        sigma = np.asarray(sigma, dtype=int)
        bad = np.argwhere(p[np.ix_(sigma, sigma)] != p)
        if len(bad):
            raise NotAutomorphism(int(bad[0][0]), int(bad[0][1]), sigma.tolist())
        residuals[tuple(int(s) for s in sigma)] = float(
            np.max(np.abs(md[np.ix_(sigma, sigma)] - md))
        )
    return PropertyReport(
        trace_discrete=tr_d,
        trace_continuous=tr_c,
        trace_inequality_ok=tr_d <= tr_c + 1e-9,
        symmetric_ok=sym_ok,
        symmetric_residual=sym_res,
        column_stochastic_residual=col,
        automorphism_residuals=residuals,
        column_stochastic_ok=col <= tol,
        automorphisms_ok=all(r <= tol for r in residuals.values()),
    )
