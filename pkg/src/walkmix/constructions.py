"""Example chains with uniform mixing, tensor products and automorphisms.

Tensor products use the iterated row-major Kronecker convention: the state
(x_1, ..., x_k) of a product of chains with sizes (n_1, ..., n_k) has flat
index with x_1 most significant, exactly as ``np.kron`` lays it out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence

import numpy as np

from .chain import MarkovChain, classify, load_chain
from .errors import (
    BudgetExceeded,
    ConsistencyError,
    DuplicatePrime,
    NotAutomorphism,
    NotOddPrime,
    NotSymmetricFactor,
    OutOfRange,
)
from .walk import SzegedyWalk

PRIME_LIMIT = 2 ** 32
DEFAULT_SEARCH_BUDGET = 8
DISTINCT_PRODUCT_TOL = 1e-12


def two_state_chain(p: float) -> MarkovChain:
    """The symmetric chain [[p, 1-p], [1-p, p]] for 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise OutOfRange(f"OutOfRange: p = {p!r} is not in (0, 1)")
    return load_chain([[p, 1.0 - p], [1.0 - p, p]])


def tensor_product(chains: Sequence[MarkovChain]) -> MarkovChain:
    """Kronecker product of symmetric chains, in list order."""
    chains = list(chains)
    if not chains:
        raise ValueError("tensor_product needs at least one chain")
    for i, c in enumerate(chains):
        if not classify(c).symmetric:
            raise NotSymmetricFactor(i)
    if len(chains) == 1:
        return chains[0]
    p = chains[0].p
    for c in chains[1:]:
        p = np.kron(p, c.p)
    names = [c.labels or tuple(str(x) for x in range(c.n)) for c in chains]
    labels = [",".join(parts) for parts in product(*names)]
    return load_chain(p, labels)


def distinct_products(chains: Sequence[MarkovChain], tol: float = DISTINCT_PRODUCT_TOL) -> bool:
    """Whether all products of one eigenvalue per factor are pairwise distinct.

    Eigenvalues are taken with multiplicity, so a repeated factor eigenvalue
    also fails the test.
    """
    prods = product_eigenvalues(chains)
    return bool(np.all(-np.diff(prods) > tol))


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def prime_family_chain(primes: Sequence[int], sign: int = 1) -> MarkovChain:
    """Tensor product of two-state chains with p_i = (1 + sign/q_i) / 2.

    Every eigenvalue of the 2^k-state result is simple and every eigenvector
    is a +1/-1 vector, so both walks mix uniformly on average.

    Raises:
        NotOddPrime: if some q is not an odd prime below 2^32.
        DuplicatePrime: if a prime repeats.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if not primes:
        raise ValueError("primes must be nonempty")
    seen = set()
    for q in primes:
        if isinstance(q, bool) or int(q) != q or not (2 < q < PRIME_LIMIT) or not _is_prime(int(q)):
            raise NotOddPrime(q)
        if q in seen:
            raise DuplicatePrime(q)
        seen.add(q)
    factors = [two_state_chain(float((1 + Fraction(sign, int(q))) / 2)) for q in primes]
    if not distinct_products(factors):
        raise ConsistencyError("prime family eigenvalue products are not distinct")
    return tensor_product(factors)


@dataclass(frozen=True)
class Automorphism:
    """A permutation sigma of the states with p[sigma(x), sigma(y)] == p[x, y]."""

    sigma: tuple

    @property
    def n(self) -> int:
        return len(self.sigma)

    @property
    def matrix(self) -> np.ndarray:
        """Permutation matrix with P e_x = e_sigma(x)."""
        m = np.zeros((self.n, self.n))
        m[list(self.sigma), np.arange(self.n)] = 1.0
        return m

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other."""
        return Automorphism(tuple(self.sigma[i] for i in other.sigma))

    def inverse(self) -> "Automorphism":
        inv = [0] * self.n
        for x, s in enumerate(self.sigma):
            inv[s] = x
        return Automorphism(tuple(inv))


def check_automorphism(
    chain: MarkovChain, sigma: Sequence[int], walk: Optional[SzegedyWalk] = None
) -> Automorphism:
    """Validate sigma exactly; with a walk, also check how it intertwines S and R.

    The checks on the walk are that R commutes with P_sigma (x) P_sigma and
    that S P_sigma == (P_sigma (x) P_sigma) S, both with exact equality.

    Raises:
        NotAutomorphism: with the first violating pair (x, y).
    """
    sigma = tuple(int(s) for s in sigma)
    n = chain.n
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"sigma {list(sigma)} is not a permutation of 0..{n - 1}")
    idx = np.array(sigma)
    bad = np.argwhere(chain.p[np.ix_(idx, idx)] != chain.p)
    if len(bad):
        raise NotAutomorphism(int(bad[0][0]), int(bad[0][1]), sigma)
    auto = Automorphism(sigma)
    if walk is not None:
        ps = auto.matrix
        k = np.kron(ps, ps)
        if not np.array_equal(walk.r @ k, k @ walk.r):
            raise ConsistencyError("arc reversal does not commute with P_sigma (x) P_sigma")
        if not np.array_equal(walk.s @ ps, k @ walk.s):
            raise ConsistencyError("S P_sigma != (P_sigma (x) P_sigma) S")
    return auto


def find_automorphisms(chain: MarkovChain, budget: int = DEFAULT_SEARCH_BUDGET) -> List[Automorphism]:
    """All automorphisms of ``chain`` in lexicographic order of sigma.

    Depth-first search over partial permutations, pruning as soon as an
    assigned pair of states breaks p[sigma(x), sigma(y)] == p[x, y].

    Raises:
        BudgetExceeded: if ``chain.n > budget``.
    """
    n = chain.n
    if n > budget:
        raise BudgetExceeded(n, budget)
    p = chain.p
    found = []
    sigma = [0] * n
    used = [False] * n

    def extend(x):
        if x == n:
            found.append(Automorphism(tuple(sigma)))
            return
        for cand in range(n):
            if used[cand] or p[cand, cand] != p[x, x]:
                continue
            ok = all(
                p[cand, sigma[w]] == p[x, w] and p[sigma[w], cand] == p[w, x]
                for w in range(x)
            )
            if not ok:
                continue
            sigma[x] = cand
            used[cand] = True
            extend(x + 1)
            used[cand] = False

    extend(0)
    return found


def is_group(autos: Sequence[Automorphism]) -> bool:
    """Closure of a set of permutations under composition and inverse."""
    group = set(autos)
    return all(a.inverse() in group for a in group) and all(
        a.compose(b) in group for a in group for b in group
    )


def product_eigenvalues(chains: Sequence[MarkovChain]) -> np.ndarray:
    """All products of one eigenvalue per factor, sorted descending."""
    spectra = [np.linalg.eigvalsh(0.5 * (c.p + c.p.T)) for c in chains]
    return np.sort([float(np.prod(v)) for v in product(*spectra)])[::-1]

