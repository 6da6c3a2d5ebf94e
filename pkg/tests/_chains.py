"""Random chain generators shared by the test modules."""

import numpy as np

from walkmix import load_chain


def random_symmetric_chain(rng, n):
    """Symmetric ergodic chain: symmetric weights off the diagonal, rows topped up on it."""
    w = rng.random((n, n))
    w = w + w.T
    np.fill_diagonal(w, 0.0)
    if n == 1:
        return load_chain([[1.0]])
    p = w / (w.sum(axis=1).max() * rng.uniform(1.05, 2.0))
    p[np.diag_indices(n)] = 1.0 - p.sum(axis=1)
    return load_chain(p)


def random_reversible_chain(rng, n):
    """Row-normalized symmetric positive weights: reversible, generally not symmetric."""
    w = rng.random((n, n)) + 0.05
    w = w + w.T
    return load_chain(w / w.sum(axis=1, keepdims=True))


def random_chain(rng, n, density=0.6):
    """Arbitrary row-stochastic matrix with random zeros, usually not reversible."""
    mask = rng.random((n, n)) < density
    mask[np.arange(n), rng.integers(0, n, size=n)] = True
    w = rng.random((n, n)) * mask
    return load_chain(w / w.sum(axis=1, keepdims=True))


def birth_death_chain(rng, n):
    """Tridiagonal chain; every birth-death chain satisfies detailed balance."""
    p = np.zeros((n, n))
    for x in range(n):
        up = rng.uniform(0.1, 0.45) if x < n - 1 else 0.0
        down = rng.uniform(0.1, 0.45) if x > 0 else 0.0
        if x < n - 1:
            p[x, x + 1] = up
        if x > 0:
            p[x, x - 1] = down
        p[x, x] = 1.0 - up - down
    return load_chain(p)


def directed_cycle(n):
    return load_chain(np.roll(np.eye(n), 1, axis=1))
