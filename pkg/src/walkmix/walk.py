"""The Szegedy walk U = R(2SS^T - I) on the arc space of a chain.

Arcs are indexed row-major: arc (x, y) of an n-state chain has flat index
``x * n + y``, so the basis vector e_x (x) e_y is column ``x * n + y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .chain import Discriminant, MarkovChain, discriminant
from .errors import ConsistencyError, DegenerateAngle, NotUnit, SizeExceeded
from .spectral import SpectralDecomposition, decompose

DEFAULT_SIZE_BUDGET = 64
SIN2_FLOOR = 1e-14
DIRECT_GROUP_TOL = 1e-8


def arc_index(x: int, y: int, n: int) -> int:
    return x * n + y


def arc_reverse(index: int, n: int) -> int:
    x, y = divmod(index, n)
    return y * n + x


def arc_reversal_permutation(n: int) -> np.ndarray:
    """perm[k] is the index of the reverse of arc k."""
    k = np.arange(n * n)
    return (k % n) * n + k // n


@dataclass(frozen=True, eq=False)
class SzegedyWalk:
    chain: MarkovChain
    disc: Discriminant
    s: np.ndarray
    r: np.ndarray
    u: np.ndarray

    @property
    def n(self) -> int:
        return self.chain.n

    def residuals(self) -> dict:
        """Max-abs residuals of the structural identities of the walk."""
        n = self.n
        s, r, u = self.s, self.r, self.u
        return {
            "isometry": float(np.max(np.abs(s.T @ s - np.eye(n)))),
            "involution": float(np.max(np.abs(r @ r - np.eye(n * n)))),
            "orthogonality": float(np.max(np.abs(u @ u.T - np.eye(n * n)))),
            "discriminant": float(np.max(np.abs(s.T @ r @ s - self.disc.d))),
        }


def build_walk(chain: MarkovChain, size_budget: int = DEFAULT_SIZE_BUDGET) -> SzegedyWalk:
    """Assemble dense S, R and U for ``chain`` and check their identities.

    Raises:
        SizeExceeded: if ``chain.n > size_budget``.
        ConsistencyError: if an identity of the walk fails its tolerance.
    """
    n = chain.n
    if n > size_budget:
        raise SizeExceeded(n, size_budget)
    nn = n * n
    s = np.zeros((nn, n))
    sq = np.sqrt(chain.p)
    for y in range(n):
        s[y * n:(y + 1) * n, y] = sq[y]
    r = np.zeros((nn, nn))
    r[np.arange(nn), arc_reversal_permutation(n)] = 1.0
    reflect = 2.0 * (s @ s.T) - np.eye(nn)
    # left-multiplying by R only permutes rows
    u = reflect[arc_reversal_permutation(n)]
    for a in (s, r, u):
        a.setflags(write=False)
    walk = SzegedyWalk(chain, discriminant(chain), s, r, u)

    res = walk.residuals()
    limits = {"isometry": 1e-10, "involution": 0.0, "orthogonality": 1e-9, "discriminant": 1e-10}
    for key, limit in limits.items():
        if res[key] > limit:
            raise ConsistencyError(f"walk {key} residual {res[key]:.3e} exceeds {limit:.0e}")
    return walk


@dataclass(frozen=True, eq=False)
class WalkIdempotents:
    """Eigenvalue-labelled projections of U.

    ``entries`` holds ``(mu, F, tag)`` triples: mu is a unit complex
    eigenvalue of U, F the complex n^2 x n^2 projection, and tag records the
    discriminant eigenvalue it came from (``None`` on the direct path).
    ``source`` is ``"discriminant"`` or ``"direct"``.
    """

    entries: Tuple[Tuple[complex, np.ndarray, Optional[Tuple[str, float]]], ...]
    source: str

    @property
    def eigenvalues(self) -> List[complex]:
        return [mu for mu, _, _ in self.entries]

    @property
    def projections(self) -> List[np.ndarray]:
        return [f for _, f, _ in self.entries]

    def __len__(self):
        return len(self.entries)


def walk_idempotents(
    walk: SzegedyWalk, disc_decomp: Optional[SpectralDecomposition] = None
) -> WalkIdempotents:
    """Projections of U built from the spectral idempotents of D.

    Eigenvalue +1 of D gives F = S E S^T for U-eigenvalue 1, and -1 gives
    F = S E S^T for U-eigenvalue -1.  Every other eigenvalue lam = cos(theta)
    gives the conjugate pair

        F^(+/-) = (S - e^(+/-i theta) R S) E (S - e^(+/-i theta) R S)^* / (2 sin^2 theta)

    for U-eigenvalues e^(+/-i theta).  Components of the +1/-1 eigenspaces
    orthogonal to col(S) are not built; they annihilate every S e_y.

    Raises:
        DegenerateAngle: if sin^2(theta) < 1e-14 for an eigenvalue that was
            not snapped onto +1 or -1.
    """
    if disc_decomp is None:
        disc_decomp = decompose(walk.disc.d, unit_interval=True)
    s = walk.s
    rs = walk.r @ s
    entries = []
    for lam, e in disc_decomp:
        if lam == 1.0 or lam == -1.0:
            f = (s @ e @ s.T).astype(complex)
            entries.append((complex(lam), f, ("pm1", lam)))
            continue
        theta = float(np.arccos(np.clip(lam, -1.0, 1.0)))
        sin2 = np.sin(theta) ** 2
        if sin2 < SIN2_FLOOR:
            raise DegenerateAngle(lam)
        mu = np.exp(1j * theta)
        a = s - mu * rs
        f_plus = (a @ e @ a.conj().T) / (2.0 * sin2)
        entries.append((complex(mu), f_plus, ("plus", lam)))
        entries.append((complex(np.conj(mu)), f_plus.conj(), ("minus", lam)))
    return WalkIdempotents(tuple(entries), "discriminant")


def _cluster_on_circle(angles: np.ndarray, tol: float) -> List[np.ndarray]:
    order = np.argsort(angles)
    a = angles[order]
    groups = [[order[0]]]
    for k in range(1, len(a)):
        if a[k] - a[k - 1] <= tol:
            groups[-1].append(order[k])
        else:
            groups.append([order[k]])
    if len(groups) > 1 and (a[0] + 2 * np.pi) - a[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    return [np.array(g) for g in groups]


def walk_idempotents_direct(walk: SzegedyWalk, group_tol: float = DIRECT_GROUP_TOL) -> WalkIdempotents:
    """Projections onto the full eigenspaces of U from a complex Schur form.

    U is normal, so its complex Schur form is diagonal and the Schur vectors
    are an orthonormal eigenbasis.  Eigenvalues are grouped when their arc
    distance on the unit circle is within ``group_tol``.  This path does not
    use the discriminant and serves as an independent check of
    :func:`walk_idempotents`.
    """
    t, z = scipy.linalg.schur(walk.u.astype(complex), output="complex")
    mus = np.diag(t)
    angles = np.angle(mus)
    entries = []
    for g in _cluster_on_circle(angles, group_tol):
        mu = np.mean(mus[g])
        mu = mu / abs(mu)
        zg = z[:, g]
        entries.append((complex(mu), zg @ zg.conj().T, None))
    return WalkIdempotents(tuple(entries), "direct")


def idempotent_residuals(walk: SzegedyWalk, idem: WalkIdempotents) -> dict:
    """Max-abs residuals of the projection algebra of ``idem``.

    Keys: hermitian, idempotent, orthogonal, eigen, completeness (of
    (sum F) S against S), and conjugate (F^- against conj(F^+); 0 on the
    direct path, which has no such pairing).
    """
    fs = idem.projections
    u = walk.u
    herm = max(float(np.max(np.abs(f - f.conj().T))) for f in fs)
    idem_res = max(float(np.max(np.abs(f @ f - f))) for f in fs)
    eig = max(float(np.max(np.abs(u @ f - mu * f))) for mu, f, _ in idem.entries)
    orth = 0.0
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            orth = max(orth, float(np.max(np.abs(fs[i] @ fs[j]))))
    conj = 0.0
    ents = idem.entries
    for k in range(len(ents) - 1):
        tag, nxt = ents[k][2], ents[k + 1][2]
        if tag is not None and tag[0] == "plus" and nxt is not None and nxt[0] == "minus":
            conj = max(conj, float(np.max(np.abs(ents[k + 1][1] - ents[k][1].conj()))))
    return {
        "hermitian": herm,
        "idempotent": idem_res,
        "orthogonal": orth,
        "eigen": eig,
        "completeness": completeness_residual(walk, idem),
        "conjugate": conj,
    }


def completeness_residual(walk: SzegedyWalk, idem: WalkIdempotents) -> float:
    total = sum(idem.projections)
    return float(np.max(np.abs(total @ walk.s - walk.s)))


def initial_state(walk: SzegedyWalk, y: int) -> np.ndarray:
    """The arc-space vector S e_y, concentrated on the outgoing arcs of y."""
    return walk.s[:, y].astype(complex)


def evolve(walk: SzegedyWalk, state, t: int) -> np.ndarray:
    """Return U^t state by t successive matrix-vector products.

    Raises:
        NotUnit: if the state's 2-norm differs from 1 by more than 1e-10.
    """
    if t < 0 or int(t) != t:
        raise ValueError(f"t must be a nonnegative integer, got {t!r}")
    v = np.array(state, dtype=complex)
    if v.shape != (walk.n ** 2,):
        raise ValueError(f"state must have length {walk.n ** 2}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-10:
        raise NotUnit(norm)
    u = walk.u
    for _ in range(int(t)):
        v = u @ v
    return v


def arc_distribution(state) -> np.ndarray:
    v = np.asarray(state)
    return (v * v.conj()).real


def vertex_marginal(arc_dist) -> np.ndarray:
    """Sum an arc distribution over the outgoing arcs of each vertex."""
    a = np.asarray(arc_dist, dtype=float)
    n = int(round(np.sqrt(a.size)))
    if n * n != a.size:
        raise ValueError(f"arc distribution length {a.size} is not a square")
    return a.reshape(n, n).sum(axis=1)
