"""Spectral idempotents of real symmetric matrices.

A symmetric matrix M is written as sum_r lambda_r E_r over its distinct
eigenvalues, where E_r is the orthogonal projection onto the lambda_r
eigenspace.  Floating point spectra are clustered into distinct eigenvalues
with a relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import NotSymmetric, SpectrumOutOfRange

SYMMETRY_TOL = 1e-10
DEFAULT_GROUP_TOL = 1e-8
UNIT_OVERSHOOT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues (descending) with their projections.

    ``warnings`` lists eigenvalue gaps that sat within a factor of ten of the
    grouping threshold, where the grouping decision is fragile.
    """

    eigenvalues: np.ndarray
    idempotents: Tuple[np.ndarray, ...]
    multiplicities: Tuple[int, ...]
    warnings: Tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.idempotents[0].shape[0]

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(zip(self.eigenvalues, self.idempotents))


def decompose(
    matrix,
    group_tol: float = DEFAULT_GROUP_TOL,
    unit_interval: bool = False,
) -> SpectralDecomposition:
    """Group the eigenvectors of a symmetric matrix into spectral idempotents.

    Consecutive sorted eigenvalues closer than ``group_tol * max(1, rho)``
    (rho the spectral radius) are merged into one distinct eigenvalue, whose
    value is the group mean.

    With ``unit_interval=True`` the matrix is treated as a discriminant: its
    spectrum must lie in [-1, 1] up to 1e-9, overshoot is clamped, and groups
    within the grouping threshold of +1 or -1 are snapped onto them exactly.

    Raises:
        NotSymmetric: if max |M - M^T| exceeds 1e-10.
        SpectrumOutOfRange: if ``unit_interval`` and an eigenvalue lies
            outside [-1 - 1e-9, 1 + 1e-9].
    """
    if group_tol <= 0:
        raise ValueError("group_tol must be positive")
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(asym)
    m = 0.5 * (m + m.T)

    w, v = np.linalg.eigh(m)
    w, v = w[::-1], v[:, ::-1]
    scale = max(1.0, float(np.max(np.abs(w))))
    threshold = group_tol * scale

    if unit_interval:
        over = float(np.max(np.abs(w))) - 1.0
        if over > UNIT_OVERSHOOT_TOL:
            raise SpectrumOutOfRange(f"eigenvalue magnitude exceeds 1 by {over:.3e}")
        w = np.clip(w, -1.0, 1.0)

    groups: List[List[int]] = [[0]]
    notes = []
    for k in range(1, len(w)):
        gap = w[k - 1] - w[k]
        if gap <= threshold:
            groups[-1].append(k)
        else:
            groups.append([k])
        if threshold / 10.0 < gap <= 10.0 * threshold:
            notes.append(
                f"GroupingAmbiguous: gap {gap:.3e} between eigenvalues {w[k - 1]:.17g} "
                f"and {w[k]:.17g} is within a factor 10 of the grouping threshold {threshold:.1e}"
            )

    eigenvalues = []
    idempotents = []
    for g in groups:
        lam = float(np.mean(w[g]))
        if unit_interval:
            if abs(lam - 1.0) <= threshold:
                lam = 1.0
            elif abs(lam + 1.0) <= threshold:
                lam = -1.0
        vg = v[:, g]
        e = vg @ vg.T
        e = 0.5 * (e + e.T)
        e.setflags(write=False)
        eigenvalues.append(lam)
        idempotents.append(e)

    vals = np.array(eigenvalues)
    vals.setflags(write=False)
    return SpectralDecomposition(
        vals, tuple(idempotents), tuple(len(g) for g in groups), tuple(notes)
    )


def reconstruct(decomp: SpectralDecomposition) -> np.ndarray:
    """Sum of lambda_r E_r."""
    out = np.zeros_like(decomp.idempotents[0])
    for lam, e in decomp:
        out += lam * e
    return out


def flat_eigenvector_test(decomp: SpectralDecomposition, tol: float = 1e-8) -> List[bool]:
    """Per eigenvalue: simple, with every entry of E_r of modulus 1/n.

    A rank-one projection vv^T has all entries of modulus 1/n exactly when
    the unit eigenvector v is proportional to a +1/-1 vector.
    """
    n = decomp.n
    return [
        mult == 1 and bool(np.max(np.abs(np.abs(e) - 1.0 / n)) <= tol)
        for mult, e in zip(decomp.multiplicities, decomp.idempotents)
    ]
