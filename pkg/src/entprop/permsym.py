"""Permutation machinery: (anti)symmetrizing projectors and the normalized
product builders for identical-particle states.

The projectors P_A = A/N! and P_S = S/N! act on coefficient tensors by
summing all slot permutations (signed for P_A).  Permutations are
enumerated in Heap's order so the parity flips once per step; the slot
count is capped at 8 because of the factorial growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    InvalidInputError,
    PureState,
    Sector,
    Tolerances,
    pure_state,
)

__all__ = [
    "MAX_SLOTS",
    "permutations_with_parity",
    "SectorProjection",
    "project_sector",
    "slater_state",
    "SymProduct",
    "sym_product",
]

MAX_SLOTS = 8


def permutations_with_parity(n: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """Yield (permutation, sign) pairs in Heap's order.

    Heap's algorithm produces each successive permutation by a single
    transposition, so the sign simply alternates.
    """
    if n > MAX_SLOTS:
        raise InvalidInputError(f"permutation enumeration is capped at {MAX_SLOTS} slots, got {n}")
    perm = list(range(n))
    sign = 1
    yield tuple(perm), sign
    counters = [0] * n
    i = 1
    while i < n:
        if counters[i] < i:
            j = 0 if i % 2 == 0 else counters[i]
            perm[j], perm[i] = perm[i], perm[j]
            sign = -sign
            yield tuple(perm), sign
            counters[i] += 1
            i = 1
        else:
            counters[i] = 0
            i += 1


def _as_tensor(psi: PureState | np.ndarray) -> np.ndarray:
    if isinstance(psi, PureState):
        return psi.amps
    return np.asarray(psi, dtype=complex)


@dataclass(frozen=True)
class SectorProjection:
    """Raw output of P_A or P_S: the projected tensor before any
    renormalization, with an explicit zero-vector flag."""

    amps: np.ndarray
    kind: Sector
    squared_norm: float
    is_zero: bool

    @property
    def norm(self) -> float:
        return math.sqrt(self.squared_norm)

    def state(self, label: str | None = None, tol: Tolerances = DEFAULT_TOL) -> PureState:
        """Normalize into a PureState of the projected sector."""
        if self.is_zero:
            raise InvalidInputError("the sector projection is the zero vector")
        return pure_state(self.amps, self.kind, label=label, tol=tol)


def project_sector(
    psi: PureState | np.ndarray,
    kind: Sector | str,
    tol: Tolerances = DEFAULT_TOL,
) -> SectorProjection:
    """Apply P_A (fermionic) or P_S (bosonic) to a coefficient tensor.

    The output is (1/N!) sum_P (+-1)^p P[amps]: exactly (anti)symmetric and
    in general not normalized.  A projection with norm below `rank_tol` is
    reported as the zero vector of the sector.
    """
    kind = Sector(kind)
    if kind is Sector.DISTINGUISHABLE:
        raise InvalidInputError("project_sector needs a fermionic or bosonic target")
    amps = _as_tensor(psi)
    dims = amps.shape
    if len(set(dims)) > 1:
        raise InvalidInputError(f"sector projection requires equal slot dims, got {dims}")
    n = amps.ndim
    signed = kind is Sector.FERMIONIC
    out = np.zeros_like(amps)
    for perm, sign in permutations_with_parity(n):
        term = np.transpose(amps, perm)
        out += sign * term if signed else term
    out /= math.factorial(n)
    sq = float(np.vdot(out, out).real)
    return SectorProjection(out, kind, sq, math.sqrt(sq) <= tol.rank_tol)


def slater_state(
    orbitals: Sequence[np.ndarray],
    label: str | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> PureState:
    """Normalized antisymmetrized product of orthonormal orbitals,
    (1/sqrt(N!)) A[phi_1 ... phi_N]."""
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in orbitals]
    n = len(vecs)
    if n == 0:
        raise InvalidInputError("need at least one orbital")
    d = vecs[0].size
    if any(v.size != d for v in vecs):
        raise InvalidInputError("orbitals must share one single-particle dimension")
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    gram_err = float(np.max(np.abs(gram - np.eye(n))))
    if gram_err > 1e3 * tol.eq_tol:
        raise InvalidInputError(
            f"orbitals are not orthonormal (Gram deviation {gram_err:.3e}); "
            "a dependent family antisymmetrizes to the zero vector"
        )
    prod = vecs[0]
    for v in vecs[1:]:
        prod = np.multiply.outer(prod, v)
    projected = project_sector(prod, Sector.FERMIONIC, tol)
    if projected.is_zero:
        raise InvalidInputError("orbitals antisymmetrize to the zero vector")
    return projected.state(label=label, tol=tol)


@dataclass(frozen=True)
class SymProduct:
    """Result of assembling two identical-particle states into one.

    `norm` is the norm of sqrt(binomial) * P[gamma x lambda] before the
    final renormalization; it equals 1 exactly when the factors are
    one-particle orthogonal, and `renormalized` flags every other case.
    """

    state: PureState
    norm: float
    renormalized: bool
    binomial: int


def sym_product(
    gamma: PureState,
    lam: PureState,
    kind: Sector | str | None = None,
    label: str | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> SymProduct:
    """Assemble sqrt(N choose J) * P[gamma x lambda] for N = L + J slots.

    For one-particle orthogonal factors the K!M!/N! norm identity makes the
    result normalized as-is; otherwise the actual norm is reported and the
    state is renormalized with `renormalized=True`.
    """
    if kind is None:
        kind = gamma.sector
    kind = Sector(kind)
    if gamma.dims[0] != lam.dims[0]:
        raise InvalidInputError(
            f"single-particle dimension mismatch: {gamma.dims[0]} vs {lam.dims[0]}"
        )
    joint = np.multiply.outer(gamma.amps, lam.amps)
    projected = project_sector(joint, kind, tol)
    if projected.is_zero:
        raise InvalidInputError("the (anti)symmetrized product vanishes")
    n = joint.ndim
    binomial = math.comb(n, lam.n_slots)
    scaled_norm = math.sqrt(binomial) * projected.norm
    state = pure_state(projected.amps, kind, label=label, tol=tol)
    return SymProduct(state, scaled_norm, abs(scaled_norm - 1.0) > 1e3 * tol.eq_tol, binomial)
