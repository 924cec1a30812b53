"""Shared single-particle support machinery for identical-particle splits.

Both the fermionic and bosonic split analyses hinge on the same two
constructions: the kernel of the single-slot contraction of a multi-slot
state (the subspace of vectors that annihilate it), and orthonormal bases
of the (anti)symmetric K-slot spaces built over a subset of single
particle basis vectors.
"""

from __future__ import annotations

import math
from itertools import combinations, combinations_with_replacement
from collections import Counter

import numpy as np

from .core import DEFAULT_TOL, InconsistencyError, PureState, Sector, Tolerances
from .permsym import project_sector


def slot_matrix(amps: np.ndarray, slot: int) -> np.ndarray:
    """Flatten a coefficient tensor to (d, rest) with `slot` first."""
    moved = np.moveaxis(amps, slot, 0)
    return moved.reshape(amps.shape[slot], -1)


def support_kernel(
    amps: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Split the single-particle space into (support, kernel) bases.

    The kernel holds every vector b with sum_t conj(b_t) a_{t i2...} = 0;
    the support is its orthogonal complement, which carries the state's
    entire expansion.  Both are returned as column blocks of one unitary.
    The result must not depend on which slot is saturated; that is checked
    against the last slot.
    """
    d = amps.shape[0]
    u, s, _ = np.linalg.svd(slot_matrix(amps, 0), full_matrices=True)
    peak = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > tol.rank_tol * peak)) if peak > 0 else 0
    support, kernel = u[:, :rank], u[:, rank:]

    if amps.ndim > 1:
        u2, s2, _ = np.linalg.svd(slot_matrix(amps, amps.ndim - 1), full_matrices=True)
        rank2 = int(np.sum(s2 > tol.rank_tol * peak)) if peak > 0 else 0
        proj_a = support @ support.conj().T
        alt = u2[:, :rank2]
        proj_b = alt @ alt.conj().T
        gap = float(np.max(np.abs(proj_a - proj_b)))
        if rank2 != rank or gap > 1e-8:
            raise InconsistencyError(
                f"support kernel depends on the saturated slot (rank {rank} vs {rank2}, gap {gap:.3e})"
            )
    return support, kernel


def contraction_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Norm of the one-slot contraction integral between two states.

    Contracts slot 1 of `a` against slot 1 of conj(`b`); by the exchange
    symmetry of the inputs every other slot choice gives the same norm.
    Zero residual is the "one-particle orthogonal" condition.
    """
    t = np.tensordot(a, b.conj(), axes=([0], [0]))
    return float(np.linalg.norm(t.reshape(-1)))


def sector_basis_states(
    d: int,
    indices: tuple[int, ...],
    k: int,
    kind: Sector,
    basis: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Orthonormal basis tensors of the (anti)symmetric k-slot space over
    the given single-particle basis indices.

    `basis` supplies the single-particle vectors as columns (defaults to
    the computational basis of dimension d).  Fermionic basis states are
    normalized Slater tensors over k-subsets; bosonic ones symmetrized
    multisets with the multiplicity normalization sqrt(k!/prod m_i!).
    """
    if basis is None:
        basis = np.eye(d, dtype=complex)
    out: list[np.ndarray] = []
    if kind is Sector.FERMIONIC:
        chooser = combinations(indices, k)
    elif kind is Sector.BOSONIC:
        chooser = combinations_with_replacement(indices, k)
    else:
        raise ValueError("sector_basis_states needs an identical-particle sector")
    for combo in chooser:
        prod = basis[:, combo[0]]
        for idx in combo[1:]:
            prod = np.multiply.outer(prod, basis[:, idx])
        if k == 1:
            out.append(prod)
            continue
        projected = project_sector(prod, kind)
        if kind is Sector.FERMIONIC:
            scale = math.sqrt(math.factorial(k))
        else:
            mult = Counter(combo)
            scale = math.sqrt(math.factorial(k) / math.prod(math.factorial(m) for m in mult.values()))
        out.append(projected.amps * scale)
    return out
