"""Splitting N identical fermions into subsets with complete property sets.

A candidate M-fermion state picks out the single-particle subspace that
annihilates it under one-slot contraction; the complement carries its
whole expansion (the Delta / Delta-perp partition).  Assembling the
candidate with a one-particle-orthogonal K-fermion partner gives a
normalized N-fermion state, and the matching property projector is the
span of the assembled basis states, never materialized as a d^N x d^N
matrix: expectations are sums of squared overlaps with that basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from ._oneparticle import contraction_residual, sector_basis_states, support_kernel
from .core import (
    DEFAULT_TOL,
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    ToleranceError,
    Tolerances,
    UnsplittableError,
    numerical_rank,
    partial_trace,
    pure_state,
    spectral,
    state_to_density,
)
from .permsym import project_sector, slater_state, sym_product

__all__ = [
    "DeltaPartition",
    "OrthogonalSplit",
    "OneParticleOrthogonality",
    "SubsetPropertyReport",
    "VerifiedSplit",
    "LocalFactorizability",
    "CompleteSlaterReport",
    "ApproxOrthRow",
    "v_perp",
    "delta_partition",
    "one_particle_orthogonal",
    "assemble_split",
    "subset_property_check",
    "verify_split",
    "local_factorizability",
    "completely_non_entangled_fermions",
    "approx_orthogonality_report",
]


def _require_fermionic(psi: PureState, name: str) -> None:
    if psi.sector is not Sector.FERMIONIC:
        raise InvalidInputError(f"{name} must be a fermionic-sector state")


def v_perp(pi: PureState, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the single-particle subspace whose
    vectors contract the candidate state to zero.

    Computed as the kernel of the flattened coefficient matrix at
    `rank_tol`; slot independence is verified internally.  An empty
    subspace is a legal result (such a state cannot be split off).
    """
    _require_fermionic(pi, "pi")
    _, kernel = support_kernel(pi.amps, tol)
    return kernel


@dataclass(frozen=True)
class DeltaPartition:
    """Single-particle basis adapted to a candidate state: the `delta`
    columns span its expansion support, the `delta_perp` columns the
    contraction kernel."""

    basis: np.ndarray
    delta: tuple[int, ...]
    delta_perp: tuple[int, ...]


def delta_partition(pi: PureState, tol: Tolerances = DEFAULT_TOL) -> DeltaPartition:
    """Adapted basis for a candidate M-fermion state.

    Raises UnsplittableError when the kernel is zero (a full-rank
    antisymmetric coefficient matrix admits no partner subset at all).
    The support statement is asserted: re-expanded in the new basis, the
    state touches every delta index and no delta_perp index.
    """
    _require_fermionic(pi, "pi")
    support, kernel = support_kernel(pi.amps, tol)
    if kernel.shape[1] == 0:
        raise UnsplittableError(
            "the contraction kernel is zero: this state cannot be combined "
            "with any partner subset"
        )
    basis = np.hstack([support, kernel])
    delta = tuple(range(support.shape[1]))
    delta_perp = tuple(range(support.shape[1], basis.shape[1]))

    re_expanded = pi.amps
    for _ in range(pi.n_slots):
        re_expanded = np.tensordot(re_expanded, basis.conj(), axes=([0], [0]))
    mags = np.abs(re_expanded)
    peak = float(mags.max())
    outside = mags.copy()
    outside[np.ix_(*[list(delta)] * pi.n_slots)] = 0.0
    if float(outside.max()) > 1e-8 * peak:
        raise InconsistencyError("expansion leaks outside the delta support")
    for idx in delta:
        # Antisymmetry makes the slot-0 cross-section representative.
        if not bool(np.any(mags[idx] > tol.rank_tol * peak)):
            raise InconsistencyError(f"delta index {idx} missing from the expansion")
    return DeltaPartition(basis, delta, delta_perp)


@dataclass(frozen=True)
class OneParticleOrthogonality:
    """One-slot contraction test between two identical-particle states;
    `basis` (present when the test passes) expands both states over
    disjoint index sets."""

    orthogonal: bool
    residual: float
    basis: np.ndarray | None


def one_particle_orthogonal(
    sigma: PureState,
    phi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> OneParticleOrthogonality:
    """Test whether the one-slot contraction between the states vanishes."""
    if sigma.dims[0] != phi.dims[0]:
        raise InvalidInputError("states must share the single-particle dimension")
    residual = contraction_residual(sigma.amps, phi.amps)
    if residual > tol.eq_tol:
        return OneParticleOrthogonality(False, residual, None)
    support, kernel = support_kernel(sigma.amps, tol)
    return OneParticleOrthogonality(True, residual, np.hstack([support, kernel]))


@dataclass(frozen=True)
class OrthogonalSplit:
    """A verified two-subset decomposition of an N-fermion state."""

    basis: np.ndarray
    delta: tuple[int, ...]
    delta_perp: tuple[int, ...]
    pi_state: PureState
    phi_state: PureState
    assembled: PureState


def assemble_split(
    pi: PureState,
    phi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> OrthogonalSplit:
    """Antisymmetrize and normalize the product of two one-particle
    orthogonal fermionic states into an N-fermion split state.

    The binomial prefactor makes the result exactly normalized through the
    K!M!/N! norm identity, which is asserted.
    """
    _require_fermionic(pi, "pi")
    _require_fermionic(phi, "phi")
    check = one_particle_orthogonal(pi, phi, tol)
    if not check.orthogonal:
        raise ToleranceError("factors are not one-particle orthogonal", check.residual)
    partition = delta_partition(pi, tol)
    product = sym_product(pi, phi, Sector.FERMIONIC, tol=tol)
    if abs(product.norm - 1.0) > 1e-8:
        raise InconsistencyError(
            f"assembled norm {product.norm} violates the K!M!/N! identity"
        )
    return OrthogonalSplit(
        partition.basis, partition.delta, partition.delta_perp, pi, phi, product.state
    )


def _omega_basis(
    psi: PureState,
    pi: PureState,
    tol: Tolerances,
) -> tuple[DeltaPartition, list[np.ndarray], list[np.ndarray]]:
    """Orthonormal K-slot partner basis and the assembled N-slot basis
    spanning the property manifold of the candidate state."""
    _require_fermionic(psi, "psi")
    _require_fermionic(pi, "pi")
    if psi.dims[0] != pi.dims[0]:
        raise InvalidInputError("states must share the single-particle dimension")
    k = psi.n_slots - pi.n_slots
    if k < 1:
        raise InvalidInputError("the candidate must cover fewer slots than the full state")
    partition = delta_partition(pi, tol)
    if len(partition.delta_perp) < k:
        raise UnsplittableError(
            f"kernel dimension {len(partition.delta_perp)} cannot host {k} fermions"
        )
    d = psi.dims[0]
    thetas = sector_basis_states(d, partition.delta_perp, k, Sector.FERMIONIC, partition.basis)
    n = psi.n_slots
    scale = math.sqrt(math.comb(n, k))
    omegas = []
    for theta in thetas:
        joint = np.multiply.outer(pi.amps, theta)
        omegas.append(scale * project_sector(joint, Sector.FERMIONIC, tol).amps)
    return partition, thetas, omegas


@dataclass(frozen=True)
class SubsetPropertyReport:
    value: float
    holds: bool


def subset_property_check(
    psi: PureState,
    pi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> SubsetPropertyReport:
    """Expectation of the subset property projector for a candidate state.

    The projector spans the assembled basis states, so the expectation is
    the sum of squared overlaps with them; unit value certifies that both
    subsets carry complete property sets.  For two particles the result is
    cross-checked against the exclusive two-slot projector reduction.
    """
    _, _, omegas = _omega_basis(psi, pi, tol)
    value = float(sum(abs(np.vdot(w, psi.amps)) ** 2 for w in omegas))
    if psi.n_slots == 2 and pi.n_slots == 1:
        p = np.outer(pi.vector, pi.vector.conj())
        eye = np.eye(psi.dims[0], dtype=complex)
        reduced = np.kron(p, eye - p) + np.kron(eye - p, p)
        alt = float(np.vdot(psi.vector, reduced @ psi.vector).real)
        if abs(value - alt) > 1e-10:
            raise InconsistencyError(
                f"two-slot reduction disagrees: {value} vs {alt}"
            )
    return SubsetPropertyReport(value, abs(value - 1.0) <= tol.eq_tol)


@dataclass(frozen=True)
class VerifiedSplit:
    holds: bool
    value: float
    phi: PureState | None
    fidelity: float


def verify_split(
    psi: PureState,
    pi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> VerifiedSplit:
    """Check the subset property and, when it holds, recover the partner
    state from the overlap coefficients and confirm reassembly."""
    partition, thetas, omegas = _omega_basis(psi, pi, tol)
    coeffs = [np.vdot(w, psi.amps) for w in omegas]
    value = float(sum(abs(b) ** 2 for b in coeffs))
    holds = abs(value - 1.0) <= tol.eq_tol
    if not holds:
        return VerifiedSplit(False, value, None, 0.0)
    k_amps = sum(b * theta for b, theta in zip(coeffs, thetas))
    phi = pure_state(k_amps, Sector.FERMIONIC, tol=tol)
    reassembled = sym_product(pi, phi, Sector.FERMIONIC, tol=tol).state
    fidelity = reassembled.fidelity(psi)
    if abs(fidelity - 1.0) > tol.eq_tol:
        raise InconsistencyError(f"recovered partner reassembles with fidelity {fidelity}")
    return VerifiedSplit(True, value, phi, fidelity)


@dataclass(frozen=True)
class LocalFactorizability:
    joint: float
    marg1: float
    marg2: float
    factorizes: bool


def _check_inside(
    proj: np.ndarray,
    manifold: np.ndarray,
    name: str,
    tol: Tolerances,
) -> None:
    leak = float(np.max(np.abs(proj - manifold @ (manifold.conj().T @ proj))))
    if leak > 1e-8:
        raise InvalidInputError(
            f"{name} leaks across the split (component {leak:.3e} outside its manifold)"
        )


def _coset_expectation(psi: PureState, m: int, p: np.ndarray, q: np.ndarray) -> float:
    """Expectation of the exchange-symmetrized block operator
    sum_sigma sigma (P x Q) sigma^{-1} over the (N choose M) slot subsets."""
    n = psi.n_slots
    d = psi.dims[0]
    total = 0.0
    for subset in combinations(range(n), m):
        rest = [i for i in range(n) if i not in subset]
        perm = list(subset) + rest
        arranged = np.transpose(psi.amps, perm).reshape(d**m, -1)
        image = p @ arranged @ q.T
        total += float(np.vdot(arranged, image).real)
    return total


def local_factorizability(
    split: OrthogonalSplit,
    p_delta: np.ndarray,
    q_delta_star: np.ndarray,
    strict: bool = True,
    tol: Tolerances = DEFAULT_TOL,
) -> LocalFactorizability:
    """Joint vs product of single-event probabilities for projectors living
    inside the two sides of a split.

    For a pair the joint operator is P x Q + Q x P and the marginals the
    exactly-one forms; for larger splits the exchange-symmetrized block
    forms are used.  With `strict` the projectors must stay inside their
    manifolds (factorization is then guaranteed); `strict=False` admits
    cross-split operators, for which the product rule generally fails.
    """
    psi = split.assembled
    d = psi.dims[0]
    m = split.pi_state.n_slots
    k = split.phi_state.n_slots
    p = np.asarray(p_delta, dtype=complex)
    q = np.asarray(q_delta_star, dtype=complex)

    if m == 1 and k == 1:
        for name, op in (("P_delta", p), ("Q_delta_star", q)):
            if op.shape != (d, d):
                raise InvalidInputError(f"{name} must be {d}x{d}")
        if strict:
            _check_inside(p, split.basis[:, list(split.delta)], "P_delta", tol)
            _check_inside(q, split.basis[:, list(split.delta_perp)], "Q_delta_star", tol)
        vec = psi.vector
        eye = np.eye(d, dtype=complex)
        joint_op = np.kron(p, q) + np.kron(q, p)
        exactly_p = np.kron(p, eye - p) + np.kron(eye - p, p)
        exactly_q = np.kron(q, eye - q) + np.kron(eye - q, q)
        joint = float(np.vdot(vec, joint_op @ vec).real)
        marg1 = float(np.vdot(vec, exactly_p @ vec).real)
        marg2 = float(np.vdot(vec, exactly_q @ vec).real)
    else:
        if p.shape != (d**m, d**m) or q.shape != (d**k, d**k):
            raise InvalidInputError(
                f"need block projectors of sizes {d**m} and {d**k} for this split"
            )
        if strict:
            v_delta = np.column_stack(
                [
                    s.reshape(-1)
                    for s in sector_basis_states(d, split.delta, m, Sector.FERMIONIC, split.basis)
                ]
            )
            v_star = np.column_stack(
                [
                    s.reshape(-1)
                    for s in sector_basis_states(
                        d, split.delta_perp, k, Sector.FERMIONIC, split.basis
                    )
                ]
            )
            _check_inside(p, v_delta, "P_delta", tol)
            _check_inside(q, v_star, "Q_delta_star", tol)
        eye_k = np.eye(d**k, dtype=complex)
        eye_m = np.eye(d**m, dtype=complex)
        joint = _coset_expectation(psi, m, p, q)
        marg1 = _coset_expectation(psi, m, p, eye_k)
        marg2 = _coset_expectation(psi, m, eye_m, q)
    factorizes = abs(joint - marg1 * marg2) <= tol.eq_tol
    if strict and not factorizes:
        raise InconsistencyError(
            f"on-split probabilities failed to factorize: {joint} vs {marg1 * marg2}"
        )
    return LocalFactorizability(joint, marg1, marg2, factorizes)


@dataclass(frozen=True)
class CompleteSlaterReport:
    complete: bool
    orbitals: np.ndarray | None
    fidelity: float
    witness_traces: tuple[float, ...] | None


def completely_non_entangled_fermions(
    psi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> CompleteSlaterReport:
    """Whether the state is a single Slater determinant.

    Candidate test: rank(rho1) = N with flat spectrum 1/N.  The candidate
    orbitals are then verified constructively: reassembly fidelity and the
    unit expectations of the counting projectors E_i = I - prod(I - P_i).
    """
    _require_fermionic(psi, "psi")
    n = psi.n_slots
    d = psi.dims[0]
    rho1 = partial_trace(state_to_density(psi), psi.dims, [0], tol)
    values, vectors = spectral(rho1, tol)
    rank = numerical_rank(values, tol)
    flat = bool(np.all(np.abs(values[:rank] - 1.0 / n) <= tol.eq_tol))
    if rank != n or not flat:
        return CompleteSlaterReport(False, None, 0.0, None)
    orbitals = vectors[:, :n]
    rebuilt = slater_state([orbitals[:, i] for i in range(n)], tol=tol)
    fidelity = rebuilt.fidelity(psi)
    if abs(fidelity - 1.0) > tol.eq_tol:
        return CompleteSlaterReport(False, None, fidelity, None)
    traces = []
    for i in range(n):
        proj = np.outer(orbitals[:, i], orbitals[:, i].conj())
        complement = np.eye(d, dtype=complex) - proj
        image = psi.amps
        for slot in range(n):
            image = np.moveaxis(
                np.tensordot(complement, np.moveaxis(image, slot, 0), axes=([1], [0])), 0, slot
            )
        value = 1.0 - float(np.vdot(psi.amps, image).real)
        if abs(value - 1.0) > tol.eq_tol:
            raise InconsistencyError(f"counting projector {i} has expectation {value}")
        traces.append(value)
    return CompleteSlaterReport(True, orbitals, fidelity, tuple(traces))


@dataclass(frozen=True)
class ApproxOrthRow:
    eps: float
    residual: float
    deficit: float


def _tilted_family(d: int, eps: float, tol: Tolerances) -> tuple[PureState, PureState]:
    """Two-pair family with partner orbitals tilted into the candidate's
    support by eps.

    The candidate is a correlated pair (its support is twice its particle
    count): against a filled single determinant the exclusion principle
    would annihilate every overlapping component and hide the deficit.
    """
    if d < 6:
        raise InvalidInputError("the tilted family needs d >= 6")
    basis = np.eye(d, dtype=complex)
    pair_a = slater_state([basis[:, 0], basis[:, 1]], tol=tol)
    pair_b = slater_state([basis[:, 2], basis[:, 3]], tol=tol)
    pi = pure_state(0.8 * pair_a.amps + 0.6 * pair_b.amps, Sector.FERMIONIC, tol=tol)
    g4 = basis[:, 4] + eps * basis[:, 0]
    g5 = basis[:, 5] + eps * basis[:, 2]
    g4 = g4 / np.linalg.norm(g4)
    g5 = g5 / np.linalg.norm(g5)
    phi = slater_state([g4, g5], tol=tol)
    return pi, phi


def _entangled_family(d: int, eps: float, tol: Tolerances) -> tuple[PureState, PureState]:
    """Superposition of 'pair type 1 here, pair type 2 there' with the
    swapped assignment: antisymmetrizing a genuinely nonfactorized state."""
    if d < 8:
        raise InvalidInputError("the entangled family needs d >= 8")
    basis = np.eye(d, dtype=complex)
    pi = slater_state([basis[:, 0], basis[:, 1]], tol=tol)

    def tilt(i: int, j: int) -> np.ndarray:
        v = basis[:, i] + eps * basis[:, j]
        return v / np.linalg.norm(v)

    term1 = np.multiply.outer(
        pi.amps, slater_state([tilt(6, 2), tilt(7, 3)], tol=tol).amps
    )
    term2 = np.multiply.outer(
        slater_state([basis[:, 2], basis[:, 3]], tol=tol).amps,
        slater_state([tilt(4, 0), tilt(5, 1)], tol=tol).amps,
    )
    mixed = project_sector(term1 + term2, Sector.FERMIONIC, tol)
    return pi, mixed.state(tol=tol)


def approx_orthogonality_report(
    eps_values: Sequence[float],
    d: int = 6,
    entangled: bool = False,
    tol: Tolerances = DEFAULT_TOL,
) -> list[ApproxOrthRow]:
    """Residual and property deficit along a family of overlapping orbital
    frames.

    For the plain family the deficit vanishes with the overlap parameter;
    physics statements about split subsets hold to exactly that kind of
    approximation.  The entangled variant superposes swapped assignments
    and keeps a deficit of about one half no matter how small the overlap.
    """
    rows = []
    for eps in eps_values:
        if entangled:
            pi, state = _entangled_family(max(d, 8), float(eps), tol)
            residual = float("nan")
        else:
            pi, phi = _tilted_family(d, float(eps), tol)
            residual = contraction_residual(pi.amps, phi.amps)
            joint = np.multiply.outer(pi.amps, phi.amps)
            state = project_sector(joint, Sector.FERMIONIC, tol).state(tol=tol)
        value = subset_property_check(state, pi, tol).value
        rows.append(ApproxOrthRow(float(eps), residual, 1.0 - value))
    return rows
