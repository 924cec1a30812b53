"""Entanglement decisions for distinguishable-particle pure states.

Everything reduces to the biorthonormal (Schmidt) decomposition across a
bipartition of the slots: the three equivalent non-entanglement
conditions, the range-based trichotomy (non / partially / totally
entangled, plus the maximal flag), correlation factorization, and the
grouped and complete factorizations for N slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    DensityOperator,
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    Tolerances,
    canonical_phase,
    numerical_rank,
    partial_trace,
    pure_state,
    spectral,
    state_to_density,
)

__all__ = [
    "singlet_state",
    "EntanglementKind",
    "EntanglementClass",
    "SchmidtDecomposition",
    "ThreeConditionReport",
    "PropertyManifold",
    "SplitResult",
    "CompleteFactorization",
    "normalize_cut",
    "cut_matrix",
    "reduced_density",
    "schmidt_decompose",
    "is_non_entangled",
    "classify",
    "property_manifold",
    "correlation_test",
    "split_non_entangled",
    "completely_non_entangled",
]


class EntanglementKind(str, Enum):
    NON_ENTANGLED = "non_entangled"
    PARTIALLY_ENTANGLED = "partially_entangled"
    TOTALLY_ENTANGLED = "totally_entangled"


@dataclass(frozen=True)
class EntanglementClass:
    """Trichotomy verdict for one side of a bipartition.

    `maximal` is set when the reduced operator is a multiple of the
    identity on the full subsystem space.
    """

    kind: EntanglementKind
    maximal: bool
    range_dim: int


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Descending positive coefficients with paired orthonormal factors."""

    coeffs: np.ndarray
    left_vectors: np.ndarray   # columns, side-1 factors
    right_vectors: np.ndarray  # columns, side-2 factors
    rank: int
    cut: tuple[int, ...]

    def reassemble(self) -> np.ndarray:
        """sum_k pi_k |l_k><r_k| as the (left, right) coefficient matrix."""
        return (self.left_vectors * self.coeffs) @ self.right_vectors.T


def singlet_state() -> PureState:
    """Two-qubit (|up,down> - |down,up>)/sqrt(2), spin part only."""
    amps = np.zeros((2, 2), dtype=complex)
    amps[0, 1] = 1.0 / math.sqrt(2.0)
    amps[1, 0] = -1.0 / math.sqrt(2.0)
    return PureState((2, 2), amps, Sector.DISTINGUISHABLE, label="singlet")


def normalize_cut(psi: PureState, cut: Sequence[int] | int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split the slot indices into (side1, side2); an integer cut means the
    first M slots."""
    n = psi.n_slots
    if isinstance(cut, int):
        left = tuple(range(cut))
    else:
        left = tuple(int(i) for i in cut)
    if len(set(left)) != len(left) or any(i < 0 or i >= n for i in left):
        raise InvalidInputError(f"cut {left} is not a set of slot indices for {n} slots")
    if not left or len(left) == n:
        raise InvalidInputError("both sides of the cut must be nonempty")
    right = tuple(i for i in range(n) if i not in left)
    return left, right


def cut_matrix(psi: PureState, cut: Sequence[int] | int) -> tuple[np.ndarray, tuple[int, ...], tuple[int, ...]]:
    """Coefficient matrix for a grouped bipartition, flattening each side in
    row-major slot order."""
    left, right = normalize_cut(psi, cut)
    arr = np.transpose(psi.amps, left + right)
    d_left = math.prod(psi.dims[i] for i in left)
    return arr.reshape(d_left, -1), left, right


def reduced_density(psi: PureState, keep: Sequence[int] | int, tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    """Reduced statistical operator of the kept slot group."""
    keep_slots, _ = normalize_cut(psi, keep)
    return partial_trace(state_to_density(psi), psi.dims, keep_slots, tol)


def schmidt_decompose(
    psi: PureState,
    cut: Sequence[int] | int,
    tol: Tolerances = DEFAULT_TOL,
) -> SchmidtDecomposition:
    """Biorthonormal decomposition across the cut.

    The coefficients are the singular values of the grouped coefficient
    matrix and equal the square roots of the reduced-operator eigenvalues
    on either side.  Left vectors get the canonical phase (compensated on
    the right) and degenerate clusters a lexicographic order, mirroring
    the spectral tie-break.
    """
    if psi.sector is not Sector.DISTINGUISHABLE:
        raise InvalidInputError("schmidt_decompose applies to the distinguishable sector")
    matrix, left, _ = cut_matrix(psi, cut)
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    rank = numerical_rank(s, tol)
    u, s, v = u[:, :rank], s[:rank], vh[:rank].T

    for k in range(rank):
        col = canonical_phase(u[:, k], tol.rank_tol)
        phase = np.vdot(u[:, k], col)  # unit modulus
        u[:, k] = col
        v[:, k] = v[:, k] * np.conj(phase)
    for lo, hi in _degenerate_clusters(s, tol):
        keys = [
            tuple(np.round(u[:, j].real, 9)) + tuple(np.round(u[:, j].imag, 9))
            for j in range(lo, hi)
        ]
        order = sorted(range(hi - lo), key=keys.__getitem__)
        u[:, lo:hi] = u[:, [lo + j for j in order]]
        v[:, lo:hi] = v[:, [lo + j for j in order]]
    return SchmidtDecomposition(s.copy(), u, v, rank, left)


def _degenerate_clusters(s: np.ndarray, tol: Tolerances) -> list[tuple[int, int]]:
    if s.size == 0:
        return []
    scale = max(float(s[0]), 1.0)
    edges, start = [], 0
    for i in range(1, s.size + 1):
        if i == s.size or abs(s[i] - s[start]) > tol.rank_tol * scale:
            if i - start > 1:
                edges.append((start, i))
            start = i
    return edges


@dataclass(frozen=True)
class ThreeConditionReport:
    """Joint evaluation of the three equivalent non-entanglement conditions:
    a unit-trace one-dimensional projector exists, the reduced operator is a
    one-dimensional projector, and the state factorizes."""

    verdict: bool
    witness_trace: float
    reduced_purity: float
    factor_fidelity: float
    conditions: tuple[bool, bool, bool]


def is_non_entangled(
    psi: PureState,
    cut: Sequence[int] | int,
    tol: Tolerances = DEFAULT_TOL,
) -> ThreeConditionReport:
    """Evaluate all three conditions independently and assert agreement.

    The one-dimensional witness projector is the projector onto the top
    Schmidt left-vector (any unit-eigenvalue choice is equivalent; this one
    is canonical).  Condition 2 tests the purity of the reduced operator,
    condition 3 the fidelity against the reassembled top product.  Internal
    disagreement raises InconsistencyError, which signals a tolerance bug
    rather than a property of the input.
    """
    dec = schmidt_decompose(psi, cut, tol)
    matrix, _, _ = cut_matrix(psi, cut)
    # Tr[(|l0><l0| x I) rho] computed as the squared contraction norm.
    contraction = dec.left_vectors[:, 0].conj() @ matrix
    witness_trace = float(np.vdot(contraction, contraction).real)
    rho1 = matrix @ matrix.conj().T
    reduced_purity = float(np.trace(rho1 @ rho1).real)
    product = np.multiply.outer(dec.left_vectors[:, 0], dec.right_vectors[:, 0])
    factor_fidelity = float(abs(np.vdot(product, matrix)))

    # Purity deviates twice as fast as the other two near a product state,
    # so its threshold is doubled to keep the flip points aligned.
    conditions = (
        abs(witness_trace - 1.0) <= tol.eq_tol,
        abs(reduced_purity - 1.0) <= 2.0 * tol.eq_tol,
        abs(factor_fidelity**2 - 1.0) <= tol.eq_tol,
    )
    if len(set(conditions)) != 1:
        raise InconsistencyError(
            f"the three non-entanglement conditions disagree: {conditions} "
            f"(witness {witness_trace}, purity {reduced_purity}, fidelity {factor_fidelity})"
        )
    return ThreeConditionReport(conditions[0], witness_trace, reduced_purity, factor_fidelity, conditions)


def classify(
    psi: PureState,
    cut: Sequence[int] | int,
    tol: Tolerances = DEFAULT_TOL,
) -> EntanglementClass:
    """Trichotomy by the numerical rank of the reduced statistical operator."""
    left, _ = normalize_cut(psi, cut)
    rho = reduced_density(psi, left, tol)
    values, _ = spectral(rho, tol)
    rank = numerical_rank(values, tol)
    full = rho.dim
    if rank <= 1:
        kind = EntanglementKind.NON_ENTANGLED
    elif rank < full:
        kind = EntanglementKind.PARTIALLY_ENTANGLED
    else:
        kind = EntanglementKind.TOTALLY_ENTANGLED
    maximal = kind is EntanglementKind.TOTALLY_ENTANGLED and bool(
        np.all(np.abs(values - 1.0 / full) <= tol.eq_tol)
    )
    return EntanglementClass(kind, maximal, rank)


@dataclass(frozen=True)
class PropertyManifold:
    """Projector onto the range of the reduced operator, with the
    certified-observable test: an observable is certified iff it commutes
    with the projector, in which case its restriction has an objective
    (possibly unsharp) value."""

    projector: np.ndarray
    rank: int
    trace_value: float
    eq_tol: float

    def certify(self, omega: np.ndarray) -> bool:
        omega = np.asarray(omega, dtype=complex)
        herm = float(np.max(np.abs(omega - omega.conj().T)))
        if herm > self.eq_tol * max(1.0, float(np.max(np.abs(omega)))):
            raise InvalidInputError("observable must be Hermitian")
        comm = omega @ self.projector - self.projector @ omega
        scale = max(1.0, float(np.max(np.abs(omega))))
        return float(np.max(np.abs(comm))) <= self.eq_tol * scale


def property_manifold(
    psi: PureState,
    cut: Sequence[int] | int,
    tol: Tolerances = DEFAULT_TOL,
) -> PropertyManifold:
    """Smallest projector with unit trace against the reduced operator.

    Minimality holds by construction: dropping any retained eigendirection
    removes its (strictly positive) eigenvalue from the trace.
    """
    left, _ = normalize_cut(psi, cut)
    rho = reduced_density(psi, left, tol)
    values, vectors = spectral(rho, tol)
    rank = numerical_rank(values, tol)
    kept = vectors[:, :rank]
    projector = kept @ kept.conj().T
    trace_value = float(np.trace(projector @ rho.mat).real)
    return PropertyManifold(projector, rank, trace_value, tol.eq_tol)


@dataclass(frozen=True)
class CorrelationReport:
    joint: float
    product: float
    factorizes: bool


def correlation_test(
    psi: PureState,
    cut: Sequence[int] | int,
    a_op: np.ndarray,
    b_op: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> CorrelationReport:
    """Compare <A x B> with <A x I><I x B> across the cut.

    Factorization for every observable pair characterizes non-entangled
    states; the caller should normalize the observables so the absolute
    `eq_tol` threshold on the difference is meaningful.
    """
    matrix, left, right = cut_matrix(psi, cut)
    a_op = np.asarray(a_op, dtype=complex)
    b_op = np.asarray(b_op, dtype=complex)
    for name, op, side in (("A", a_op, left), ("B", b_op, right)):
        d = math.prod(psi.dims[i] for i in side)
        if op.shape != (d, d):
            raise InvalidInputError(f"operator {name} must be {d}x{d} for its side of the cut")
        herm = float(np.max(np.abs(op - op.conj().T)))
        if herm > 1e-8 * max(1.0, float(np.max(np.abs(op)))):
            raise InvalidInputError(f"operator {name} must be Hermitian")
    joint = float(np.vdot(matrix, a_op @ matrix @ b_op.T).real)
    marg_a = float(np.vdot(matrix, a_op @ matrix).real)
    marg_b = float(np.vdot(matrix, matrix @ b_op.T).real)
    product = marg_a * marg_b
    return CorrelationReport(joint, product, abs(joint - product) <= tol.eq_tol)


@dataclass(frozen=True)
class SplitResult:
    separable: bool
    left_state: PureState | None
    right_state: PureState | None


def split_non_entangled(
    psi: PureState,
    m: int,
    tol: Tolerances = DEFAULT_TOL,
) -> SplitResult:
    """Decide whether the first M slots are non-entangled with the rest and
    recover the factor states when they are."""
    if not (1 <= m < psi.n_slots):
        raise InvalidInputError(f"need 1 <= M < {psi.n_slots}, got {m}")
    dec = schmidt_decompose(psi, m, tol)
    if dec.rank != 1:
        return SplitResult(False, None, None)
    left_dims = psi.dims[:m]
    right_dims = psi.dims[m:]
    left = pure_state(dec.left_vectors[:, 0], dims=left_dims, tol=tol)
    right = pure_state(dec.right_vectors[:, 0], dims=right_dims, tol=tol)
    return SplitResult(True, left, right)


@dataclass(frozen=True)
class CompleteFactorization:
    complete: bool
    factors: tuple[np.ndarray, ...] | None
    fidelity: float


def completely_non_entangled(
    psi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> CompleteFactorization:
    """True iff every single-slot reduced operator is a rank-1 projector;
    the factors are their range vectors and the reassembled product is
    checked against the state up to a global phase."""
    if psi.sector is not Sector.DISTINGUISHABLE:
        raise InvalidInputError("completely_non_entangled applies to the distinguishable sector")
    if psi.n_slots < 2:
        raise InvalidInputError("need at least two slots")
    factors = []
    for slot in range(psi.n_slots):
        rho = reduced_density(psi, [slot], tol)
        values, vectors = spectral(rho, tol)
        if numerical_rank(values, tol) != 1:
            return CompleteFactorization(False, None, 0.0)
        factors.append(vectors[:, 0])
    product = factors[0]
    for vec in factors[1:]:
        product = np.multiply.outer(product, vec)
    fidelity = float(abs(np.vdot(product, psi.amps)))
    if abs(fidelity - 1.0) > tol.eq_tol:
        raise InconsistencyError(
            f"rank-1 marginals but reassembly fidelity {fidelity} differs from 1"
        )
    return CompleteFactorization(True, tuple(factors), fidelity)
