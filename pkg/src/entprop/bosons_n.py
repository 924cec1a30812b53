"""Splitting N identical bosons into subsets with complete property sets.

Bosons admit exactly two disentangled-split shapes: symmetrized products
of one-particle orthogonal factors (different property sets) and, for
even N, symmetrized squares of a single factor (both halves share one
property set).  The two cannot hold at once.  Oblique factors are
accepted for study: they reproduce the failure mode where each one-sided
property query succeeds while the joint attribution is illegitimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ._oneparticle import contraction_residual, sector_basis_states, support_kernel
from .core import (
    DEFAULT_TOL,
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    Tolerances,
    UnsplittableError,
    partial_trace,
    pure_state,
    spectral,
    state_to_density,
)
from .permsym import project_sector, sym_product

__all__ = [
    "BosonSplitKind",
    "BosonAssembly",
    "BosonSplitReport",
    "IdenticalHalvesReport",
    "BinMeasurementDemo",
    "assemble_boson_split",
    "boson_subset_property_check",
    "verify_boson_split",
    "identical_halves",
    "boson_split_report",
    "bin_measurement_demo",
]


def _require_bosonic(psi: PureState, name: str) -> None:
    if psi.sector is not Sector.BOSONIC:
        raise InvalidInputError(f"{name} must be a bosonic-sector state")


class BosonSplitKind(str, Enum):
    DIFFERENT_PROPERTIES = "different_properties"
    IDENTICAL_PROPERTIES = "identical_properties"
    NOT_SPLIT = "not_split"


@dataclass(frozen=True)
class BosonAssembly:
    """Symmetrized product of two boson-subset states.

    `case` records which split shape the inputs form; oblique factors are
    accepted with `case = NOT_SPLIT` (and a renormalized state) because
    that failure mode is worth studying, not because it is a valid split.
    """

    state: PureState
    norm: float
    case: BosonSplitKind


def assemble_boson_split(
    gamma: PureState,
    lam: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> BosonAssembly:
    """sqrt(N choose L) P_S[gamma x lambda], normalized.

    One-particle orthogonal factors give norm 1 exactly; an identical
    factor pair is renormalized explicitly; any other (oblique) pair is
    renormalized and flagged.
    """
    _require_bosonic(gamma, "gamma")
    _require_bosonic(lam, "lam")
    if gamma.dims[0] != lam.dims[0]:
        raise InvalidInputError("factors must share the single-particle dimension")
    identical = gamma.n_slots == lam.n_slots and gamma.fidelity(lam) >= 1.0 - tol.eq_tol
    residual = contraction_residual(gamma.amps, lam.amps)
    product = sym_product(gamma, lam, Sector.BOSONIC, tol=tol)
    if identical:
        case = BosonSplitKind.IDENTICAL_PROPERTIES
    elif residual <= tol.eq_tol:
        case = BosonSplitKind.DIFFERENT_PROPERTIES
        if abs(product.norm - 1.0) > 1e-8:
            raise InconsistencyError(
                f"orthogonal-factor assembly has norm {product.norm} instead of 1"
            )
    else:
        case = BosonSplitKind.NOT_SPLIT
    return BosonAssembly(product.state, product.norm, case)


def _epsilon_basis(
    psi: PureState,
    gamma: PureState,
    tol: Tolerances,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Partner basis of the kernel sector space and the assembled N-slot
    basis spanning the boson property manifold."""
    _require_bosonic(psi, "psi")
    _require_bosonic(gamma, "gamma")
    if psi.dims[0] != gamma.dims[0]:
        raise InvalidInputError("states must share the single-particle dimension")
    j = psi.n_slots - gamma.n_slots
    if j < 1:
        raise InvalidInputError("the candidate must cover fewer slots than the full state")
    support, kernel = support_kernel(gamma.amps, tol)
    if kernel.shape[1] == 0:
        raise UnsplittableError("the contraction kernel of the candidate is zero")
    basis = np.hstack([support, kernel])
    perp = tuple(range(support.shape[1], basis.shape[1]))
    d = psi.dims[0]
    partners = sector_basis_states(d, perp, j, Sector.BOSONIC, basis)
    n = psi.n_slots
    scale = math.sqrt(math.comb(n, j))
    epsilons = []
    for partner in partners:
        joint = np.multiply.outer(gamma.amps, partner)
        epsilons.append(scale * project_sector(joint, Sector.BOSONIC, tol).amps)
    return partners, epsilons


@dataclass(frozen=True)
class BosonSubsetReport:
    value: float
    holds: bool


def boson_subset_property_check(
    psi: PureState,
    gamma: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> BosonSubsetReport:
    """Expectation of the boson subset property projector: the squared
    overlaps with the assembled basis over one-particle orthogonal
    partners.  Unit value certifies two subsets with different complete
    property sets."""
    _, epsilons = _epsilon_basis(psi, gamma, tol)
    value = float(sum(abs(np.vdot(e, psi.amps)) ** 2 for e in epsilons))
    return BosonSubsetReport(value, abs(value - 1.0) <= tol.eq_tol)


def verify_boson_split(
    psi: PureState,
    gamma: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[BosonSubsetReport, PureState | None]:
    """Subset check plus recovery of the partner state when it passes."""
    partners, epsilons = _epsilon_basis(psi, gamma, tol)
    coeffs = [np.vdot(e, psi.amps) for e in epsilons]
    value = float(sum(abs(b) ** 2 for b in coeffs))
    report = BosonSubsetReport(value, abs(value - 1.0) <= tol.eq_tol)
    if not report.holds:
        return report, None
    lam_amps = sum(b * partner for b, partner in zip(coeffs, partners))
    lam = pure_state(lam_amps, Sector.BOSONIC, tol=tol)
    rebuilt = sym_product(gamma, lam, Sector.BOSONIC, tol=tol).state
    fidelity = rebuilt.fidelity(psi)
    if abs(fidelity - 1.0) > tol.eq_tol:
        raise InconsistencyError(f"recovered partner reassembles with fidelity {fidelity}")
    return report, lam


@dataclass(frozen=True)
class IdenticalHalvesReport:
    identical: bool
    gamma: PureState | None
    fidelity: float


def _halves_fidelity(psi: PureState, shaped: np.ndarray, tol: Tolerances) -> float:
    """|<psi | P_S[X x X]>| / ||P_S[X x X]|| for a unit half-size tensor X.

    Since psi is symmetric the numerator equals the plain overlap
    <psi | X x X>, which keeps the evaluation cheap.
    """
    joint = np.multiply.outer(shaped, shaped)
    overlap = abs(np.vdot(psi.amps, joint))
    norm = project_sector(joint, Sector.BOSONIC, tol).norm
    if norm <= tol.rank_tol:
        return 0.0
    return float(overlap / norm)


def identical_halves(psi: PureState, tol: Tolerances = DEFAULT_TOL) -> IdenticalHalvesReport:
    """Detect psi proportional to P_S[gamma x gamma] for a half-size gamma.

    The search is heuristic: a spectral candidate (the contraction power
    iteration on the half-grouped matrix) seeds a deterministic local
    polish of the symmetrized-square fidelity.  Every candidate is then
    verified exactly, so a positive answer is sound.
    """
    from scipy.optimize import minimize

    _require_bosonic(psi, "psi")
    n = psi.n_slots
    if n % 2 != 0:
        raise InvalidInputError("identical halves need an even slot count")
    half = n // 2
    d = psi.dims[0]
    rho = partial_trace(state_to_density(psi), psi.dims, list(range(half)), tol)
    _, vectors = spectral(rho, tol)

    def power_seed(candidate: np.ndarray) -> np.ndarray:
        shaped = candidate.reshape((d,) * half)
        for _ in range(40):
            pulled = np.tensordot(
                psi.amps, shaped.conj(), axes=(tuple(range(half, n)), tuple(range(half)))
            )
            norm = float(np.linalg.norm(pulled.reshape(-1)))
            if norm <= tol.rank_tol:
                return candidate.reshape((d,) * half)
            shaped = pulled / norm
        return shaped

    def polish(shaped: np.ndarray) -> np.ndarray:
        size = shaped.size

        def cost(params: np.ndarray) -> float:
            x = (params[:size] + 1j * params[size:]).reshape(shaped.shape)
            nrm = float(np.linalg.norm(x.reshape(-1)))
            if nrm <= tol.rank_tol:
                return 1.0
            return 1.0 - _halves_fidelity(psi, x / nrm, tol)

        start = np.concatenate([shaped.real.reshape(-1), shaped.imag.reshape(-1)])
        result = minimize(cost, start, method="Powell", options={"xtol": 1e-12, "ftol": 1e-14})
        best = (result.x[:size] + 1j * result.x[size:]).reshape(shaped.shape)
        return best / np.linalg.norm(best.reshape(-1))

    best_fidelity = 0.0
    best_gamma: PureState | None = None
    for k in range(min(2, vectors.shape[1])):
        shaped = power_seed(vectors[:, k])
        if _halves_fidelity(psi, shaped, tol) < 1.0 - tol.eq_tol:
            shaped = polish(shaped)
        try:
            gamma = pure_state(
                project_sector(shaped, Sector.BOSONIC, tol).amps if half > 1 else shaped,
                Sector.BOSONIC,
                tol=tol,
            )
            rebuilt = sym_product(gamma, gamma, Sector.BOSONIC, tol=tol).state
        except InvalidInputError:
            continue
        fidelity = rebuilt.fidelity(psi)
        if fidelity > best_fidelity:
            best_fidelity, best_gamma = fidelity, gamma
        if abs(fidelity - 1.0) <= tol.eq_tol:
            return IdenticalHalvesReport(True, gamma, fidelity)
    return IdenticalHalvesReport(False, None, best_fidelity)


@dataclass(frozen=True)
class BosonSplitReport:
    """Combined split analysis: which shape (if any) the state realizes,
    the factors involved, and the certifying expectation value."""

    kind: BosonSplitKind
    gamma: PureState | None
    lam: PureState | None
    value: float


def boson_split_report(
    psi: PureState,
    gamma: PureState | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> BosonSplitReport:
    """Classify a state against a candidate subset state (or, without a
    candidate, against the identical-halves shape only)."""
    if gamma is not None:
        try:
            report, lam = verify_boson_split(psi, gamma, tol)
        except UnsplittableError:
            report, lam = None, None
        if report is not None and report.holds:
            return BosonSplitReport(BosonSplitKind.DIFFERENT_PROPERTIES, gamma, lam, report.value)
        value = report.value if report is not None else 0.0
        if psi.n_slots % 2 == 0 and gamma.n_slots == psi.n_slots // 2:
            rebuilt = sym_product(gamma, gamma, Sector.BOSONIC, tol=tol).state
            if rebuilt.fidelity(psi) >= 1.0 - tol.eq_tol:
                return BosonSplitReport(BosonSplitKind.IDENTICAL_PROPERTIES, gamma, gamma, 1.0)
        return BosonSplitReport(BosonSplitKind.NOT_SPLIT, gamma, None, value)
    if psi.n_slots % 2 == 0:
        halves = identical_halves(psi, tol)
        if halves.identical:
            return BosonSplitReport(
                BosonSplitKind.IDENTICAL_PROPERTIES, halves.gamma, halves.gamma, 1.0
            )
    return BosonSplitReport(BosonSplitKind.NOT_SPLIT, None, None, 0.0)


@dataclass(frozen=True)
class BinMeasurementDemo:
    """Two bosons spread uniformly over d bins: finding one inside a bin
    set changes where the other one will be found, exactly as for a pair
    of indistinguishable classical particles."""

    bins: int
    delta1: tuple[int, ...]
    delta2: tuple[int, ...]
    conditional: float
    conditional_formula: float
    unconditional: float
    unconditional_formula: float
    collapse_probability: float
    collapsed: PureState


def _exactly_one_expectation(matrix: np.ndarray, mask: np.ndarray) -> float:
    """<X| P x (I-P) + (I-P) x P |X> for a diagonal bin projector."""
    weight = np.outer(mask, 1.0 - mask) + np.outer(1.0 - mask, mask)
    return float(np.sum(np.abs(matrix) ** 2 * weight))


def bin_measurement_demo(
    d: int,
    delta1: Sequence[int],
    delta2: Sequence[int],
    tol: Tolerances = DEFAULT_TOL,
) -> BinMeasurementDemo:
    """Collapse-and-requery demo on the uniform two-boson bin state.

    The conditional probability |d1| / (d - |d2|) and the unconditional
    2 (|d1|/d) (1 - |d1|/d) are matched against the explicit projector
    computation to 1e-12 before being reported.
    """
    if d < 2:
        raise InvalidInputError("need at least two bins")
    d1 = tuple(sorted(int(i) for i in delta1))
    d2 = tuple(sorted(int(i) for i in delta2))
    for name, subset in (("delta1", d1), ("delta2", d2)):
        if not subset:
            raise InvalidInputError(f"{name} must be nonempty")
        if len(set(subset)) != len(subset) or subset[0] < 0 or subset[-1] >= d:
            raise InvalidInputError(f"{name} is not a set of bin indices below {d}")
    if set(d1) & set(d2):
        raise InvalidInputError("the bin sets must be disjoint")

    uniform = np.full((d, d), 1.0 / d, dtype=complex)
    mask1 = np.zeros(d)
    mask1[list(d1)] = 1.0
    mask2 = np.zeros(d)
    mask2[list(d2)] = 1.0

    weight2 = np.outer(mask2, 1.0 - mask2) + np.outer(1.0 - mask2, mask2)
    collapsed_raw = uniform * weight2
    collapse_probability = float(np.sum(np.abs(collapsed_raw) ** 2))
    collapsed_matrix = collapsed_raw / math.sqrt(collapse_probability)
    collapsed = PureState((d, d), collapsed_matrix, Sector.BOSONIC)

    conditional = _exactly_one_expectation(collapsed_matrix, mask1)
    unconditional = _exactly_one_expectation(uniform, mask1)
    q1 = len(d1) / d
    conditional_formula = len(d1) / (d - len(d2))
    unconditional_formula = 2.0 * q1 * (1.0 - q1)
    if abs(conditional - conditional_formula) > 1e-12:
        raise InconsistencyError(
            f"conditional {conditional} differs from the closed form {conditional_formula}"
        )
    if abs(unconditional - unconditional_formula) > 1e-12:
        raise InconsistencyError(
            f"unconditional {unconditional} differs from the closed form {unconditional_formula}"
        )
    return BinMeasurementDemo(
        d,
        d1,
        d2,
        conditional,
        conditional_formula,
        unconditional,
        unconditional_formula,
        collapse_probability,
        collapsed,
    )
