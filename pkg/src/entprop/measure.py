"""Projective measurement with collapse, plus the measurement-context and
outcome-dependence demonstrations on three-particle states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    InvalidInputError,
    PureState,
    Sector,
    Tolerances,
    pure_state,
    spectral,
)
from .distinguishable import classify, schmidt_decompose

__all__ = [
    "MeasurementOutcome",
    "measure",
    "remainder_state",
    "OutcomeBranch",
    "outcome_dependent_entanglement_demo",
    "ghz_state",
]


@dataclass(frozen=True)
class MeasurementOutcome:
    """One branch of the reduction postulate: the eigenvalue label, its
    probability, and the renormalized collapsed state."""

    label: str
    eigenvalue: float
    probability: float
    collapsed: PureState


def _eigen_projectors(
    observable: np.ndarray,
    tol: Tolerances,
) -> list[tuple[float, np.ndarray]]:
    """Spectral projectors grouped by eigenvalue clusters."""
    w, v = np.linalg.eigh(observable)
    groups: list[tuple[float, np.ndarray]] = []
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or abs(w[i] - w[start]) > 1e3 * tol.rank_tol * scale:
            block = v[:, start:i]
            groups.append((float(np.mean(w[start:i])), block @ block.conj().T))
            start = i
    groups.sort(key=lambda item: -item[0])
    return groups


def measure(
    psi: PureState,
    slot: int | None,
    observable: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> list[MeasurementOutcome]:
    """Measure a Hermitian observable and collapse per the reduction
    postulate; zero-probability outcomes are omitted.

    Slot-labeled measurements are meaningless for identical particles, so
    identical-sector states require `slot=None` and an exchange-symmetric
    operator on the full space (the E-style counting projectors qualify).
    """
    observable = np.asarray(observable, dtype=complex)
    herm = float(np.max(np.abs(observable - observable.conj().T)))
    if herm > 1e-8 * max(1.0, float(np.max(np.abs(observable)))):
        raise InvalidInputError("observable must be Hermitian")

    if psi.sector is not Sector.DISTINGUISHABLE:
        if slot is not None:
            raise InvalidInputError(
                "single-slot measurements are meaningless for identical particles; "
                "pass slot=None with an exchange-symmetric operator"
            )
        if observable.shape != (psi.dim, psi.dim):
            raise InvalidInputError(f"operator must act on the full {psi.dim}-dim space")
        swap_err = _exchange_asymmetry(observable, psi)
        if swap_err > 1e-8:
            raise InvalidInputError(
                f"operator is not exchange-symmetric (deviation {swap_err:.3e})"
            )
        apply = lambda proj, amps: (proj @ amps.reshape(-1)).reshape(psi.dims)
    else:
        if slot is None or not (0 <= slot < psi.n_slots):
            raise InvalidInputError(f"slot must name one of the {psi.n_slots} slots")
        d = psi.dims[slot]
        if observable.shape != (d, d):
            raise InvalidInputError(f"operator must be {d}x{d} for slot {slot}")

        def apply(proj: np.ndarray, amps: np.ndarray) -> np.ndarray:
            moved = np.tensordot(proj, np.moveaxis(amps, slot, 0), axes=([1], [0]))
            return np.moveaxis(moved, 0, slot)

    outcomes = []
    for eigenvalue, projector in _eigen_projectors(observable, tol):
        projected = apply(projector, psi.amps)
        probability = float(np.vdot(projected, projected).real)
        if probability <= tol.eq_tol:
            continue
        collapsed = pure_state(projected, psi.sector, tol=tol)
        outcomes.append(
            MeasurementOutcome(f"{eigenvalue:+g}", eigenvalue, probability, collapsed)
        )
    return outcomes


def _exchange_asymmetry(op: np.ndarray, psi: PureState) -> float:
    dims = psi.dims
    n = len(dims)
    tensor = op.reshape(dims + dims)
    worst = 0.0
    for k in range(n - 1):
        perm = list(range(2 * n))
        perm[k], perm[k + 1] = perm[k + 1], perm[k]
        perm[n + k], perm[n + k + 1] = perm[n + k + 1], perm[n + k]
        worst = max(worst, float(np.max(np.abs(np.transpose(tensor, perm) - tensor))))
    return worst


def ghz_state() -> PureState:
    """Three-qubit (|up,up,up> + |down,down,down>)/sqrt(2)."""
    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[0, 0, 0] = amps[1, 1, 1] = 1.0 / np.sqrt(2.0)
    return PureState((2, 2, 2), amps, Sector.DISTINGUISHABLE, label="ghz")


@dataclass(frozen=True)
class OutcomeBranch:
    label: str
    probability: float
    schmidt_rank: int
    kind: str
    remainder: PureState


def outcome_dependent_entanglement_demo(tol: Tolerances = DEFAULT_TOL) -> list[OutcomeBranch]:
    """Whether the unmeasured pair ends up entangled here depends on the
    measurement outcome, not just on the chosen observable.

    The fixed three-particle state (1/sqrt(3)) [ |up,up>|w_a> +
    (|up,down> + |down,up>) |w_b> ] is measured on slot 3: outcome w_a
    (probability 1/3) leaves a product pair, outcome w_b (probability 2/3)
    an entangled one.  Classifications are verified by the distinguishable
    machinery.
    """
    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[0, 0, 0] = 1.0 / np.sqrt(3.0)   # |up,up> w_a
    amps[0, 1, 1] = 1.0 / np.sqrt(3.0)   # |up,down> w_b
    amps[1, 0, 1] = 1.0 / np.sqrt(3.0)   # |down,up> w_b
    psi = PureState((2, 2, 2), amps, Sector.DISTINGUISHABLE)
    omega = np.diag([1.0, -1.0])  # eigenvalue +1 tags w_a, -1 tags w_b

    branches = []
    for outcome in measure(psi, 2, omega, tol):
        pair = remainder_state(outcome.collapsed, measured_slot=2, tol=tol)
        rank = schmidt_decompose(pair, [0], tol).rank
        verdict = classify(pair, [0], tol)
        label = "w_a" if outcome.eigenvalue > 0 else "w_b"
        branches.append(
            OutcomeBranch(label, outcome.probability, rank, verdict.kind.value, pair)
        )
    return branches


def remainder_state(collapsed: PureState, measured_slot: int, tol: Tolerances = DEFAULT_TOL) -> PureState:
    """Factor the unmeasured slots out of a collapsed state.

    After a rank-1 outcome the collapsed state is (remainder) x (outcome
    eigenvector), so the cut against the measured slot has Schmidt rank 1
    and the left factor is the remainder.
    """
    others = [i for i in range(collapsed.n_slots) if i != measured_slot]
    dec = schmidt_decompose(collapsed, others, tol)
    if dec.rank != 1:
        raise InvalidInputError("the measured slot is still correlated with the rest")
    dims = tuple(collapsed.dims[i] for i in others)
    return pure_state(dec.left_vectors[:, 0], dims=dims, tol=tol)
