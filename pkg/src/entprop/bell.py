"""Separable-mixture expectation values and the CHSH bound.

A mixture of factorized states yields two-observable expectations of the
form sum_j p_j A_j B_j, the same structure as a local hidden-variable
average, so its CHSH combination can never exceed 2.  Whether a general
density operator admits such a decomposition is deliberately out of
scope; only explicitly given separable ensembles are certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import (
    DEFAULT_TOL,
    InvalidInputError,
    PureState,
    SeparableEnsemble,
    Tolerances,
    ensemble_to_density,
)

__all__ = [
    "ChshSettings",
    "separable_expectation",
    "chsh_value",
    "ensemble_equivalence",
    "EquivalenceReport",
    "spin_observable",
    "TsirelsonDemo",
    "tsirelson_demo",
]


def _check_bounded_observable(op: np.ndarray, name: str, tol: Tolerances) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidInputError(f"{name} must be a square matrix")
    herm = float(np.max(np.abs(op - op.conj().T)))
    if herm > 1e-8 * max(1.0, float(np.max(np.abs(op)))):
        raise InvalidInputError(f"{name} must be Hermitian")
    top = float(np.max(np.abs(np.linalg.eigvalsh(op))))
    if top > 1.0 + tol.eq_tol:
        raise InvalidInputError(f"{name} must have spectrum within [-1, 1], norm is {top}")
    return op


@dataclass(frozen=True)
class ChshSettings:
    """Two dichotomic-style observables per side, spectra within [-1, 1]."""

    a: np.ndarray
    a2: np.ndarray
    b: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        tol = DEFAULT_TOL
        for name in ("a", "a2", "b", "b2"):
            object.__setattr__(self, name, _check_bounded_observable(getattr(self, name), name, tol))
        if self.a.shape != self.a2.shape or self.b.shape != self.b2.shape:
            raise InvalidInputError("paired settings must share dimensions")


def separable_expectation(
    ensemble: SeparableEnsemble,
    a_op: np.ndarray,
    b_op: np.ndarray,
) -> float:
    """<A x B> = sum_j p_j <phi_j|A|phi_j> <theta_j|B|theta_j>."""
    dims = ensemble.factor_dims
    if len(dims) != 2:
        raise InvalidInputError("CHSH expectations need bipartite ensembles (two factors)")
    a_op = np.asarray(a_op, dtype=complex)
    b_op = np.asarray(b_op, dtype=complex)
    if a_op.shape != (dims[0], dims[0]) or b_op.shape != (dims[1], dims[1]):
        raise InvalidInputError(f"operators must act on the factor spaces {dims}")
    total = 0.0
    for weight, (phi, theta) in ensemble.entries:
        total += weight * float(np.vdot(phi, a_op @ phi).real) * float(np.vdot(theta, b_op @ theta).real)
    return total


def _pure_expectation(psi: PureState, a_op: np.ndarray, b_op: np.ndarray) -> float:
    if psi.n_slots != 2:
        raise InvalidInputError("pure-state CHSH needs a two-slot state")
    matrix = psi.amps
    return float(np.vdot(matrix, a_op @ matrix @ b_op.T).real)


def chsh_value(
    system: SeparableEnsemble | PureState,
    settings: ChshSettings,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """S = <A B> + <A B2> + <A2 B> - <A2 B2>."""
    if isinstance(system, SeparableEnsemble):
        expect = lambda x, y: separable_expectation(system, x, y)
    elif isinstance(system, PureState):
        expect = lambda x, y: _pure_expectation(system, x, y)
    else:
        raise InvalidInputError("system must be a SeparableEnsemble or a PureState")
    return (
        expect(settings.a, settings.b)
        + expect(settings.a, settings.b2)
        + expect(settings.a2, settings.b)
        - expect(settings.a2, settings.b2)
    )


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    max_abs_diff: float


def ensemble_equivalence(
    e1: SeparableEnsemble,
    e2: SeparableEnsemble,
    tol: Tolerances = DEFAULT_TOL,
) -> EquivalenceReport:
    """Whether two ensembles map to one statistical operator (max-abs entry
    difference).  Equivalent ensembles give identical predictions for every
    measurement, even though their pure-state compositions differ."""
    if e1.dim != e2.dim:
        raise InvalidInputError(f"total dimensions differ: {e1.dim} vs {e2.dim}")
    rho1 = ensemble_to_density(e1).mat
    rho2 = ensemble_to_density(e2).mat
    diff = float(np.max(np.abs(rho1 - rho2)))
    return EquivalenceReport(diff <= tol.eq_tol, diff)


_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def spin_observable(theta: float) -> np.ndarray:
    """Spin along the x-z plane direction at angle theta from the z axis."""
    return math.cos(theta) * _SIGMA_Z + math.sin(theta) * _SIGMA_X


@dataclass(frozen=True)
class TsirelsonDemo:
    value: float
    angles: tuple[float, float, float, float]
    settings: ChshSettings


def tsirelson_demo() -> TsirelsonDemo:
    """Push the singlet CHSH value to its quantum maximum 2 sqrt(2).

    Spin directions are confined to the x-z plane, where the singlet gives
    <(a.sigma)(b.sigma)> = -cos(theta_a - theta_b).  A deterministic coarse
    grid over the four angles feeds a local simplex refinement; the final
    value is re-evaluated through the operator machinery on the actual
    singlet state.  Seed-free and reproducible.
    """
    from .distinguishable import singlet_state

    def neg_s(angles: np.ndarray) -> float:
        ta, ta2, tb, tb2 = angles
        return (
            math.cos(ta - tb)
            + math.cos(ta - tb2)
            + math.cos(ta2 - tb)
            - math.cos(ta2 - tb2)
        )

    steps = 12
    grid = [2.0 * math.pi * k / steps for k in range(steps)]
    best = None
    for ta2 in grid:
        for tb in grid:
            for tb2 in grid:
                candidate = np.array([0.0, ta2, tb, tb2])
                score = neg_s(candidate)
                if best is None or score < best[0]:
                    best = (score, candidate)
    result = minimize(
        neg_s,
        best[1],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    angles = tuple(float(t) for t in result.x)
    settings = ChshSettings(
        spin_observable(angles[0]),
        spin_observable(angles[1]),
        spin_observable(angles[2]),
        spin_observable(angles[3]),
    )
    value = chsh_value(singlet_state(), settings)
    return TsirelsonDemo(value, angles, settings)
