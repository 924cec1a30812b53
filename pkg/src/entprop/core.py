"""Dense complex tensor/matrix substrate for composite-system states.

Provides the basic value types (pure states with a symmetry-sector tag,
density operators, separable ensembles, tolerance settings), the tensor
operations everything else is built on (tensor products, partial traces,
spectral decompositions, ensemble mixing) and the JSON state/ensemble
file format.

All values are immutable after construction and all operations are pure
functions, so everything here is safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Sector",
    "Tolerances",
    "DEFAULT_TOL",
    "PureState",
    "DensityOperator",
    "SeparableEnsemble",
    "InvalidInputError",
    "ToleranceError",
    "InconsistencyError",
    "UnsplittableError",
    "pure_state",
    "basis_vector",
    "tensor_product",
    "partial_trace",
    "spectral",
    "numerical_rank",
    "ensemble_to_density",
    "state_to_density",
    "load_state",
    "save_state",
    "load_ensemble",
    "save_ensemble",
]

# Dense storage only; larger coefficient tensors are rejected outright.
MAX_COEFFICIENTS = 2**20

# Construction-time guard for invariants of already-built values.  Decision
# thresholds used by the analysis operations come from `Tolerances` instead.
_CONSTRUCT_ATOL = 1e-8


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class ToleranceError(InvalidInputError):
    """A numerical invariant is violated; carries the offending residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = float(residual)


class InconsistencyError(RuntimeError):
    """Two internally equivalent computations disagree beyond tolerance.

    Raised only when a cross-check that must hold by construction fails,
    which signals a numerical-tolerance bug rather than bad input.
    """


class UnsplittableError(InvalidInputError):
    """The requested orthogonal split does not exist for this state."""


class Sector(str, Enum):
    """Exchange-symmetry sector of a multi-slot state."""

    DISTINGUISHABLE = "distinguishable"
    FERMIONIC = "fermionic"
    BOSONIC = "bosonic"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds: `eq_tol` for scalar equalities, `rank_tol` for
    singular/eigenvalue cutoffs relative to the largest value."""

    eq_tol: float = 1e-9
    rank_tol: float = 1e-9

    def __post_init__(self):
        for name in ("eq_tol", "rank_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise InvalidInputError(f"{name} must lie in (0, 1e-2), got {value}")


DEFAULT_TOL = Tolerances()


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _first_significant_index(flat: np.ndarray, cut: float) -> int:
    mags = np.abs(flat)
    idx = np.nonzero(mags > cut)[0]
    if idx.size == 0:
        raise InvalidInputError("cannot fix the phase of a zero vector")
    return int(idx[0])


def canonical_phase(arr: np.ndarray, rank_tol: float = DEFAULT_TOL.rank_tol) -> np.ndarray:
    """Rotate a global phase so the first significant amplitude (C order)
    is real nonnegative.  Enables bit-stable comparisons downstream."""
    arr = np.asarray(arr, dtype=complex)
    flat = arr.reshape(-1)
    peak = float(np.max(np.abs(flat)))
    if peak == 0.0:
        return arr.copy()
    k = _first_significant_index(flat, rank_tol * peak)
    pivot = flat[k]
    return arr * (abs(pivot) / pivot)


def _symmetry_residual(amps: np.ndarray, sign: float) -> float:
    """Worst deviation from (anti)symmetry over adjacent slot transpositions."""
    worst = 0.0
    for k in range(amps.ndim - 1):
        swapped = np.swapaxes(amps, k, k + 1)
        worst = max(worst, float(np.max(np.abs(swapped - sign * amps))))
    return worst


@dataclass(frozen=True)
class PureState:
    """A normalized coefficient tensor over N particle slots.

    `amps[i1, ..., iN]` is the coefficient of the basis product
    |i1> ... |iN>; `dims` lists the per-slot dimensions.  Fermionic and
    bosonic sectors require equal dims and totally (anti)symmetric amps.
    """

    dims: tuple[int, ...]
    amps: np.ndarray
    sector: Sector = Sector.DISTINGUISHABLE
    label: str | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if any(d <= 0 for d in dims):
            raise InvalidInputError("all slot dimensions must be positive")
        if math.prod(dims) > MAX_COEFFICIENTS:
            raise InvalidInputError(
                f"total dimension {math.prod(dims)} exceeds the dense cap {MAX_COEFFICIENTS}"
            )
        amps = _readonly(self.amps)
        if amps.shape != dims:
            raise InvalidInputError(f"amps shape {amps.shape} does not match dims {dims}")
        object.__setattr__(self, "amps", amps)
        sector = Sector(self.sector)
        object.__setattr__(self, "sector", sector)

        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > _CONSTRUCT_ATOL:
            raise ToleranceError("state is not normalized", abs(norm2 - 1.0))
        if sector is not Sector.DISTINGUISHABLE and len(dims) > 1:
            if len(set(dims)) != 1:
                raise InvalidInputError(f"{sector.value} sector requires equal slot dims, got {dims}")
            sign = -1.0 if sector is Sector.FERMIONIC else 1.0
            residual = _symmetry_residual(amps, sign)
            if residual > _CONSTRUCT_ATOL:
                raise ToleranceError(f"amps are not {sector.value}-symmetric", residual)

    @property
    def n_slots(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def vector(self) -> np.ndarray:
        """Flattened (row-major) coefficient vector."""
        return self.amps.reshape(-1)

    def overlap(self, other: "PureState") -> complex:
        if self.dims != other.dims:
            raise InvalidInputError(f"dims mismatch: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.vector, other.vector))

    def fidelity(self, other: "PureState") -> float:
        """Overlap modulus; 1 means equal up to a global phase."""
        return abs(self.overlap(other))


def pure_state(
    amps: np.ndarray | Sequence,
    sector: Sector | str = Sector.DISTINGUISHABLE,
    label: str | None = None,
    dims: Sequence[int] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> PureState:
    """Normalize a raw coefficient tensor into a `PureState`.

    Applies the global phase convention (first significant amplitude made
    real nonnegative).  `dims` is only needed when `amps` arrives flat.
    """
    arr = np.asarray(amps, dtype=complex)
    if dims is not None:
        arr = arr.reshape(tuple(int(d) for d in dims))
    if arr.ndim == 0:
        raise InvalidInputError("scalar is not a state")
    norm = float(np.linalg.norm(arr.reshape(-1)))
    if norm <= tol.rank_tol:
        raise InvalidInputError("cannot normalize a (numerically) zero tensor")
    return PureState(arr.shape, canonical_phase(arr / norm, tol.rank_tol), Sector(sector), label)


def basis_vector(index: int, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return vec


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one, Hermitian, positive-semidefinite matrix on a (sub)system."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        mat = _readonly(self.mat)
        dim = int(self.dim)
        object.__setattr__(self, "dim", dim)
        if mat.shape != (dim, dim):
            raise InvalidInputError(f"matrix shape {mat.shape} does not match dim {dim}")
        if mat.size > MAX_COEFFICIENTS:
            raise InvalidInputError(f"matrix with {mat.size} entries exceeds the dense cap")
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > _CONSTRUCT_ATOL:
            raise ToleranceError("matrix is not Hermitian", herm)
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > _CONSTRUCT_ATOL:
            raise ToleranceError("trace differs from 1", abs(tr - 1.0))
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -_CONSTRUCT_ATOL:
            raise ToleranceError("matrix has a negative eigenvalue", -lo)
        object.__setattr__(self, "mat", mat)

    def expectation(self, op: np.ndarray) -> float:
        """Tr[op rho] for a Hermitian `op`."""
        return float(np.trace(op @ self.mat).real)


@dataclass(frozen=True)
class SeparableEnsemble:
    """Weighted list of product pure states: entries of (p_j, per-subsystem
    factor vectors)."""

    entries: tuple[tuple[float, tuple[np.ndarray, ...]], ...]

    def __post_init__(self):
        if not self.entries:
            raise InvalidInputError("ensemble must contain at least one entry")
        frozen = []
        dims = None
        total = 0.0
        for weight, factors in self.entries:
            w = float(weight)
            if w <= 0.0:
                raise InvalidInputError(f"ensemble weights must be positive, got {w}")
            total += w
            vecs = tuple(_readonly(np.asarray(f, dtype=complex).reshape(-1)) for f in factors)
            if not vecs:
                raise InvalidInputError("ensemble entry has no factors")
            entry_dims = tuple(v.size for v in vecs)
            if dims is None:
                dims = entry_dims
            elif entry_dims != dims:
                raise InvalidInputError(f"factor dims mismatch: {entry_dims} vs {dims}")
            for v in vecs:
                err = abs(float(np.linalg.norm(v)) - 1.0)
                if err > _CONSTRUCT_ATOL:
                    raise ToleranceError("ensemble factor is not normalized", err)
            frozen.append((w, vecs))
        if abs(total - 1.0) > _CONSTRUCT_ATOL:
            raise ToleranceError("ensemble weights do not sum to 1", abs(total - 1.0))
        object.__setattr__(self, "entries", tuple(frozen))

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.entries[0][1])

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)


StateLike = Union[PureState, np.ndarray, Sequence]


def _as_amps(value: StateLike) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(value, PureState):
        return value.amps, value.dims
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        raise InvalidInputError("scalar operand is not a state")
    return arr, arr.shape


def tensor_product(a: StateLike, b: StateLike, label: str | None = None) -> PureState:
    """Outer product of two states; dims concatenate, sector is distinguishable."""
    amps_a, dims_a = _as_amps(a)
    amps_b, dims_b = _as_amps(b)
    if 0 in dims_a or 0 in dims_b:
        raise InvalidInputError("dimension-zero operand")
    joint = np.multiply.outer(amps_a, amps_b)
    return pure_state(joint, Sector.DISTINGUISHABLE, label=label)


def state_to_density(psi: PureState) -> DensityOperator:
    vec = psi.vector
    return DensityOperator(psi.dim, np.outer(vec, vec.conj()))


def partial_trace(
    rho: DensityOperator | np.ndarray,
    dims: Sequence[int],
    keep: Iterable[int],
    tol: Tolerances = DEFAULT_TOL,
) -> DensityOperator:
    """Trace out every slot not in `keep`; `keep` order fixes the result order."""
    mat = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if mat.shape != (math.prod(dims), math.prod(dims)):
        raise InvalidInputError(f"dims {dims} are inconsistent with matrix shape {mat.shape}")
    keep = [int(k) for k in keep]
    if not keep or len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise InvalidInputError(f"keep must be a nonempty set of distinct slot indices, got {keep}")
    if len(keep) == n:
        raise InvalidInputError("keep must be a proper subset of the slots")

    tensor = mat.reshape(dims + dims)
    traced = sorted(set(range(n)) - set(keep))
    for offset, slot in enumerate(traced):
        ax = slot - offset
        tensor = np.trace(tensor, axis1=ax, axis2=ax + (n - offset))
    # np.trace leaves the kept slots in ascending order; restore `keep` order.
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(k) for k in keep]
    m = len(keep)
    tensor = np.transpose(tensor, [perm[i] for i in range(m)] + [m + perm[i] for i in range(m)])
    d_out = math.prod(dims[k] for k in keep)
    return DensityOperator(d_out, tensor.reshape(d_out, d_out))


def _cluster_edges(values: np.ndarray, cluster_tol: float) -> list[tuple[int, int]]:
    edges = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or abs(values[i] - values[start]) > cluster_tol:
            edges.append((start, i))
            start = i
    return edges


def spectral(
    rho: DensityOperator | np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    Within degenerate clusters the eigenvectors get a canonical phase and a
    lexicographic ordering of their coefficient sequences, so repeated calls
    on the same operator produce identical output.
    """
    mat = rho.mat if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    if herm > _CONSTRUCT_ATOL:
        raise ToleranceError("matrix is not Hermitian", herm)
    w, v = np.linalg.eigh(mat)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    scale = max(abs(float(w[0])), 1.0) if w.size else 1.0
    for lo, hi in _cluster_edges(w, tol.rank_tol * scale):
        cols = [canonical_phase(v[:, j], tol.rank_tol) for j in range(lo, hi)]
        keys = [tuple(np.round(c.real, 9)) + tuple(np.round(c.imag, 9)) for c in cols]
        order = sorted(range(len(cols)), key=keys.__getitem__)
        for offset, src in enumerate(order):
            v[:, lo + offset] = cols[src]
    return w, v


def numerical_rank(values: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    """Count of spectrum entries above `rank_tol` relative to the largest."""
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0
    peak = float(values.max())
    if peak == 0.0:
        return 0
    return int(np.sum(values > tol.rank_tol * peak))


def _flatten_entry(entry) -> tuple[float, np.ndarray]:
    weight, state = entry
    if isinstance(state, PureState):
        return float(weight), state.vector
    if isinstance(state, (tuple, list)) and state and isinstance(state[0], np.ndarray):
        vec = state[0].reshape(-1)
        for factor in state[1:]:
            vec = np.kron(vec, np.asarray(factor, dtype=complex).reshape(-1))
        return float(weight), vec
    return float(weight), np.asarray(state, dtype=complex).reshape(-1)


def ensemble_to_density(
    ensemble: SeparableEnsemble | Sequence[tuple[float, StateLike]],
) -> DensityOperator:
    """rho = sum_r p_r |phi_r><phi_r| with product factors flattened first."""
    if isinstance(ensemble, SeparableEnsemble):
        entries = [(w, factors) for w, factors in ensemble.entries]
    else:
        entries = list(ensemble)
        total = sum(float(w) for w, _ in entries)
        if abs(total - 1.0) > _CONSTRUCT_ATOL:
            raise ToleranceError("weights do not sum to 1", abs(total - 1.0))
    mat = None
    for entry in entries:
        weight, vec = _flatten_entry(entry)
        term = weight * np.outer(vec, vec.conj())
        mat = term if mat is None else mat + term
    return DensityOperator(mat.shape[0], mat)


# -- state and ensemble files -------------------------------------------------
#
# Textual JSON, UTF-8.  Unlisted amplitude indices are zero:
#   {"sector": "fermionic", "dims": [2, 2],
#    "amps": [{"idx": [0, 1], "re": 0.707..., "im": 0.0}, ...]}
# Ensembles: {"entries": [{"p": 0.5, "factors": [<state>, <state>]}, ...]}


def _state_to_obj(psi: PureState) -> dict:
    entries = []
    flat = psi.amps.reshape(-1)
    peak = float(np.max(np.abs(flat)))
    threshold = 1e-15 * peak
    for flat_idx in np.nonzero(np.abs(flat) > threshold)[0]:
        idx = np.unravel_index(int(flat_idx), psi.dims)
        a = flat[flat_idx]
        entries.append({"idx": [int(i) for i in idx], "re": float(a.real), "im": float(a.imag)})
    obj = {"sector": psi.sector.value, "dims": list(psi.dims), "amps": entries}
    if psi.label:
        obj["label"] = psi.label
    return obj


def _state_from_obj(obj: dict, tol: Tolerances, auto_normalize: bool) -> PureState:
    if not isinstance(obj, dict):
        raise InvalidInputError("state object must be a JSON mapping")
    for key in ("sector", "dims", "amps"):
        if key not in obj:
            raise InvalidInputError(f"state object is missing field '{key}'")
    try:
        sector = Sector(obj["sector"])
    except ValueError:
        raise InvalidInputError(f"unknown sector '{obj['sector']}'") from None
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d > 0 for d in dims):
        raise InvalidInputError("field 'dims' must be a nonempty list of positive integers")
    dims = tuple(dims)
    if math.prod(dims) > MAX_COEFFICIENTS:
        raise InvalidInputError(f"total dimension exceeds the dense cap {MAX_COEFFICIENTS}")
    amps = np.zeros(dims, dtype=complex)
    if not isinstance(obj["amps"], list):
        raise InvalidInputError("field 'amps' must be a list")
    for k, entry in enumerate(obj["amps"]):
        if not isinstance(entry, dict) or "idx" not in entry:
            raise InvalidInputError(f"amps[{k}] is missing field 'idx'")
        idx = entry["idx"]
        if (
            not isinstance(idx, list)
            or len(idx) != len(dims)
            or not all(isinstance(i, int) and 0 <= i < d for i, d in zip(idx, dims))
        ):
            raise InvalidInputError(f"amps[{k}].idx is not a valid index into dims {list(dims)}")
        try:
            value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        except (TypeError, ValueError):
            raise InvalidInputError(f"amps[{k}] has non-numeric re/im") from None
        amps[tuple(idx)] = value

    label = obj.get("label")
    norm = float(np.linalg.norm(amps.reshape(-1)))
    if norm <= tol.rank_tol:
        raise InvalidInputError("state file contains a zero state")
    if auto_normalize:
        return pure_state(amps, sector, label=label, tol=tol)
    if abs(norm - 1.0) > tol.eq_tol:
        raise ToleranceError("field 'amps' is not normalized", abs(norm - 1.0))
    if sector is not Sector.DISTINGUISHABLE and len(dims) > 1:
        if len(set(dims)) != 1:
            raise InvalidInputError(f"{sector.value} sector requires equal slot dims")
        sign = -1.0 if sector is Sector.FERMIONIC else 1.0
        residual = _symmetry_residual(amps, sign)
        if residual > tol.eq_tol:
            raise ToleranceError(f"field 'amps' violates {sector.value} symmetry", residual)
    return PureState(dims, amps / norm, sector, label)


def save_state(psi: PureState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(_state_to_obj(psi)), encoding="utf-8")


def load_state(
    path: str | Path,
    tol: Tolerances = DEFAULT_TOL,
    auto_normalize: bool = False,
) -> PureState:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"not valid JSON: {exc}") from None
    return _state_from_obj(obj, tol, auto_normalize)


def save_ensemble(ensemble: SeparableEnsemble, path: str | Path) -> None:
    entries = []
    for weight, factors in ensemble.entries:
        states = [_state_to_obj(pure_state(f)) for f in factors]
        entries.append({"p": float(weight), "factors": states})
    Path(path).write_text(json.dumps({"entries": entries}), encoding="utf-8")


def load_ensemble(
    path: str | Path,
    tol: Tolerances = DEFAULT_TOL,
    auto_normalize: bool = False,
) -> SeparableEnsemble:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "entries" not in obj or not isinstance(obj["entries"], list):
        raise InvalidInputError("ensemble file is missing field 'entries'")
    entries = []
    for k, entry in enumerate(obj["entries"]):
        if not isinstance(entry, dict) or "p" not in entry or "factors" not in entry:
            raise InvalidInputError(f"entries[{k}] must carry fields 'p' and 'factors'")
        try:
            weight = float(entry["p"])
        except (TypeError, ValueError):
            raise InvalidInputError(f"entries[{k}].p is not a number") from None
        factors = [
            _state_from_obj(f, tol, auto_normalize).vector for f in entry["factors"]
        ]
        entries.append((weight, tuple(factors)))
    return SeparableEnsemble(tuple(entries))
