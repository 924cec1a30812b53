"""Property attribution and entanglement decisions for two identical particles.

The central object is the exchange-symmetric property projector
E(1,2) = P x I + I x P - P x P whose unit expectation certifies "at least
one particle has the complete property set P".  Non-entanglement is the
simultaneous attribution of complete property sets to both constituents:
fermion pairs need a single antisymmetrized product (Slater rank 1),
boson pairs either a symmetrized orthogonal product or a doubled state.

Canonical forms: antisymmetric coefficient matrices decompose into Youla
pairs c_k (u w^T - w u^T); symmetric ones into Takagi dyads c_k v v^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DEFAULT_TOL,
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    Tolerances,
    canonical_phase,
)

__all__ = [
    "PropertyWitness",
    "PairFormKind",
    "PairCanonicalForm",
    "PairDecision",
    "e_projector",
    "has_complete_property",
    "decide_pair",
    "boson_uniqueness_check",
    "unsharp_property",
    "identical_correlation_test",
    "greedy_unsharp_search",
    "takagi_decomposition",
    "youla_pairs",
]


def _check_projector(p: np.ndarray, name: str = "P") -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidInputError(f"{name} must be a square matrix")
    herm = float(np.max(np.abs(p - p.conj().T)))
    idem = float(np.max(np.abs(p @ p - p)))
    if max(herm, idem) > 1e-8:
        raise InvalidInputError(f"{name} is not a projector (deviation {max(herm, idem):.3e})")
    return p


def _projector_rank(p: np.ndarray) -> int:
    return int(round(float(np.trace(p).real)))


def e_projector(p: np.ndarray, d: int | None = None) -> np.ndarray:
    """Two-particle projector P x I + I x P - P x P.

    Its expectation is the probability that at least one of the two
    identical particles carries the property P; the exclusive rewrite
    P x (I-P) + (I-P) x P + P x P is the same operator.
    """
    p = _check_projector(p)
    if d is not None and p.shape[0] != d:
        raise InvalidInputError(f"projector dimension {p.shape[0]} does not match d={d}")
    eye = np.eye(p.shape[0], dtype=complex)
    return np.kron(p, eye) + np.kron(eye, p) - np.kron(p, p)


def _exclusive_rewrite(p: np.ndarray) -> np.ndarray:
    eye = np.eye(p.shape[0], dtype=complex)
    q = eye - p
    return np.kron(p, q) + np.kron(q, p) + np.kron(p, p)


def _pair_vector(psi: PureState) -> np.ndarray:
    if psi.n_slots != 2 or psi.sector is Sector.DISTINGUISHABLE:
        raise InvalidInputError("expected a two-slot state in an identical-particle sector")
    return psi.vector


@dataclass(frozen=True)
class PropertyWitness:
    """Outcome of a complete-property query: the queried projector, the
    expectation of its E operator, and whether the projector was rank 1
    (a complete property set rather than an unsharp one)."""

    projector: np.ndarray
    trace_value: float
    complete: bool


def has_complete_property(
    psi: PureState,
    p: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> PropertyWitness:
    """Expectation of E(1,2) for a rank-1 single-particle projector.

    The inclusive and exclusive forms of E are evaluated against each
    other as a cross-check.  Higher-rank projectors belong to
    `unsharp_property`.
    """
    vec = _pair_vector(psi)
    p = _check_projector(p)
    if _projector_rank(p) != 1:
        raise InvalidInputError("has_complete_property needs a rank-1 projector; use unsharp_property")
    e_op = e_projector(p)
    value = float(np.vdot(vec, e_op @ vec).real)
    alt = float(np.vdot(vec, _exclusive_rewrite(p) @ vec).real)
    if abs(value - alt) > 1e-10:
        raise InconsistencyError(f"E forms disagree: {value} vs {alt}")
    return PropertyWitness(p, value, True)


# -- canonical forms ----------------------------------------------------------


def _canonical_sign(vec: np.ndarray, cut: float) -> np.ndarray:
    """Fix the sign ambiguity of a Takagi vector (only +-1 is allowed, a
    general phase would rotate the dyad v v^T)."""
    mags = np.abs(vec)
    k = int(np.nonzero(mags > cut * float(mags.max()))[0][0])
    z = vec[k]
    if z.real < -abs(z.imag) * 1e-9 or (abs(z.real) <= abs(z.imag) * 1e-9 and z.imag < 0):
        return -vec
    return vec


def takagi_decomposition(
    a: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization a = sum_k c_k v_k v_k^T of a complex symmetric
    matrix, with c_k > 0 descending and orthonormal v_k (columns).

    Works through the real symmetric embedding of the antilinear map
    x -> a conj(x); its positive eigenpairs are exactly the Takagi pairs,
    so degenerate coefficient clusters need no special casing.
    """
    a = np.asarray(a, dtype=complex)
    sym_err = float(np.max(np.abs(a - a.T)))
    if sym_err > 1e-8:
        raise InvalidInputError(f"matrix is not symmetric (deviation {sym_err:.3e})")
    d = a.shape[0]
    ar, ai = a.real, a.imag
    embed = np.block([[ar, ai], [ai, -ar]])
    w, v = np.linalg.eigh(embed)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    peak = max(float(abs(w[0])), 0.0) if w.size else 0.0
    cut = tol.rank_tol * peak if peak > 0 else 0.0
    coeffs, vectors = [], []
    for k in range(d):
        if w[k] <= cut:
            break
        x = v[:d, k] + 1j * v[d:, k]
        x = x / np.linalg.norm(x)
        vectors.append(_canonical_sign(x, tol.rank_tol))
        coeffs.append(float(w[k]))
    if not coeffs:
        return np.zeros(0), np.zeros((d, 0), dtype=complex)
    return np.asarray(coeffs), np.column_stack(vectors)


def youla_pairs(
    a: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Decompose a complex antisymmetric matrix as
    a = sum_k c_k (u_k w_k^T - w_k u_k^T) with c_k > 0 descending and all
    u_k, w_k orthonormal.

    Pairs are peeled off the (doubly degenerate) eigenspaces of a a^dag:
    inside the eigenspace for c^2, the partner of any unit u is
    w = -a conj(u) / c.
    """
    a = np.asarray(a, dtype=complex)
    skew_err = float(np.max(np.abs(a + a.T)))
    if skew_err > 1e-8:
        raise InvalidInputError(f"matrix is not antisymmetric (deviation {skew_err:.3e})")
    rho = a @ a.conj().T
    w_vals, w_vecs = np.linalg.eigh(rho)
    order = np.argsort(w_vals)[::-1]
    w_vals, w_vecs = w_vals[order], w_vecs[:, order]
    peak = float(abs(w_vals[0])) if w_vals.size else 0.0
    cut = tol.rank_tol * peak if peak > 0 else 0.0

    pairs: list[tuple[float, np.ndarray, np.ndarray]] = []
    k = 0
    n = w_vals.size
    while k < n and w_vals[k] > cut:
        hi = k + 1
        while hi < n and abs(w_vals[hi] - w_vals[k]) <= cut + 1e-12 * peak:
            hi += 1
        basis = w_vecs[:, k:hi].copy()
        c = math.sqrt(float(w_vals[k]))
        while basis.shape[1] > 0:
            u = canonical_phase(basis[:, 0], tol.rank_tol)
            u = u / np.linalg.norm(u)
            partner = -(a @ u.conj()) / c
            partner = partner / np.linalg.norm(partner)
            pairs.append((c, u, partner))
            if basis.shape[1] <= 2:
                break
            block = np.column_stack([u, partner])
            rest = basis[:, 1:] - block @ (block.conj().T @ basis[:, 1:])
            q, r = np.linalg.qr(rest)
            keep = np.abs(np.diag(r)) > 1e-12
            basis = q[:, keep]
        k = hi
    return pairs


class PairFormKind(str, Enum):
    FERMION_SLATER = "fermion_slater"
    BOSON_DUAL = "boson_dual"


@dataclass(frozen=True)
class PairCanonicalForm:
    """Canonical expansion of a two-particle identical state.

    Fermions: psi = sum_k c_k (|u_k w_k> - |w_k u_k>) with vectors stored
    pairwise and 2 sum c_k^2 = 1.  Bosons: psi = sum_k c_k |v_k v_k> with
    sum c_k^2 = 1.
    """

    kind: PairFormKind
    coeffs: np.ndarray
    vectors: tuple[np.ndarray, ...]

    def reassemble(self) -> np.ndarray:
        d = self.vectors[0].size
        out = np.zeros((d, d), dtype=complex)
        if self.kind is PairFormKind.FERMION_SLATER:
            for k, c in enumerate(self.coeffs):
                u, w = self.vectors[2 * k], self.vectors[2 * k + 1]
                out += c * (np.multiply.outer(u, w) - np.multiply.outer(w, u))
        else:
            for k, c in enumerate(self.coeffs):
                v = self.vectors[k]
                out += c * np.multiply.outer(v, v)
        return out


@dataclass(frozen=True)
class PairDecision:
    """Verdict for a pair of identical particles: the canonical form, the
    non-entanglement flag, the witness states (when single properties are
    attributable) and their verified E expectations.

    `oblique` marks the boson case of a symmetrized non-orthogonal,
    non-identical product: each witness query still returns 1 but the
    joint attribution fails, so the pair counts as entangled."""

    non_entangled: bool
    form: PairCanonicalForm
    witnesses: tuple[np.ndarray, ...] | None
    witness_traces: tuple[float, ...] | None
    oblique: bool = False


def _verify_witnesses(
    psi: PureState,
    witnesses: tuple[np.ndarray, ...],
    tol: Tolerances,
) -> tuple[float, ...]:
    traces = []
    for vec in witnesses:
        p = np.outer(vec, vec.conj())
        value = has_complete_property(psi, p, tol).trace_value
        if abs(value - 1.0) > 1e-8:
            raise InconsistencyError(f"witness verification failed: <E> = {value}")
        traces.append(value)
    return tuple(traces)


def decide_pair(psi: PureState, tol: Tolerances = DEFAULT_TOL) -> PairDecision:
    """Entanglement decision for a two-slot fermionic or bosonic state.

    Fermions are non-entangled iff the coefficient matrix has a single
    Youla pair (reduced spectrum {1/2, 1/2}); bosons iff the Takagi form
    is a single dyad or two dyads with equal weights.  The reassembled
    canonical form and every witness are verified a posteriori.
    """
    if psi.n_slots != 2:
        raise InvalidInputError("decide_pair needs a two-slot state")
    if psi.sector is Sector.DISTINGUISHABLE:
        raise InvalidInputError("decide_pair applies to identical-particle sectors")
    a = psi.amps

    if psi.sector is Sector.FERMIONIC:
        pairs = youla_pairs(a, tol)
        coeffs = np.asarray([c for c, _, _ in pairs])
        vectors = tuple(v for _, u, w in pairs for v in (u, w))
        form = PairCanonicalForm(PairFormKind.FERMION_SLATER, coeffs, vectors)
        _check_reassembly(form, a)
        non_entangled = len(pairs) == 1
        witnesses = (pairs[0][1], pairs[0][2]) if non_entangled else None
        traces = _verify_witnesses(psi, witnesses, tol) if witnesses else None
        return PairDecision(non_entangled, form, witnesses, traces)

    coeffs, vecs = takagi_decomposition(a, tol)
    form = PairCanonicalForm(PairFormKind.BOSON_DUAL, coeffs, tuple(vecs.T))
    _check_reassembly(form, a)
    rank = coeffs.size
    if rank == 1:
        witnesses = (vecs[:, 0],)
        return PairDecision(True, form, witnesses, _verify_witnesses(psi, witnesses, tol))
    if rank == 2:
        plus = math.sqrt(coeffs[0]) * vecs[:, 0] + 1j * math.sqrt(coeffs[1]) * vecs[:, 1]
        minus = math.sqrt(coeffs[0]) * vecs[:, 0] - 1j * math.sqrt(coeffs[1]) * vecs[:, 1]
        witnesses = (plus / np.linalg.norm(plus), minus / np.linalg.norm(minus))
        traces = _verify_witnesses(psi, witnesses, tol)
        flat = abs(coeffs[0] - coeffs[1]) <= tol.eq_tol
        return PairDecision(flat, form, witnesses, traces, oblique=not flat)
    return PairDecision(False, form, None, None)


def _check_reassembly(form: PairCanonicalForm, a: np.ndarray) -> None:
    err = float(np.max(np.abs(form.reassemble() - a)))
    if err > 1e-8:
        raise InconsistencyError(f"canonical form reassembly off by {err:.3e}")


_UNIQUENESS_SAMPLES = (
    (math.sqrt(0.5), math.sqrt(0.5)),
    (0.6, 0.8),
    (0.8, 0.6j),
    (0.28, complex(0.72, 0.64)),
)


def boson_uniqueness_check(psi: PureState, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether the witness pair of a non-entangled pair state is unique.

    Every rotated orthonormal pair (a PHI0 + b THETA, -b* PHI0 + a* THETA)
    with a, b both nonzero is rebuilt and compared against the state: for
    bosons all of them miss (unique pair, returns True); for the fermionic
    analogue all of them reproduce the state (returns False).
    """
    decision = decide_pair(psi, tol)
    if not decision.non_entangled:
        raise InvalidInputError("uniqueness check applies to non-entangled pairs")
    if psi.sector is Sector.BOSONIC and len(decision.witnesses) == 1:
        return True  # doubled state: single-state form, vacuously unique

    first, second = decision.witnesses[0], decision.witnesses[1]
    sign = -1.0 if psi.sector is Sector.FERMIONIC else 1.0
    reproduced = []
    for a_coef, b_coef in _UNIQUENESS_SAMPLES:
        alpha = a_coef * first + b_coef * second
        beta = -np.conj(b_coef) * first + np.conj(a_coef) * second
        rebuilt = np.multiply.outer(alpha, beta) + sign * np.multiply.outer(beta, alpha)
        norm = float(np.linalg.norm(rebuilt))
        if norm <= tol.rank_tol:
            reproduced.append(False)
            continue
        fidelity = abs(np.vdot(rebuilt / norm, psi.amps))
        reproduced.append(abs(fidelity - 1.0) <= 1e-8)
    if all(reproduced):
        return False
    if any(reproduced):
        raise InconsistencyError(f"rotation samples disagree: {reproduced}")
    return True


def unsharp_property(
    psi: PureState,
    p_m: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[bool, float]:
    """Expectation of the rank-general property projector E_M.

    holds is equivalent to (I-P_M) x (I-P_M) annihilating the state, which
    is asserted as a cross-check.
    """
    vec = _pair_vector(psi)
    p_m = _check_projector(p_m, "P_M")
    e_op = _exclusive_rewrite(p_m)
    value = float(np.vdot(vec, e_op @ vec).real)
    q = np.eye(p_m.shape[0], dtype=complex) - p_m
    annihilated = np.kron(q, q) @ vec
    alt = 1.0 - float(np.vdot(annihilated, annihilated).real)
    if abs(value - alt) > 1e-10:
        raise InconsistencyError(f"E_M expectation {value} vs annihilation form {alt}")
    return abs(value - 1.0) <= tol.eq_tol, value


def identical_correlation_test(
    psi: PureState,
    omega: np.ndarray,
    sigma: np.ndarray,
    r_proj: np.ndarray,
    l_proj: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[float, float]:
    """Position-tagged internal correlations for a pair with the single
    particle space split as internal x spatial.

    joint is the expectation of the product of the two tagged sums
    [Omega at R] and [Sigma at L]; product multiplies their separate
    expectations.  For a state assembled from one factor localized in R
    and one in L the two coincide and reduce to <Omega>_internal1 *
    <Sigma>_internal2.
    """
    vec = _pair_vector(psi)
    omega = np.asarray(omega, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    for name, op in (("Omega", omega), ("Sigma", sigma)):
        if float(np.max(np.abs(op - op.conj().T))) > 1e-8:
            raise InvalidInputError(f"{name} must be Hermitian")
    r_proj = _check_projector(r_proj, "R")
    l_proj = _check_projector(l_proj, "L")
    overlap = float(np.max(np.abs(r_proj @ l_proj)))
    if overlap > 1e-10:
        raise InvalidInputError(f"R and L supports overlap (|RL| = {overlap:.3e})")
    d = psi.dims[0]
    d_int = omega.shape[0]
    if d % d_int != 0 or r_proj.shape[0] != d // d_int:
        raise InvalidInputError(
            f"single-particle dim {d} does not factor into internal {d_int} x spatial {r_proj.shape[0]}"
        )
    tagged_r = np.kron(omega, r_proj)
    tagged_l = np.kron(sigma, l_proj)
    eye = np.eye(d, dtype=complex)
    sum_r = np.kron(tagged_r, eye) + np.kron(eye, tagged_r)
    sum_l = np.kron(tagged_l, eye) + np.kron(eye, tagged_l)
    joint = float(np.vdot(vec, sum_r @ (sum_l @ vec)).real)
    marg_r = float(np.vdot(vec, sum_r @ vec).real)
    marg_l = float(np.vdot(vec, sum_l @ vec).real)
    return joint, marg_r * marg_l


def greedy_unsharp_search(
    psi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[int, np.ndarray]:
    """Smallest unsharp manifold found by growing spans of reduced-operator
    eigenvectors.  Heuristic and NOT exhaustive: it only examines nested
    spectral spans, so a smaller passing manifold may exist elsewhere."""
    from .core import partial_trace, spectral, state_to_density

    rho = partial_trace(state_to_density(psi), psi.dims, [0], tol)
    _, vectors = spectral(rho, tol)
    d = psi.dims[0]
    for rank in range(1, d + 1):
        kept = vectors[:, :rank]
        candidate = kept @ kept.conj().T
        holds, _ = unsharp_property(psi, candidate, tol)
        if holds:
            return rank, candidate
    return d, np.eye(d, dtype=complex)
