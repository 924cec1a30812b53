"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the code paths they check: the
decomposability test for fermion pairs works through quadratic coefficient
identities instead of spectra, and the bin-measurement oracle counts
classical assignments instead of applying projectors.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from entprop.core import PureState, Sector, pure_state
from entprop.permsym import project_sector


def random_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_state(rng: np.random.Generator, dims) -> PureState:
    amps = rng.normal(size=tuple(dims)) + 1j * rng.normal(size=tuple(dims))
    return pure_state(amps)


def random_product_state(rng: np.random.Generator, dims) -> PureState:
    amps = random_vector(rng, dims[0])
    for d in dims[1:]:
        amps = np.multiply.outer(amps, random_vector(rng, d))
    return pure_state(amps)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_sector_state(rng: np.random.Generator, d: int, n: int, kind: Sector) -> PureState:
    """Random normalized state of the requested exchange sector."""
    for _ in range(50):
        raw = rng.normal(size=(d,) * n) + 1j * rng.normal(size=(d,) * n)
        projected = project_sector(raw, kind)
        if not projected.is_zero:
            return projected.state()
    raise RuntimeError("failed to draw a nonzero sector state")


def random_hermitian(rng: np.random.Generator, d: int, bounded: bool = False) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (z + z.conj().T) / 2.0
    if bounded:
        top = float(np.max(np.abs(np.linalg.eigvalsh(h))))
        h = h / max(top, 1.0)
    return h


def embed_in_subspace(state: PureState, basis: np.ndarray) -> PureState:
    """Map a state over a small space into the span of `basis` columns."""
    amps = state.amps
    for _ in range(state.n_slots):
        amps = np.moveaxis(np.tensordot(basis, amps, axes=([1], [0])), 0, state.n_slots - 1)
    return PureState((basis.shape[0],) * state.n_slots, amps, state.sector)


# -- worked example states ----------------------------------------------------


def spin_space_state(spin_amps: np.ndarray, space_amps: np.ndarray, d_space: int) -> PureState:
    """Two particles with internal (2) x spatial (d_space) structure:
    amps[(s1 x1), (s2 x2)] = spin[s1, s2] * space[x1, x2]."""
    joint = np.einsum("ab,xy->axby", spin_amps, space_amps)
    d = 2 * d_space
    return pure_state(joint.reshape(d, d))


def example_one_state(d_space: int = 4) -> PureState:
    """Spin singlet with the particles in disjoint spatial supports R, L."""
    singlet = np.zeros((2, 2), dtype=complex)
    singlet[0, 1] = 1.0 / math.sqrt(2.0)
    singlet[1, 0] = -1.0 / math.sqrt(2.0)
    space = np.zeros((d_space, d_space), dtype=complex)
    space[0, 1] = 1.0  # |R>_1 |L>_2
    return spin_space_state(singlet, space, d_space)


def example_two_state(d_space: int = 4) -> PureState:
    """Spin singlet times a full-Schmidt-rank spatial factor (all c_i != 0)."""
    singlet = np.zeros((2, 2), dtype=complex)
    singlet[0, 1] = 1.0 / math.sqrt(2.0)
    singlet[1, 0] = -1.0 / math.sqrt(2.0)
    c = np.arange(1, d_space + 1, dtype=float)
    c = c / np.linalg.norm(c)
    space = np.diag(c).astype(complex)
    return spin_space_state(singlet, space, d_space)


def ghz_amps() -> np.ndarray:
    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[0, 0, 0] = amps[1, 1, 1] = 1.0 / math.sqrt(2.0)
    return amps


def symmetrized_pair(
    phi: np.ndarray, chi: np.ndarray, kind: Sector
) -> PureState:
    """Normalized (anti)symmetrization of phi x chi."""
    joint = np.multiply.outer(phi, chi)
    return project_sector(joint, kind).state()


# -- independent oracles -------------------------------------------------------


def plucker_non_entangled(amps: np.ndarray, tol: float = 1e-9) -> bool:
    """Decomposability of an antisymmetric two-slot coefficient tensor via
    the quadratic coefficient identities
    a_ij a_kl - a_ik a_jl + a_il a_jk = 0 for all i<j<k<l.
    No spectral computation is involved."""
    d = amps.shape[0]
    scale = float(np.max(np.abs(amps))) ** 2
    for i, j, k, l in combinations(range(d), 4):
        value = amps[i, j] * amps[k, l] - amps[i, k] * amps[j, l] + amps[i, l] * amps[j, k]
        if abs(value) > tol * max(scale, 1e-300):
            return False
    return True


def classical_bins_oracle(d: int, delta1, delta2) -> tuple[float, float]:
    """Exhaustive count over ordered uniform assignments of two
    indistinguishable classical particles to d bins.

    Returns (conditional, unconditional): the probability that the other
    particle sits in delta1 given exactly one was found in delta2, and the
    probability of exactly one particle in delta1 with no prior
    measurement."""
    in1 = np.zeros(d, dtype=bool)
    in1[list(delta1)] = True
    in2 = np.zeros(d, dtype=bool)
    in2[list(delta2)] = True
    i = np.repeat(np.arange(d), d)
    j = np.tile(np.arange(d), d)
    exactly_one_d2 = np.sum(in2[i] != in2[j])
    one_each = np.sum((in2[i] & in1[j]) | (in2[j] & in1[i]))
    exactly_one_d1 = np.sum(in1[i] != in1[j])
    return float(one_each) / float(exactly_one_d2), float(exactly_one_d1) / float(d * d)
