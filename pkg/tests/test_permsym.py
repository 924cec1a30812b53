"""Permutation projectors, Slater builders, and normalized products."""

from __future__ import annotations

import math
from itertools import combinations, permutations

import numpy as np
import pytest

from conftest import random_sector_state, random_unitary, random_vector
from entprop.core import InvalidInputError, Sector, pure_state
from entprop.permsym import (
    MAX_SLOTS,
    permutations_with_parity,
    project_sector,
    slater_state,
    sym_product,
)


def _perm_parity(perm) -> int:
    p = list(perm)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def test_heap_enumeration_covers_group_with_parity():
    for n in range(1, 6):
        seen = {}
        for perm, sign in permutations_with_parity(n):
            assert perm not in seen
            seen[perm] = sign
            assert sign == _perm_parity(perm)
        assert len(seen) == math.factorial(n)


def test_slot_cap():
    with pytest.raises(InvalidInputError):
        list(permutations_with_parity(MAX_SLOTS + 1))


def test_antisymmetrize_basis_product():
    amps = np.zeros((2, 2), dtype=complex)
    amps[0, 1] = 1.0
    out = project_sector(amps, Sector.FERMIONIC)
    assert out.amps[0, 1] == pytest.approx(0.5)
    assert out.amps[1, 0] == pytest.approx(-0.5)
    assert out.squared_norm == pytest.approx(0.5)
    assert not out.is_zero


def test_antisymmetrize_repeated_index_is_zero():
    amps = np.zeros((2, 2), dtype=complex)
    amps[0, 0] = 1.0
    out = project_sector(amps, Sector.FERMIONIC)
    assert out.is_zero
    with pytest.raises(InvalidInputError):
        out.state()


def test_projector_fixed_point():
    rng = np.random.default_rng(2)
    psi = random_sector_state(rng, 3, 3, Sector.FERMIONIC)
    out = project_sector(psi.amps, Sector.FERMIONIC)
    assert np.allclose(out.amps, psi.amps, atol=1e-12)


def test_projector_law_on_random_tensors():
    rng = np.random.default_rng(3)
    for kind in (Sector.FERMIONIC, Sector.BOSONIC):
        raw = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
        once = project_sector(raw, kind).amps
        twice = project_sector(once, kind).amps
        assert np.allclose(once, twice, atol=1e-12)


def test_projection_kills_opposite_symmetry_component():
    rng = np.random.default_rng(4)
    raw = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    anti = project_sector(raw, Sector.FERMIONIC).amps
    # symmetrizing an antisymmetric tensor annihilates it, and vice versa
    assert np.allclose(anti + np.swapaxes(anti, 0, 1), 0.0, atol=1e-12)
    sym = project_sector(raw, Sector.BOSONIC).amps
    assert np.allclose(sym - np.swapaxes(sym, 0, 1), 0.0, atol=1e-12)


def test_slater_two_orbitals():
    e = np.eye(2, dtype=complex)
    psi = slater_state([e[:, 0], e[:, 1]])
    assert psi.sector is Sector.FERMIONIC
    assert psi.amps[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert psi.amps[1, 0] == pytest.approx(-1 / math.sqrt(2))


def test_slater_three_orbitals():
    e = np.eye(3, dtype=complex)
    psi = slater_state([e[:, 0], e[:, 1], e[:, 2]])
    nonzero = np.abs(psi.vector) > 1e-12
    assert int(np.sum(nonzero)) == 6
    assert np.allclose(np.abs(psi.vector[nonzero]), 1 / math.sqrt(6), atol=1e-12)
    assert np.vdot(psi.vector, psi.vector).real == pytest.approx(1.0)


def test_slater_rejects_dependent_orbitals():
    e = np.eye(3, dtype=complex)
    with pytest.raises(InvalidInputError):
        slater_state([e[:, 0], e[:, 0]])


def test_slater_invariant_under_orbital_remixing():
    rng = np.random.default_rng(7)
    u = random_unitary(rng, 5)
    orbitals = [u[:, 0], u[:, 1], u[:, 2]]
    mix = random_unitary(rng, 3)
    remixed = [sum(mix[i, j] * orbitals[i] for i in range(3)) for j in range(3)]
    a = slater_state(orbitals)
    b = slater_state(remixed)
    assert a.fidelity(b) == pytest.approx(1.0, abs=1e-10)


def test_sym_product_matches_slater():
    e = np.eye(3, dtype=complex)
    gamma = slater_state([e[:, 0], e[:, 1]])
    lam = pure_state(e[:, 2], Sector.FERMIONIC)
    out = sym_product(gamma, lam)
    assert not out.renormalized
    assert out.norm == pytest.approx(1.0, abs=1e-12)
    assert out.state.fidelity(slater_state([e[:, 0], e[:, 1], e[:, 2]])) == pytest.approx(1.0)


def test_pre_binomial_norm_identity():
    # ||P_A[gamma x lambda]||^2 = K! M! / N! for one-particle orthogonal factors
    e = np.eye(3, dtype=complex)
    gamma = slater_state([e[:, 0], e[:, 1]])
    lam = pure_state(e[:, 2], Sector.FERMIONIC)
    joint = np.multiply.outer(gamma.amps, lam.amps)
    projected = project_sector(joint, Sector.FERMIONIC)
    assert projected.squared_norm == pytest.approx(
        math.factorial(2) * math.factorial(1) / math.factorial(3), rel=1e-12
    )


def test_sym_product_identical_bosons():
    e = np.eye(2, dtype=complex)
    gamma = pure_state(e[:, 0], Sector.BOSONIC)
    out = sym_product(gamma, gamma, Sector.BOSONIC)
    assert out.renormalized  # binomial-scaled norm is sqrt(2), not 1
    assert out.state.amps[0, 0] == pytest.approx(1.0)


def test_sym_product_dimension_mismatch():
    a = pure_state(np.ones(2), Sector.BOSONIC)
    b = pure_state(np.ones(3), Sector.BOSONIC)
    with pytest.raises(InvalidInputError):
        sym_product(a, b, Sector.BOSONIC)


def test_laplace_block_expansion():
    # A over N slots equals the signed sum over block exchanges applied to
    # (A_M x A_K), checked on basis products for N <= 4
    rng = np.random.default_rng(9)
    for n, m in [(3, 1), (3, 2), (4, 2)]:
        k = n - m
        d = n
        raw = rng.normal(size=(d,) * n) + 1j * rng.normal(size=(d,) * n)
        full = project_sector(raw, Sector.FERMIONIC).amps * math.factorial(n)

        blockwise = np.zeros_like(raw)
        for left in permutations(range(m)):
            for right in permutations(range(m, n)):
                perm = tuple(left) + tuple(right)
                blockwise += _perm_parity(perm) * np.transpose(raw, perm)
        total = np.zeros_like(raw)
        for subset in combinations(range(n), m):
            rest = [i for i in range(n) if i not in subset]
            coset = tuple(subset) + tuple(rest)
            # positions of the block outputs inside the full slot list
            inverse = np.argsort(coset)
            total += _perm_parity(coset) * np.transpose(blockwise, inverse)
        assert np.allclose(total, full, atol=1e-10)
