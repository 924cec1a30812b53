"""Schmidt decomposition, the three-condition test, classification,
correlations, and grouped/complete factorizations."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import (
    example_one_state,
    example_two_state,
    ghz_amps,
    random_hermitian,
    random_product_state,
    random_state,
    random_unitary,
    random_vector,
)
from entprop.core import (
    InvalidInputError,
    Sector,
    basis_vector,
    partial_trace,
    pure_state,
    spectral,
    state_to_density,
    tensor_product,
)
from entprop.distinguishable import (
    EntanglementKind,
    classify,
    completely_non_entangled,
    correlation_test,
    is_non_entangled,
    property_manifold,
    schmidt_decompose,
    singlet_state,
    split_non_entangled,
)


def test_schmidt_singlet():
    dec = schmidt_decompose(singlet_state(), [0])
    assert dec.rank == 2
    assert np.allclose(dec.coeffs, [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_schmidt_product_rank_one():
    rng = np.random.default_rng(2)
    dec = schmidt_decompose(random_product_state(rng, (3, 5)), [0])
    assert dec.rank == 1
    assert dec.coeffs[0] == pytest.approx(1.0)


def test_schmidt_round_trip_prescribed_coeffs():
    rng = np.random.default_rng(8)
    u = random_unitary(rng, 4)
    v = random_unitary(rng, 5)
    amps = 0.8 * np.multiply.outer(u[:, 0], v[:, 0]) + 0.6 * np.multiply.outer(u[:, 1], v[:, 1])
    dec = schmidt_decompose(pure_state(amps), [0])
    assert np.allclose(dec.coeffs, [0.8, 0.6], atol=1e-12)


def test_schmidt_invariants_random():
    rng = np.random.default_rng(13)
    for dims, cut in [((3, 4), [0]), ((2, 3, 4), [0, 2]), ((4, 5), [1])]:
        psi = random_state(rng, dims)
        dec = schmidt_decompose(psi, cut)
        assert np.sum(dec.coeffs**2) == pytest.approx(1.0, abs=1e-10)
        gram_l = dec.left_vectors.conj().T @ dec.left_vectors
        gram_r = dec.right_vectors.conj().T @ dec.right_vectors
        assert np.allclose(gram_l, np.eye(dec.rank), atol=1e-10)
        assert np.allclose(gram_r, np.eye(dec.rank), atol=1e-10)
        # coefficients match the reduced spectra on both sides
        rho = state_to_density(psi)
        for keep in (cut, [i for i in range(len(dims)) if i not in cut]):
            w, _ = spectral(partial_trace(rho, dims, keep))
            assert np.allclose(np.sort(w)[::-1][: dec.rank], dec.coeffs**2, atol=1e-10)


def test_three_conditions_product_and_singlet():
    rng = np.random.default_rng(3)
    product = random_product_state(rng, (4, 4))
    report = is_non_entangled(product, [0])
    assert report.verdict and all(report.conditions)
    report = is_non_entangled(singlet_state(), [0])
    assert not report.verdict and not any(report.conditions)
    assert report.witness_trace == pytest.approx(0.5, abs=1e-12)


def test_three_conditions_single_term_decomposition():
    # biorthonormal expansion with one weight equal to 1 collapses to a product
    rng = np.random.default_rng(4)
    u = random_unitary(rng, 3)
    v = random_unitary(rng, 3)
    amps = np.multiply.outer(u[:, 1], v[:, 2])
    assert is_non_entangled(pure_state(amps), [0]).verdict


def test_classify_example_one():
    verdict = classify(example_one_state(4), [0])
    assert verdict.kind is EntanglementKind.PARTIALLY_ENTANGLED
    assert verdict.range_dim == 2
    assert not verdict.maximal


def test_classify_example_two_totally_entangled():
    verdict = classify(example_two_state(4), [0])
    assert verdict.kind is EntanglementKind.TOTALLY_ENTANGLED
    assert verdict.range_dim == 8
    assert not verdict.maximal  # spatial weights are unequal


def test_classify_bell_maximal():
    verdict = classify(singlet_state(), [0])
    assert verdict.kind is EntanglementKind.TOTALLY_ENTANGLED
    assert verdict.maximal and verdict.range_dim == 2


def test_property_manifold_example_one():
    psi = example_one_state(4)
    manifold = property_manifold(psi, [0])
    r_proj = np.zeros((4, 4), dtype=complex)
    r_proj[0, 0] = 1.0
    expected = np.kron(np.eye(2), r_proj)
    assert manifold.rank == 2
    assert np.allclose(manifold.projector, expected, atol=1e-10)
    assert manifold.trace_value == pytest.approx(1.0, abs=1e-10)
    # the spatial-support observable commutes, a spin-x tagged one does not
    assert manifold.certify(np.kron(np.eye(2), r_proj))
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    mixing = np.zeros((4, 4), dtype=complex)
    mixing[0, 1] = mixing[1, 0] = 1.0
    assert not manifold.certify(np.kron(sx, mixing))


def test_property_manifold_totally_entangled_is_identity():
    manifold = property_manifold(singlet_state(), [0])
    assert np.allclose(manifold.projector, np.eye(2), atol=1e-10)


def test_property_manifold_product_rank_one():
    rng = np.random.default_rng(6)
    phi = random_vector(rng, 3)
    psi = tensor_product(phi, random_vector(rng, 3))
    manifold = property_manifold(psi, [0])
    assert manifold.rank == 1
    omega = 2.5 * np.outer(phi, phi.conj())
    assert manifold.certify(omega)


def test_correlation_singlet_outcome_dependence():
    up_proj = np.diag([1.0, 0.0]).astype(complex)
    dn_proj = np.diag([0.0, 1.0]).astype(complex)
    report = correlation_test(singlet_state(), [0], up_proj, dn_proj)
    assert report.joint == pytest.approx(0.5, abs=1e-12)
    assert report.product == pytest.approx(0.25, abs=1e-12)
    assert not report.factorizes


def test_correlation_product_factorizes():
    rng = np.random.default_rng(10)
    psi = random_product_state(rng, (3, 4))
    for _ in range(50):
        a = random_hermitian(rng, 3, bounded=True)
        b = random_hermitian(rng, 4, bounded=True)
        assert correlation_test(psi, [0], a, b).factorizes


def test_correlation_schmidt_witness_values():
    # observables projecting on a Schmidt pair with weight p_r: joint p_r^2,
    # product p_r^4
    rng = np.random.default_rng(12)
    u = random_unitary(rng, 3)
    v = random_unitary(rng, 3)
    amps = 0.8 * np.multiply.outer(u[:, 0], v[:, 0]) + 0.6 * np.multiply.outer(u[:, 1], v[:, 1])
    psi = pure_state(amps)
    a = np.outer(u[:, 0], u[:, 0].conj())
    b = np.outer(v[:, 0], v[:, 0].conj())
    report = correlation_test(psi, [0], a, b)
    assert report.joint == pytest.approx(0.64, abs=1e-10)
    assert report.product == pytest.approx(0.4096, abs=1e-10)


def test_correlation_entangled_always_has_witness():
    rng = np.random.default_rng(14)
    for _ in range(10):
        psi = random_state(rng, (3, 3))
        dec = schmidt_decompose(psi, [0])
        if dec.rank < 2:
            continue
        a = np.outer(dec.left_vectors[:, 0], dec.left_vectors[:, 0].conj())
        b = np.outer(dec.right_vectors[:, 0], dec.right_vectors[:, 0].conj())
        assert not correlation_test(psi, [0], a, b).factorizes


def test_correlation_rejects_non_hermitian():
    bad = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(InvalidInputError):
        correlation_test(singlet_state(), [0], bad, np.eye(2, dtype=complex))


def test_split_product_of_three():
    rng = np.random.default_rng(15)
    psi = random_product_state(rng, (2, 3, 2))
    result = split_non_entangled(psi, 2)
    assert result.separable
    assert result.left_state.dims == (2, 3)
    assert result.right_state.dims == (2,)


def test_split_ghz_fails():
    assert not split_non_entangled(pure_state(ghz_amps()), 1).separable


def test_split_bell_times_product():
    bell = singlet_state()
    rng = np.random.default_rng(16)
    psi = tensor_product(bell, random_vector(rng, 2))
    assert split_non_entangled(psi, 2).separable
    assert not split_non_entangled(psi, 1).separable


def test_completely_non_entangled_product():
    rng = np.random.default_rng(18)
    psi = random_product_state(rng, (2, 3, 2))
    report = completely_non_entangled(psi)
    assert report.complete
    rebuilt = report.factors[0]
    for f in report.factors[1:]:
        rebuilt = np.multiply.outer(rebuilt, f)
    assert abs(np.vdot(rebuilt, psi.amps)) == pytest.approx(1.0, abs=1e-10)


def test_completely_non_entangled_ghz():
    psi = pure_state(ghz_amps())
    assert not completely_non_entangled(psi).complete
    for slot in range(3):
        w, _ = spectral(partial_trace(state_to_density(psi), (2, 2, 2), [slot]))
        assert np.sum(w > 1e-9) == 2


def test_completely_non_entangled_bell_times_product():
    rng = np.random.default_rng(19)
    psi = tensor_product(singlet_state(), random_vector(rng, 2))
    assert not completely_non_entangled(psi).complete
    assert split_non_entangled(psi, 2).separable
    ranks = [
        int(np.sum(spectral(partial_trace(state_to_density(psi), (2, 2, 2), [s]))[0] > 1e-9))
        for s in range(3)
    ]
    assert ranks == [2, 2, 1]


def test_classify_matches_three_condition_verdict():
    rng = np.random.default_rng(21)
    for k in range(40):
        dims = (int(rng.integers(2, 5)), int(rng.integers(2, 5)))
        psi = random_product_state(rng, dims) if k % 2 else random_state(rng, dims)
        verdict = classify(psi, [0])
        report = is_non_entangled(psi, [0])
        assert (verdict.kind is EntanglementKind.NON_ENTANGLED) == report.verdict


def test_cut_validation():
    with pytest.raises(InvalidInputError):
        schmidt_decompose(singlet_state(), [])
    with pytest.raises(InvalidInputError):
        schmidt_decompose(singlet_state(), [0, 1])
