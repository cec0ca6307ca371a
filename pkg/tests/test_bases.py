import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wvdst.bases import (
    UnsupportedDimensionError,
    complete_mub_set,
    fourier_mub,
    gram_schmidt_extend,
    probe_state,
)
from wvdst.qmath import SIGMA_X, SIGMA_Y, SIGMA_Z, eig_hermitian_2x2, haar_random_pure, ket, task_rng


def test_fourier_qubit_postselection():
    mub = fourier_mub(2)
    s = 1 / np.sqrt(2)
    assert np.allclose(mub.basis_psi, [[s, s], [s, -s]], atol=1e-15)
    assert np.array_equal(mub.basis_a, np.eye(2))


@pytest.mark.parametrize("d", [2, 3, 4, 7, 12])
def test_fourier_unbiased(d):
    o = fourier_mub(d).overlaps()
    assert np.allclose(np.abs(o), 1 / np.sqrt(d), atol=1e-10)


def test_fourier_phase_convention():
    o = fourier_mub(4).overlaps()
    assert o[1, 2] == pytest.approx(-0.5, abs=1e-15)
    d = 5
    o = fourier_mub(d).overlaps()
    j, n = 2, 3
    assert o[j, n] == pytest.approx(np.exp(2j * np.pi * j * n / d) / np.sqrt(d), abs=1e-15)


def test_fourier_rejects_small_dim():
    with pytest.raises(ValueError):
        fourier_mub(1)


def test_gram_schmidt_examples():
    basis = gram_schmidt_extend(ket(0, 2))
    assert np.array_equal(basis[0], ket(0, 2))
    assert abs(abs(basis[1][1]) - 1) < 1e-15 and abs(basis[1][0]) < 1e-15
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    basis = gram_schmidt_extend(plus)
    assert abs(np.vdot(plus, basis[1])) < 1e-10


def test_gram_schmidt_rejects_zero():
    with pytest.raises(ValueError):
        gram_schmidt_extend(np.zeros(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_gram_schmidt_properties(d, seed):
    v = haar_random_pure(d, task_rng(seed))
    basis = gram_schmidt_extend(v)
    assert np.array_equal(basis[0], v)
    assert np.allclose(basis.conj() @ basis.T, np.eye(d), atol=1e-10)
    a = probe_state(basis)
    assert np.allclose(np.abs(basis.conj() @ a) ** 2, 1 / d, atol=1e-12)
    assert abs(np.linalg.norm(a) - 1) < 1e-12


def test_gram_schmidt_near_computational_vector():
    v = np.array([1, 1e-12, 0], dtype=complex)
    v /= np.linalg.norm(v)
    basis = gram_schmidt_extend(v)
    assert np.allclose(basis.conj() @ basis.T, np.eye(3), atol=1e-10)


def test_probe_examples():
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    assert np.allclose(probe_state(np.eye(2)), plus)
    psi = fourier_mub(3).basis_psi
    assert np.vdot(psi[0], probe_state(psi)) == pytest.approx(1 / np.sqrt(3), abs=1e-15)


def _same_basis_up_to_phase(b1, b2):
    m = np.abs(b1.conj() @ b2.T)
    return np.allclose(np.sort(m.max(axis=1)), 1, atol=1e-12)


def test_qubit_mubs_are_pauli_eigenbases():
    bases = complete_mub_set(2)
    assert len(bases) == 3
    paulis = [eig_hermitian_2x2(p)[1] for p in (SIGMA_Z, SIGMA_X, SIGMA_Y)]
    for pauli in paulis:
        assert sum(_same_basis_up_to_phase(pauli, b) for b in bases) == 1


def test_qutrit_mubs_all_overlaps():
    bases = complete_mub_set(3)
    assert len(bases) == 4
    overlaps = [
        abs(np.vdot(u, v))
        for b1, b2 in itertools.permutations(bases, 2)  # ordered pairs
        for u in b1
        for v in b2
    ]
    assert len(overlaps) == 108
    assert np.allclose(overlaps, 1 / np.sqrt(3), atol=1e-10)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_complete_mub_set_pairwise_unbiased(p):
    bases = complete_mub_set(p)
    assert len(bases) == p + 1
    for b in bases:
        assert np.allclose(b.conj() @ b.T, np.eye(p), atol=1e-10)
    for b1, b2 in itertools.combinations(bases, 2):
        assert np.allclose(np.abs(b1.conj() @ b2.T), 1 / np.sqrt(p), atol=1e-10)


@pytest.mark.parametrize("d", [1, 4, 6, 9, 15])
def test_complete_mub_set_non_prime(d):
    with pytest.raises(UnsupportedDimensionError):
        complete_mub_set(d)
