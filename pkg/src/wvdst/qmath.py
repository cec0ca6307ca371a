"""Small dense complex linear algebra and random-state helpers.

States are plain numpy arrays: a pure state is a 1-D complex vector, a density
matrix is a 2-D complex array, and an orthonormal basis is a 2-D array whose
*rows* are the basis vectors.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def dagger(m: ComplexArray) -> ComplexArray:
    """Conjugate transpose."""
    return np.conjugate(np.asarray(m)).T


def frobenius_dist2(a: ComplexArray, b: ComplexArray) -> float:
    """Squared Hilbert-Schmidt distance ``sum |a_ij - b_ij|^2``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sum(diff.real**2 + diff.imag**2))


def ket(index: int, dim: int) -> ComplexArray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v: ComplexArray) -> ComplexArray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def normalize(v: ComplexArray) -> ComplexArray:
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return v / norm


def is_hermitian(m: ComplexArray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def as_pure_state(v: ComplexArray, tol: float = NORM_TOL) -> ComplexArray:
    """Validate a unit-norm state vector and return it as a complex array."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("a pure state must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("state has non-finite amplitudes")
    if abs(np.vdot(v, v).real - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm^2 = {np.vdot(v, v).real!r})")
    return v


def as_density_matrix(rho: ComplexArray) -> ComplexArray:
    """Validate Hermiticity, unit trace and positivity of ``rho``.

    A 1-D input is treated as a pure state and turned into its projector.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return projector(as_pure_state(rho))
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("a density matrix must be square")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > NORM_TOL:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def _real_divide(z, r: float):
    z = np.asarray(z, dtype=complex)
    return (z.real / r) + 1j * (z.imag / r)


def eig_hermitian_2x2(h: ComplexArray) -> tuple[NDArray[np.float64], ComplexArray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues sorted descending and
    ``vectors[k]`` the normalized eigenvector belonging to ``eigenvalues[k]``.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if not is_hermitian(h):
        raise ValueError("matrix is not Hermitian")
    # work on h / max|h_ij| so tiny (subnormal) entries do not underflow
    scale = float(np.abs(h).max())
    if scale == 0.0:
        return np.zeros(2), np.eye(2, dtype=complex)
    a = h[0, 0].real / scale
    c = h[1, 1].real / scale
    b = complex(_real_divide(h[0, 1], scale))
    mean = 0.5 * (a + c)
    radius = np.hypot(0.5 * (a - c), abs(b))
    lam = np.array([mean + radius, mean - radius])
    if radius == 0.0:
        return lam * scale, np.eye(2, dtype=complex)
    # two candidate null vectors of (h - lam_+); take the better conditioned one
    # (split real/imag: numpy complex division misbehaves for subnormal divisors)
    u = _real_divide(np.array([b, lam[0] - a]), radius)
    w = _real_divide(np.array([lam[0] - c, np.conj(b)]), radius)
    v = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
    v = _real_divide(v, float(np.linalg.norm(v)))
    vectors = np.array([v, [-np.conj(v[1]), np.conj(v[0])]])
    return lam * scale, vectors


def haar_random_pure(dim: int, rng: np.random.Generator) -> ComplexArray:
    """Haar-uniform pure state from normalized i.i.d. complex Gaussians."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> ComplexArray:
    """Random full- or fixed-rank density matrix (Ginibre construction)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho).real


def task_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for the task identified by ``key``.

    Streams depend only on ``(master_seed, key)``, never on scheduling order.
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
