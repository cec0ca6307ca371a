"""Measurement and postselection bases.

Every basis is a ``(d, d)`` complex array with one basis vector per row.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .qmath import ComplexArray, as_pure_state

ORTHO_TOL = 1e-10
_RESIDUAL_CUTOFF = 1e-8


class MubPair(NamedTuple):
    """Measured-projector basis ``{|a_n>}`` and postselection basis ``{|psi_j>}``."""

    basis_a: ComplexArray
    basis_psi: ComplexArray

    def overlaps(self) -> ComplexArray:
        """Matrix ``O[j, n] = <psi_j|a_n>``."""
        return self.basis_psi.conj() @ self.basis_a.T


class UnsupportedDimensionError(ValueError):
    pass


def check_orthonormal(basis: ComplexArray, tol: float = ORTHO_TOL) -> ComplexArray:
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise ValueError("basis must be a square array of row vectors")
    gram = basis.conj() @ basis.T
    if np.max(np.abs(gram - np.eye(basis.shape[0]))) > tol:
        raise ValueError("basis vectors are not orthonormal")
    return basis


def fourier_mub(dim: int) -> MubPair:
    """Computational basis paired with its discrete Fourier partner.

    The postselection vectors satisfy ``<psi_j|a_n> = exp(2 pi i j n / d) / sqrt(d)``.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    jn = np.outer(np.arange(dim), np.arange(dim))
    # rows hold the amplitudes <a_n|psi_j>, the conjugate of the stated overlap
    psi = np.exp(-2j * np.pi * jn / dim) / np.sqrt(dim)
    return MubPair(np.eye(dim, dtype=complex), psi)


def gram_schmidt_extend(v: ComplexArray) -> ComplexArray:
    """Complete ``v`` to an orthonormal basis whose first row is ``v`` itself.

    Remaining directions are seeded from computational basis vectors in order,
    skipping candidates that are (nearly) in the span already built.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or not np.any(v):
        raise ValueError("cannot extend a zero vector")
    v = as_pure_state(v)
    dim = v.size
    rows = [v]
    for k in range(dim):
        if len(rows) == dim:
            break
        w = np.zeros(dim, dtype=complex)
        w[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to roundoff
            for r in rows:
                w = w - np.vdot(r, w) * r
        norm = np.linalg.norm(w)
        if norm < _RESIDUAL_CUTOFF:
            continue
        rows.append(w / norm)
    return np.array(rows)


def probe_state(basis: ComplexArray) -> ComplexArray:
    """Uniform superposition of all vectors of ``basis``."""
    basis = check_orthonormal(basis)
    return basis.sum(axis=0) / np.sqrt(basis.shape[0])


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


def complete_mub_set(dim: int) -> list[ComplexArray]:
    """The ``d + 1`` mutually unbiased bases for prime ``d``.

    Computational basis plus the quadratic-phase (Wootters-Fields) bases
    ``|v_b^{(a)}>_k = w^{a k^2 + b k} / sqrt(d)``; for ``d = 2`` the phase
    ``i^{a k^2} (-1)^{b k}`` is used instead.
    """
    if not _is_prime(dim):
        raise UnsupportedDimensionError(f"complete MUB sets are only built for prime dimensions, got {dim}")
    k = np.arange(dim)
    bases = [np.eye(dim, dtype=complex)]
    for a in range(dim):
        rows = []
        for b in range(dim):
            if dim == 2:
                phase = np.exp(1j * np.pi * (a * k**2 + 2 * b * k) / 2)
            else:
                phase = np.exp(2j * np.pi * ((a * k**2 + b * k) % dim) / dim)
            rows.append(phase / np.sqrt(dim))
        bases.append(np.array(rows))
    return bases
