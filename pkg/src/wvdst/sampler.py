"""Finite-statistics simulation of the weak-measurement experiment.

A single task measures one system projector with one deformed pointer
observable: each copy yields a postselection outcome ``j`` and a pointer
eigenvalue index ``s``. Tallies of ``(j, s)`` give empirical estimates of the
products ``P_j W_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .coupling import check_coupling, deformed_sigma_x, deformed_sigma_y, pointer_blocks
from .qmath import ComplexArray, eig_hermitian_2x2, is_hermitian

CLAMP_TOL = 1e-14


@dataclass(frozen=True)
class JointDistribution:
    """``probabilities[j, s]`` for postselection ``j`` and pointer eigenvalue ``s``."""

    probabilities: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return self.probabilities.shape[0]


@dataclass(frozen=True)
class OutcomeTally:
    """Counts ``c(j, s)``.

    Counts are integers for sampled data; the exact-statistics substitute
    stores expected (real) counts ``M p(j, s)`` instead.
    """

    counts: NDArray
    total: int


@dataclass(frozen=True)
class WeakValueTable:
    pw: ComplexArray
    samples_per_observable: int

    @property
    def dim(self) -> int:
        return self.pw.size


def joint_distribution(
    rho_s: ComplexArray,
    a: ComplexArray,
    g: float,
    post_basis: ComplexArray,
    pointer_obs: ComplexArray,
) -> JointDistribution:
    g = check_coupling(g)
    if not is_hermitian(pointer_obs) or np.shape(pointer_obs) != (2, 2):
        raise ValueError("pointer observable must be a 2x2 Hermitian matrix")
    eigenvalues, vectors = eig_hermitian_2x2(pointer_obs)
    blocks = pointer_blocks(np.asarray(rho_s, dtype=complex), np.asarray(a, dtype=complex), g, post_basis)
    # p[j, s] = <e_s| block_j |e_s>
    p = np.einsum("sk,jkl,sl->js", vectors.conj(), blocks, vectors).real
    if p.min() < -CLAMP_TOL:
        raise ValueError(f"joint distribution has negative entry {p.min()!r}")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    return JointDistribution(p, eigenvalues)


def sample_tally(dist: JointDistribution, M: int, rng: np.random.Generator) -> OutcomeTally:
    """Draw ``M`` i.i.d. outcomes from ``dist`` and count them."""
    if M < 0:
        raise ValueError("number of samples must be non-negative")
    flat = dist.probabilities.ravel()
    counts = rng.multinomial(M, flat) if M else np.zeros(flat.size, dtype=np.int64)
    return OutcomeTally(counts.reshape(dist.probabilities.shape), int(M))


def expected_tally(dist: JointDistribution, M: int) -> OutcomeTally:
    """Noise-free stand-in for :func:`sample_tally`."""
    return OutcomeTally(dist.probabilities * M, int(M))


def estimate_pw(
    tally_y: OutcomeTally,
    tally_x: OutcomeTally,
    eigenvalues_y: NDArray[np.float64],
    eigenvalues_x: NDArray[np.float64],
    g: float,
) -> WeakValueTable:
    """Estimate ``P_j W_j = (-<sigma_y'>_j + i <sigma_x'>_j) / 2g`` for every ``j``."""
    if tally_y.total <= 0 or tally_x.total <= 0:
        raise ValueError("cannot estimate weak values from an empty tally")
    s_y = tally_y.counts @ np.asarray(eigenvalues_y) / tally_y.total
    s_x = tally_x.counts @ np.asarray(eigenvalues_x) / tally_x.total
    return WeakValueTable((-s_y + 1j * s_x) / (2 * g), min(tally_y.total, tally_x.total))


class Simulator:
    """Sample source for an unknown state ``rho_s``.

    ``weak_values`` runs the two pointer-observable tasks for one system
    projector. Passing ``rng=None`` substitutes exact probabilities for
    sampled frequencies.
    """

    def __init__(self, rho_s: ComplexArray):
        rho_s = np.asarray(rho_s, dtype=complex)
        if rho_s.ndim == 1:
            rho_s = np.outer(rho_s, rho_s.conj())
        self.rho_s = rho_s
        self.dim = rho_s.shape[0]
        self._cache: dict[bytes, tuple[JointDistribution, JointDistribution]] = {}

    def distributions(self, a: ComplexArray, g: float, post_basis: ComplexArray) -> tuple[JointDistribution, JointDistribution]:
        a = np.asarray(a, dtype=complex)
        post_basis = np.asarray(post_basis, dtype=complex)
        key = a.tobytes() + np.float64(g).tobytes() + post_basis.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            hit = (
                joint_distribution(self.rho_s, a, g, post_basis, deformed_sigma_y(g)),
                joint_distribution(self.rho_s, a, g, post_basis, deformed_sigma_x(g)),
            )
            if len(self._cache) < 256:
                self._cache[key] = hit
        return hit

    def weak_values(
        self,
        a: ComplexArray,
        g: float,
        post_basis: ComplexArray,
        shots: int,
        rng: np.random.Generator | None,
    ) -> WeakValueTable:
        dist_y, dist_x = self.distributions(a, g, post_basis)
        if rng is None:
            tally_y, tally_x = expected_tally(dist_y, shots), expected_tally(dist_x, shots)
        else:
            tally_y, tally_x = sample_tally(dist_y, shots, rng), sample_tally(dist_x, shots, rng)
        return estimate_pw(tally_y, tally_x, dist_y.eigenvalues, dist_x.eigenvalues, g)
