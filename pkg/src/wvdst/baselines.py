"""Conventional tomography reference points.

Analytic scaled MSEs for MUB and SIC tomography of pure states, plus a Monte
Carlo linear-inversion MUB tomography for prime dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import complete_mub_set
from .metrics import aggregate, mse_exact
from .qmath import ComplexArray, haar_random_pure, projector


@dataclass(frozen=True)
class BaselineResult:
    d: int
    strategy: str  # "mub-analytic" | "sic-analytic" | "mub-simulated"
    scaled_mse: float
    stderr: float = 0.0
    reps: int = 0


def mub_scaled_mse(d: int) -> float:
    if d < 2:
        raise ValueError("d must be >= 2")
    return float(d * d - 1)


def sic_scaled_mse(d: int) -> float:
    if d < 2:
        raise ValueError("d must be >= 2")
    return float(d * d + d - 2)


def mub_linear_inversion(
    rho: ComplexArray,
    N: int,
    bases: list[ComplexArray],
    rng: np.random.Generator,
) -> ComplexArray:
    """One linear-inversion estimate ``sum_{b,k} f_bk |v_bk><v_bk| - I``.

    Each of the ``d + 1`` bases receives ``N // (d + 1)`` copies.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = projector(rho)
    d = rho.shape[0]
    shots = N // (d + 1)
    if shots < 1:
        raise ValueError(f"need at least d+1 = {d + 1} copies")
    est = -np.eye(d, dtype=complex)
    for basis in bases:
        p = np.einsum("kl,lm,km->k", basis.conj(), rho, basis).real
        p = np.clip(p, 0.0, None)
        freqs = rng.multinomial(shots, p / p.sum()) / shots
        est += (basis.T * freqs) @ basis.conj()
    return est


def mub_tomography_sim(
    phi_s: ComplexArray | None,
    N: int,
    d: int,
    reps: int,
    rng: np.random.Generator,
) -> BaselineResult:
    """Mean scaled error ``N * E||rho_hat - rho||^2`` of MUB linear inversion.

    With ``phi_s=None`` a fresh Haar-random pure state is drawn per repetition.
    """
    bases = complete_mub_set(d)
    errors = []
    for _ in range(reps):
        phi = haar_random_pure(d, rng) if phi_s is None else np.asarray(phi_s, dtype=complex)
        est = mub_linear_inversion(phi, N, bases, rng)
        errors.append(mse_exact(est, phi))
    report = aggregate(errors, N)
    return BaselineResult(d, "mub-simulated", report.scaled, report.stderr * N, reps)
