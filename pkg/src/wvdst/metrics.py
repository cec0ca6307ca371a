"""Error functionals used to score reconstructions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import ComplexArray, frobenius_dist2, projector


@dataclass(frozen=True)
class MseReport:
    mean: float
    stderr: float
    reps: int
    N: int

    @property
    def scaled(self) -> float:
        return self.mean * self.N


def _as_matrix(x: ComplexArray) -> ComplexArray:
    x = np.asarray(x, dtype=complex)
    return projector(x) if x.ndim == 1 else x


def mse_exact(estimate: ComplexArray, truth: ComplexArray) -> float:
    """Squared Hilbert-Schmidt distance; state vectors are promoted to projectors."""
    est = _as_matrix(estimate)
    tru = _as_matrix(truth)
    if est.shape != tru.shape:
        raise ValueError(f"dimension mismatch: {est.shape} vs {tru.shape}")
    return frobenius_dist2(est, tru)


def mse_paper_approx(estimate: ComplexArray, truth: ComplexArray) -> float:
    """``tr(est^dagger est) - tr(truth^2)``. Diagnostic only: zero for any pure pair, may be negative."""
    est = _as_matrix(estimate)
    tru = _as_matrix(truth)
    if est.shape != tru.shape:
        raise ValueError(f"dimension mismatch: {est.shape} vs {tru.shape}")
    return float(np.trace(est.conj().T @ est).real - np.trace(tru @ tru).real)


def fidelity(phi: ComplexArray, psi: ComplexArray) -> float:
    """``|<phi|psi>|^2`` for normalized state vectors."""
    return float(abs(np.vdot(phi, psi)) ** 2)


def aggregate(values: Sequence[float], N: int) -> MseReport:
    """Mean, standard error of the mean, and the copy budget used for scaling."""
    values = [float(v) for v in values]
    n = len(values)
    if n == 0:
        raise ValueError("cannot aggregate an empty list")
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return MseReport(mean, stderr, n, int(N))
