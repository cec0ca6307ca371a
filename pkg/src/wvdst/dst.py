"""Direct state tomography estimators.

* :func:`original_dst` reconstructs the full (non-Hermitian) row estimate of
  ``rho`` by measuring every projector of a basis.
* :func:`revised_dst` reconstructs a pure state from a single projector.
* :func:`hybrid_dst` chains the two: a coarse pure estimate from the original
  scheme fixes a probe for the revised scheme, and the two pure estimates are
  combined with inverse-MSE weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, NamedTuple, Union

import numpy as np

from .bases import MubPair, fourier_mub, gram_schmidt_extend, probe_state
from .metrics import aggregate, mse_exact
from .qmath import ComplexArray, dagger, haar_random_pure, task_rng
from .sampler import Simulator

DENOMINATOR_CUTOFF = 1e-8
PROBE_CUTOFF = 1e-10
ALIGNMENT_CUTOFF = 1e-6
NORM_CUTOFF = 1e-12

RowPolicy = Union[Literal["argmax"], int]
EstimatorKind = Literal["original", "revised"]


class EstimationError(RuntimeError):
    """The data cannot produce an estimate (vanishing trace, norm or denominators)."""


class InvalidProbeError(ValueError):
    pass


def original_dst(
    source: Simulator,
    mub: MubPair,
    g: float,
    budget: int,
    rng: np.random.Generator | None = None,
) -> ComplexArray:
    """Row-by-row estimate ``raw[n, m] ~ <a_n|rho|a_m>``.

    Each projector ``|a_n><a_n|`` gets ``budget // (2d)`` copies per pointer
    observable; leftover copies are discarded.
    """
    d = mub.basis_a.shape[0]
    shots = budget // (2 * d)
    if shots < 1:
        raise ValueError(f"budget {budget} too small for d={d}: need at least {2 * d} copies")
    overlaps = mub.overlaps()  # O[j, n] = <psi_j|a_n>
    raw = np.empty((d, d), dtype=complex)
    for n in range(d):
        pw = source.weak_values(mub.basis_a[n], g, mub.basis_psi, shots, rng).pw
        ratio = overlaps / overlaps[:, [n]]
        raw[n] = pw @ ratio
    return raw


def hermitize_normalize(raw: ComplexArray) -> ComplexArray:
    """``(raw + raw^dagger) / tr(raw + raw^dagger)``; positivity is not enforced."""
    raw = np.asarray(raw, dtype=complex)
    h = raw + dagger(raw)
    tr = np.trace(h).real
    if abs(tr) < 1e-12:
        raise EstimationError("hermitized estimate has vanishing trace")
    return h / tr


def collapse_to_pure(rho_e: ComplexArray, policy: RowPolicy = "argmax") -> ComplexArray:
    """Pure state with amplitudes ``c_m = sum_n rho[m, n] rho[n, n] / rho[r, n]``.

    ``r`` is the reference row: the largest diagonal entry for ``"argmax"``, or
    the given index. Terms whose denominator is below 1e-8 in modulus are
    dropped. Amplitudes are in the basis ``rho_e`` is written in.
    """
    rho_e = np.asarray(rho_e, dtype=complex)
    d = rho_e.shape[0]
    r = int(np.argmax(rho_e.diagonal().real)) if policy == "argmax" else int(policy)
    if not 0 <= r < d:
        raise ValueError(f"reference row {r} out of range for d={d}")
    denom = rho_e[r]
    keep = np.abs(denom) >= DENOMINATOR_CUTOFF
    if not keep.any():
        raise EstimationError(f"every denominator in reference row {r} vanishes")
    weights = rho_e.diagonal()[keep] / denom[keep]
    c = rho_e[:, keep] @ weights
    norm = np.linalg.norm(c)
    if not norm > NORM_CUTOFF or not np.isfinite(norm):
        raise EstimationError("collapsed state has vanishing norm")
    return c / norm


def revised_dst(
    source: Simulator,
    probe: ComplexArray,
    post_basis: ComplexArray,
    g: float,
    budget: int,
    rng: np.random.Generator | None = None,
) -> ComplexArray:
    """Pure-state reconstruction from the single projector ``|probe><probe|``.

    Amplitudes along the postselection vectors are ``conj(pw_j / <psi_j|probe>)``;
    the unknown common factor is removed by normalizing.
    """
    probe = np.asarray(probe, dtype=complex)
    post_basis = np.asarray(post_basis, dtype=complex)
    overlaps = post_basis.conj() @ probe
    if np.min(np.abs(overlaps)) < PROBE_CUTOFF:
        raise InvalidProbeError("probe is orthogonal to a postselection vector")
    shots = budget // 2
    if shots < 1:
        raise ValueError(f"budget {budget} too small: need at least 2 copies")
    pw = source.weak_values(probe, g, post_basis, shots, rng).pw
    c = np.conj(pw / overlaps)
    state = post_basis.T @ c
    norm = np.linalg.norm(state)
    if not norm > NORM_CUTOFF or not np.isfinite(norm):
        raise EstimationError("revised estimate has vanishing norm (probe orthogonal to the state?)")
    return state / norm


@dataclass(frozen=True)
class HybridConfig:
    d: int
    N1: int
    N2: int
    g1: float
    g2: float
    weight_e1: float
    weight_e2: float
    reference_row: RowPolicy = "argmax"

    def __post_init__(self):
        if self.N1 <= 0 or self.N2 <= 0:
            raise ValueError("copy budgets must be positive")
        if not (self.weight_e1 > 0 and self.weight_e2 > 0):
            raise ValueError("calibrated MSE weights must be positive")


class HybridSteps(NamedTuple):
    coarse: ComplexArray
    revised: ComplexArray
    final: ComplexArray


def combine(coarse: ComplexArray, revised: ComplexArray, weight_e1: float, weight_e2: float) -> ComplexArray:
    """Inverse-MSE weighted sum of two pure estimates after phase alignment."""
    overlap = np.vdot(revised, coarse)
    if abs(overlap) < ALIGNMENT_CUTOFF:
        return coarse if weight_e1 <= weight_e2 else revised
    aligned = revised * (overlap / abs(overlap))
    f = coarse / weight_e1 + aligned / weight_e2
    return f / np.linalg.norm(f)


def hybrid_steps(
    source: Simulator,
    config: HybridConfig,
    mub: MubPair,
    rng: np.random.Generator | None = None,
) -> HybridSteps:
    raw = original_dst(source, mub, config.g1, config.N1, rng)
    coarse_in_a = collapse_to_pure(hermitize_normalize(raw), config.reference_row)
    coarse = mub.basis_a.T @ coarse_in_a
    basis = gram_schmidt_extend(coarse)
    revised = revised_dst(source, probe_state(basis), basis, config.g2, config.N2, rng)
    return HybridSteps(coarse, revised, combine(coarse, revised, config.weight_e1, config.weight_e2))


def hybrid_dst(
    source: Simulator,
    config: HybridConfig,
    mub: MubPair,
    rng: np.random.Generator | None = None,
) -> ComplexArray:
    return hybrid_steps(source, config, mub, rng).final


# -- calibration ---------------------------------------------------------------

CALIBRATION_VERSION = 1


@dataclass(frozen=True)
class CalibrationEntry:
    d: int
    g: float
    N: int
    kind: str
    mse: float
    stderr: float
    reps: int


def calibration_error(kind: str, d: int, g: float, N: int, rng: np.random.Generator, reference_row: RowPolicy = "argmax") -> float:
    """MSE of one reconstruction of a Haar-random pure state.

    ``"original"``: original DST, hermitized and collapsed to a pure state.
    ``"revised"``: revised DST with the ideal probe built from the true state.
    """
    phi = haar_random_pure(d, rng)
    source = Simulator(phi)
    if kind == "original":
        mub = fourier_mub(d)
        raw = original_dst(source, mub, g, N, rng)
        est = mub.basis_a.T @ collapse_to_pure(hermitize_normalize(raw), reference_row)
    elif kind == "revised":
        basis = gram_schmidt_extend(phi)
        est = revised_dst(source, probe_state(basis), basis, g, N, rng)
    else:
        raise ValueError(f"unknown estimator kind {kind!r}")
    return mse_exact(est, phi)


def calibrate(
    d: int,
    g: float,
    N: int,
    kind: EstimatorKind,
    reps: int,
    seed: int,
    reference_row: RowPolicy = "argmax",
) -> CalibrationEntry:
    """Monte Carlo estimate of the mean MSE of one hybrid stage."""
    if reps < 100:
        raise ValueError("calibration needs at least 100 repetitions")
    kind_id = {"original": 0, "revised": 1}[kind]
    errors = [
        calibration_error(kind, d, g, N, task_rng(seed, 9, d, N, kind_id, rep), reference_row)
        for rep in range(reps)
    ]
    report = aggregate(errors, N)
    return CalibrationEntry(d, float(g), int(N), kind, report.mean, report.stderr, reps)


@dataclass
class CalibrationTable:
    entries: list[CalibrationEntry] = field(default_factory=list)

    def add(self, entry: CalibrationEntry) -> None:
        self.entries = [e for e in self.entries if not _same_key(e, entry.d, entry.g, entry.N, entry.kind)]
        self.entries.append(entry)

    def lookup(self, d: int, g: float, N: int, kind: str) -> CalibrationEntry:
        for e in self.entries:
            if _same_key(e, d, g, N, kind):
                return e
        raise KeyError(f"no calibration entry for d={d}, g={g}, N={N}, kind={kind}")

    def weights(self, d: int, N1: int, N2: int, g1: float, g2: float) -> tuple[float, float]:
        return self.lookup(d, g1, N1, "original").mse, self.lookup(d, g2, N2, "revised").mse

    def to_json(self) -> str:
        rows = [e.__dict__ for e in sorted(self.entries, key=lambda e: (e.d, e.kind, e.g, e.N))]
        return json.dumps({"version": CALIBRATION_VERSION, "entries": rows}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> CalibrationTable:
        data = json.loads(text)
        if data.get("version") != CALIBRATION_VERSION:
            raise ValueError(f"unsupported calibration file version {data.get('version')!r}")
        return cls([CalibrationEntry(**row) for row in data["entries"]])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> CalibrationTable:
        return cls.from_json(Path(path).read_text())


def _same_key(e: CalibrationEntry, d: int, g: float, N: int, kind: str) -> bool:
    return e.d == d and e.N == N and e.kind == kind and math.isclose(e.g, g, rel_tol=0, abs_tol=1e-12)
