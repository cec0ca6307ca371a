"""Experiment orchestration: the theta sweeps, the dimension sweep and calibration.

Every repetition draws from its own Philox stream keyed by
``(master_seed, experiment, grid index, repetition)``, so results do not
depend on how repetitions are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .baselines import BaselineResult, mub_scaled_mse, mub_tomography_sim, sic_scaled_mse
from .bases import _is_prime, fourier_mub
from .dst import CalibrationTable, HybridConfig, calibrate, hybrid_dst, revised_dst
from .metrics import MseReport, aggregate, mse_exact
from .qmath import haar_random_pure, ket, task_rng
from .sampler import Simulator

EXPERIMENTS = ("fig1", "fig2", "fig3", "calibrate", "single-run")
_EXPERIMENT_KEY = {name: i + 1 for i, name in enumerate(EXPERIMENTS)}

DEFAULT_THETA_GRID = tuple(float(x) for x in np.linspace(0.02 * np.pi, 0.98 * np.pi, 33))
DEFAULT_DIM_GRID = tuple(range(2, 16))
COPIES_PER_DIM = 10_000
N1_PER_DIM = 2_000
N2_PER_DIM = 8_000
_CHUNK = 250


class MissingCalibrationError(RuntimeError):
    pass


def table1_g2(d: int) -> float:
    """Revised-stage coupling used for dimension ``d`` in the dimension sweep."""
    if 2 <= d <= 3:
        return 0.4
    if 4 <= d <= 8:
        return 0.6
    if d == 9:
        return 0.7
    if 10 <= d <= 12:
        return 0.8
    if 13 <= d <= 15:
        return 0.9
    raise ValueError(f"no tabulated g2 for d={d} (supported: 2..15)")


@dataclass
class ExperimentConfig:
    """Settings for one harness run.

    ``None`` means "use the experiment's default". For ``fig3``, ``calibrate``
    and ``single-run`` the budgets are *per dimension*: a state of dimension
    ``d`` gets ``copies * d`` copies (``n1 * d`` and ``n2 * d`` for the stages).
    """

    experiment: str
    dim: int | None = None
    copies: int | None = None
    n1: int | None = None
    n2: int | None = None
    g1: float | None = None
    g2: float | None = None
    reps: int | None = None
    seed: int = 0
    theta_grid: list[float] | None = None
    dim_grid: list[int] | None = None
    out: str | None = None
    format: str | None = None
    calibration_file: str | None = None
    jobs: int = 1
    reference_row: str | int = "argmax"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for name in ("dim", "copies", "n1", "n2", "reps"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("g1", "g2"):
            value = getattr(self, name)
            if value is not None and not 0 < value < math.pi:
                raise ValueError(f"{name} must lie in (0, pi)")
        if self.theta_grid is not None and not self.theta_grid:
            raise ValueError("theta grid is empty")
        if self.dim_grid is not None and not self.dim_grid:
            raise ValueError("dimension grid is empty")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.format not in (None, "csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")
        if None not in (self.copies, self.n1, self.n2) and self.n1 + self.n2 != self.copies:
            raise ValueError("n1 + n2 must equal copies")

    def output_format(self) -> str:
        if self.format:
            return self.format
        if self.out and self.out.endswith(".json"):
            return "json"
        return "csv"

    def thetas(self) -> list[float]:
        return list(self.theta_grid) if self.theta_grid is not None else list(DEFAULT_THETA_GRID)

    def dims(self) -> list[int]:
        if self.dim_grid is not None:
            return list(self.dim_grid)
        if self.experiment == "fig3":
            return list(DEFAULT_DIM_GRID)
        return [self.dim or 2]

    def split(self, default_total: int, default_n1: int, default_n2: int, scale: int = 1) -> tuple[int, int, int]:
        """Resolve ``(N, N1, N2)``; an unspecified stage takes what is left over."""
        total, n1, n2 = self.copies, self.n1, self.n2
        if total is None:
            if n1 is not None and n2 is not None:
                total = n1 + n2
            else:
                total = default_total
        if n1 is None and n2 is None:
            n1 = total * default_n1 // default_total
            n2 = total - n1
        elif n1 is None:
            n1 = total - n2
        elif n2 is None:
            n2 = total - n1
        if n1 <= 0 or n2 <= 0 or n1 + n2 != total:
            raise ValueError("n1 + n2 must equal copies, with both stages positive")
        return total * scale, n1 * scale, n2 * scale


@dataclass
class SweepRecord:
    """One grid point: the independent variable plus one report per strategy."""

    x: float | int
    reports: dict[str, MseReport | BaselineResult] = field(default_factory=dict)


# -- parallel plumbing --------------------------------------------------------


def _map(fn: Callable, tasks: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _chunks(reps: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _CHUNK, reps)) for lo in range(0, reps, _CHUNK)]


def _gather(fn: Callable, points: Sequence, reps: int, jobs: int) -> list[list[float]]:
    """Run ``fn((point, lo, hi))`` over all points and repetition chunks, reassembled in index order."""
    tasks = [(p, lo, hi) for p in points for lo, hi in _chunks(reps)]
    results = _map(fn, tasks, jobs)
    per_point: list[list[float]] = [[] for _ in points]
    for (p, _, _), errs in zip(tasks, results):
        per_point[points.index(p)].extend(errs)
    return per_point


# -- fig1: revised DST against a theta sweep ---------------------------------


def theta_state(theta: float, d: int = 2) -> np.ndarray:
    """``cos(theta/2)|0> + sin(theta/2)|1>`` embedded in dimension ``d``."""
    phi = np.zeros(d, dtype=complex)
    phi[0] = math.cos(theta / 2)
    phi[1] = math.sin(theta / 2)
    return phi


@dataclass(frozen=True)
class _Fig1Task:
    seed: int
    d: int
    N: int
    g: float
    thetas: tuple[float, ...]

    def __call__(self, task):
        (i, lo, hi) = task
        phi = theta_state(self.thetas[i], self.d)
        source = Simulator(phi)
        post = fourier_mub(self.d).basis_psi
        probe = ket(0, self.d)
        errs = []
        for rep in range(lo, hi):
            rng = task_rng(self.seed, _EXPERIMENT_KEY["fig1"], i, rep)
            errs.append(mse_exact(revised_dst(source, probe, post, self.g, self.N, rng), phi))
        return errs


def run_fig1(config: ExperimentConfig) -> list[SweepRecord]:
    """Revised DST of ``cos(t/2)|0> + sin(t/2)|1>`` with probe ``|0>`` over a theta grid."""
    d = config.dim or 2
    N = config.copies or 100
    g = config.g1 if config.g1 is not None else 1.2
    reps = config.reps or 10_000
    thetas = tuple(config.thetas())
    task = _Fig1Task(config.seed, d, N, g, thetas)
    per_theta = _gather(task, list(range(len(thetas))), reps, config.jobs)
    return [SweepRecord(t, {"revised": aggregate(e, N)}) for t, e in zip(thetas, per_theta)]


# -- fig2: hybrid DST against a theta sweep ----------------------------------


def _load_calibration(config: ExperimentConfig) -> CalibrationTable:
    path = config.calibration_file
    if not path:
        raise MissingCalibrationError("hybrid runs need a calibration file (--calibration-file); run --experiment calibrate first")
    if not Path(path).is_file():
        raise MissingCalibrationError(f"calibration file not found: {path}")
    return CalibrationTable.load(path)


def _hybrid_config(table: CalibrationTable, d: int, N1: int, N2: int, g1: float, g2: float, reference_row) -> HybridConfig:
    try:
        e1, e2 = table.weights(d, N1, N2, g1, g2)
    except KeyError as exc:
        raise MissingCalibrationError(str(exc.args[0])) from None
    return HybridConfig(d, N1, N2, g1, g2, e1, e2, reference_row)


@dataclass(frozen=True)
class _HybridThetaTask:
    seed: int
    hybrid: HybridConfig
    thetas: tuple[float, ...]

    def __call__(self, task):
        (i, lo, hi) = task
        d = self.hybrid.d
        phi = theta_state(self.thetas[i], d)
        source = Simulator(phi)
        mub = fourier_mub(d)
        errs = []
        for rep in range(lo, hi):
            rng = task_rng(self.seed, _EXPERIMENT_KEY["fig2"], i, rep)
            errs.append(mse_exact(hybrid_dst(source, self.hybrid, mub, rng), phi))
        return errs


def run_fig2(config: ExperimentConfig) -> list[SweepRecord]:
    """Hybrid DST over the theta grid (budgets N=2e4, N1=4e3, N2=1.6e4 by default)."""
    d = config.dim or 2
    N, N1, N2 = config.split(20_000, 4_000, 16_000)
    g1 = config.g1 if config.g1 is not None else 1.2
    g2 = config.g2 if config.g2 is not None else 0.4
    reps = config.reps or 10_000
    hybrid = _hybrid_config(_load_calibration(config), d, N1, N2, g1, g2, config.reference_row)
    thetas = tuple(config.thetas())
    per_theta = _gather(_HybridThetaTask(config.seed, hybrid, thetas), list(range(len(thetas))), reps, config.jobs)
    return [SweepRecord(t, {"hybrid": aggregate(e, N)}) for t, e in zip(thetas, per_theta)]


# -- fig3: dimension sweep -----------------------------------------------------


def _dim_params(config: ExperimentConfig, d: int) -> tuple[int, int, int, float, float]:
    N, N1, N2 = config.split(COPIES_PER_DIM, N1_PER_DIM, N2_PER_DIM, scale=d)
    g1 = config.g1 if config.g1 is not None else 1.2
    g2 = config.g2 if config.g2 is not None else table1_g2(d)
    return N, N1, N2, g1, g2


@dataclass(frozen=True)
class _HybridHaarTask:
    seed: int
    experiment: int
    hybrids: tuple[HybridConfig, ...]

    def __call__(self, task):
        (i, lo, hi) = task
        hybrid = self.hybrids[i]
        mub = fourier_mub(hybrid.d)
        errs = []
        for rep in range(lo, hi):
            rng = task_rng(self.seed, self.experiment, hybrid.d, rep)
            phi = haar_random_pure(hybrid.d, rng)
            errs.append(mse_exact(hybrid_dst(Simulator(phi), hybrid, mub, rng), phi))
        return errs


@dataclass(frozen=True)
class _MubTask:
    seed: int
    dims: tuple[int, ...]
    copies: tuple[int, ...]

    def __call__(self, task):
        (i, lo, hi) = task
        d, N = self.dims[i], self.copies[i]
        errs = []
        for rep in range(lo, hi):
            rng = task_rng(self.seed, _EXPERIMENT_KEY["fig3"], d, rep, 1)
            errs.append(mub_tomography_sim(None, N, d, 1, rng).scaled_mse / N)
        return errs


def run_fig3(config: ExperimentConfig) -> list[SweepRecord]:
    """Scaled MSE per dimension: hybrid DST (simulated), MUB and SIC baselines."""
    reps = config.reps or 1_000
    dims = config.dims()
    table = _load_calibration(config)
    hybrids, budgets = [], []
    for d in dims:
        N, N1, N2, g1, g2 = _dim_params(config, d)
        hybrids.append(_hybrid_config(table, d, N1, N2, g1, g2, config.reference_row))
        budgets.append(N)
    hybrid_errs = _gather(_HybridHaarTask(config.seed, _EXPERIMENT_KEY["fig3"], tuple(hybrids)), list(range(len(dims))), reps, config.jobs)
    primes = [i for i, d in enumerate(dims) if _is_prime(d)]
    mub_task = _MubTask(config.seed, tuple(dims[i] for i in primes), tuple(budgets[i] for i in primes))
    mub_errs = _gather(mub_task, list(range(len(primes))), reps, config.jobs)
    records = []
    for i, d in enumerate(dims):
        reports = {
            "hybrid": aggregate(hybrid_errs[i], budgets[i]),
            "mub_analytic": BaselineResult(d, "mub-analytic", mub_scaled_mse(d)),
            "sic_analytic": BaselineResult(d, "sic-analytic", sic_scaled_mse(d)),
        }
        if i in primes:
            reports["mub_simulated"] = aggregate(mub_errs[primes.index(i)], budgets[i])
        records.append(SweepRecord(d, reports))
    return records


def run_single(config: ExperimentConfig) -> list[SweepRecord]:
    """Hybrid DST on Haar-random states of one dimension."""
    d = config.dim or 2
    N, N1, N2, g1, g2 = _dim_params(config, d)
    hybrid = _hybrid_config(_load_calibration(config), d, N1, N2, g1, g2, config.reference_row)
    reps = config.reps or 100
    errs = _gather(_HybridHaarTask(config.seed, _EXPERIMENT_KEY["single-run"], (hybrid,)), [0], reps, config.jobs)[0]
    return [SweepRecord(d, {"hybrid": aggregate(errs, N)})]


# -- calibration ----------------------------------------------------------------


@dataclass(frozen=True)
class _CalibrationTask:
    seed: int
    reps: int
    reference_row: str | int

    def __call__(self, spec):
        d, g, N, kind = spec
        return calibrate(d, g, N, kind, self.reps, self.seed, self.reference_row)


def run_calibrate(config: ExperimentConfig) -> CalibrationTable:
    """Populate the stage MSEs needed by hybrid runs at the configured dimensions."""
    if not config.calibration_file:
        raise ValueError("calibrate needs --calibration-file to write to")
    reps = config.reps or 1_000
    specs = []
    for d in config.dims():
        _, N1, N2, g1, g2 = _dim_params(config, d)
        specs += [(d, g1, N1, "original"), (d, g2, N2, "revised")]
    path = Path(config.calibration_file)
    table = CalibrationTable.load(path) if path.is_file() else CalibrationTable()
    for entry in _map(_CalibrationTask(config.seed, reps, config.reference_row), specs, config.jobs):
        table.add(entry)
    table.save(path)
    return table


# -- output ------------------------------------------------------------------------


def records_to_rows(experiment: str, records: Sequence[SweepRecord]) -> tuple[list[str], list[list]]:
    if experiment in ("fig1", "fig2"):
        header = ["theta_rad", "mse_mean", "mse_stderr", "reps"]
        rows = []
        for rec in records:
            (report,) = rec.reports.values()
            rows.append([float(rec.x), report.mean, report.stderr, report.reps])
        return header, rows
    header = ["dim", "strategy", "scaled_mse", "stderr", "reps"]
    rows = []
    for rec in records:
        for strategy, report in rec.reports.items():
            if isinstance(report, BaselineResult):
                rows.append([int(rec.x), strategy, report.scaled_mse, report.stderr, report.reps])
            else:
                rows.append([int(rec.x), strategy, report.scaled, report.stderr * report.N, report.reps])
    return header, rows


def render(config: ExperimentConfig, records: Sequence[SweepRecord]) -> str:
    header, rows = records_to_rows(config.experiment, records)
    if config.output_format() == "json":
        meta = {k: v for k, v in asdict(config).items() if k not in ("out", "format", "jobs", "calibration_file")}
        payload = {"experiment": config.experiment, "config": meta, "columns": header, "rows": [dict(zip(header, r)) for r in rows]}
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


RUNNERS = {"fig1": run_fig1, "fig2": run_fig2, "fig3": run_fig3, "single-run": run_single}


def run_experiment(config: ExperimentConfig) -> str:
    """Run ``config`` and return the rendered output (also written to ``config.out``)."""
    if config.experiment == "calibrate":
        text = run_calibrate(config).to_json()
    else:
        text = render(config, RUNNERS[config.experiment](config))
    if config.out:
        Path(config.out).write_text(text)
    return text
