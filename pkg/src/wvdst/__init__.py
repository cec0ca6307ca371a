"""Simulation of weak-value direct state tomography (original, revised and hybrid)."""

from .baselines import mub_scaled_mse, mub_tomography_sim, sic_scaled_mse
from .bases import complete_mub_set, fourier_mub, gram_schmidt_extend, probe_state
from .coupling import exact_weak_value, postselected_pointer, weak_value_oracle
from .dst import (
    CalibrationTable,
    EstimationError,
    HybridConfig,
    collapse_to_pure,
    hermitize_normalize,
    hybrid_dst,
    original_dst,
    revised_dst,
)
from .metrics import fidelity, mse_exact
from .qmath import haar_random_pure, random_density_matrix, task_rng
from .sampler import Simulator

__version__ = "0.1.0"
