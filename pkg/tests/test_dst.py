import numpy as np
import pytest

from wvdst.bases import fourier_mub, gram_schmidt_extend, probe_state
from wvdst.dst import (
    CalibrationEntry,
    CalibrationTable,
    EstimationError,
    HybridConfig,
    InvalidProbeError,
    calibrate,
    collapse_to_pure,
    combine,
    hermitize_normalize,
    hybrid_dst,
    hybrid_steps,
    original_dst,
    revised_dst,
)
from wvdst.metrics import fidelity, mse_exact
from wvdst.qmath import haar_random_pure, is_hermitian, ket, projector, random_density_matrix, task_rng
from wvdst.sampler import Simulator


@pytest.mark.parametrize("g", [0.3, 1.2, 2.0])
def test_original_dst_exact_at_zero_noise(rng, g):
    for d in (2, 3, 5):
        rho = random_density_matrix(d, rng)
        raw = original_dst(Simulator(rho), fourier_mub(d), g, 2 * d)
        assert np.max(np.abs(raw - rho)) < 1e-10


def test_original_dst_general_mub_pair(rng):
    # any pair of unbiased bases works, not only computational/Fourier
    d = 3
    from wvdst.bases import MubPair, complete_mub_set

    bases = complete_mub_set(d)
    mub = MubPair(bases[1], bases[2])
    rho = random_density_matrix(d, rng)
    raw = original_dst(Simulator(rho), mub, 0.9, 6)
    expected = mub.basis_a.conj() @ rho @ mub.basis_a.T  # <a_n|rho|a_m>
    assert np.max(np.abs(raw - expected)) < 1e-10


def test_original_dst_diagonal_projector():
    d = 3
    raw = original_dst(Simulator(projector(ket(0, d))), fourier_mub(d), 1.2, 3000, task_rng(1))
    assert abs(raw[0, 0] - 1) < 0.2
    assert np.max(np.abs(raw[1:])) < 0.2
    exact = original_dst(Simulator(projector(ket(0, d))), fourier_mub(d), 1.2, 6)
    assert np.allclose(exact, projector(ket(0, d)), atol=1e-12)


def test_original_dst_budget_too_small(rng):
    with pytest.raises(ValueError):
        original_dst(Simulator(random_density_matrix(3, rng)), fourier_mub(3), 1.0, 5)


def test_original_dst_error_scales_as_inverse_budget():
    d, g = 2, 1.2
    Ns = [1_000, 10_000, 100_000]
    means = []
    for N in Ns:
        errs = []
        for rep in range(300):
            r = task_rng(31, N, rep)
            phi = haar_random_pure(d, r)
            raw = original_dst(Simulator(phi), fourier_mub(d), g, N, r)
            errs.append(mse_exact(hermitize_normalize(raw), phi))
        means.append(np.mean(errs))
    slope = np.polyfit(np.log(Ns), np.log(means), 1)[0]
    assert abs(slope + 1) < 0.15


def test_hermitize_examples(rng):
    rho = random_density_matrix(3, rng)
    assert np.allclose(hermitize_normalize(rho), rho, atol=1e-14)
    assert np.allclose(hermitize_normalize(np.array([[1, 1], [0, 1]])), [[0.5, 0.25], [0.25, 0.5]])
    for _ in range(10):
        raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 3 * np.eye(4)
        h = hermitize_normalize(raw)
        assert is_hermitian(h, 0.0)
        assert np.trace(h).real == pytest.approx(1.0, abs=1e-14)


def test_hermitize_vanishing_trace():
    with pytest.raises(EstimationError):
        hermitize_normalize(np.array([[1, 0], [0, -1]]))


def test_collapse_pure_projector(rng):
    for d in (2, 4, 7):
        phi = haar_random_pure(d, rng)
        out = collapse_to_pure(projector(phi))
        assert fidelity(out, phi) == pytest.approx(1.0, abs=1e-10)
        out = collapse_to_pure(projector(phi), 1)
        assert fidelity(out, phi) == pytest.approx(1.0, abs=1e-10)


def test_collapse_maximally_mixed():
    # off-diagonal denominators are zero, so only the reference column survives
    assert np.allclose(collapse_to_pure(np.eye(3) / 3), ket(0, 3))
    assert np.allclose(collapse_to_pure(np.eye(3) / 3, 2), ket(2, 3))


def test_collapse_reference_row_policies():
    # row 1 of |0><0| vanishes: the fixed-index policy has nothing to divide by
    rho = projector(ket(0, 2))
    assert fidelity(collapse_to_pure(rho, "argmax"), ket(0, 2)) == pytest.approx(1.0)
    with pytest.raises(EstimationError):
        collapse_to_pure(rho, 1)


def test_revised_dst_exact(rng):
    for d in (2, 3, 6):
        phi = haar_random_pure(d, rng)
        mub = fourier_mub(d)
        for n in range(d):
            out = revised_dst(Simulator(phi), mub.basis_a[n], mub.basis_psi, 0.8, 10)
            assert fidelity(out, phi) == pytest.approx(1.0, abs=1e-10)
            assert abs(np.linalg.norm(out) - 1) < 1e-12


def test_revised_dst_fails_when_probe_misses_state():
    phi = ket(1, 2)
    with pytest.raises(EstimationError):
        revised_dst(Simulator(phi), ket(0, 2), fourier_mub(2).basis_psi, 1.2, 100)


def test_revised_dst_invalid_probe(rng):
    with pytest.raises(InvalidProbeError):
        revised_dst(Simulator(haar_random_pure(2, rng)), ket(0, 2), np.eye(2), 1.2, 100)


def test_revised_dst_prefers_overlap_one_over_d():
    # qubit, probe |0>, Fourier postselection: theta = pi/2 beats both ends of the sweep
    def mean_mse(theta):
        phi = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
        src = Simulator(phi)
        post = fourier_mub(2).basis_psi
        return np.mean([mse_exact(revised_dst(src, ket(0, 2), post, 1.2, 100, task_rng(4, r)), phi) for r in range(2000)])

    mid = mean_mse(np.pi / 2)
    assert mid < mean_mse(0.1 * np.pi)
    assert mean_mse(0.95 * np.pi) > 10 * mid


def _hybrid_cfg(d, g1=1.2, g2=0.4, e1=1.0, e2=1.0):
    return HybridConfig(d, 2000 * d, 8000 * d, g1, g2, e1, e2)


@pytest.mark.parametrize("g", [0.3, 0.8, 1.2, 2.0])
def test_hybrid_exact(rng, g):
    for d in range(2, 9):
        phi = haar_random_pure(d, rng)
        out = hybrid_dst(Simulator(phi), _hybrid_cfg(d, g, g, 0.3, 0.1), fourier_mub(d))
        assert 1 - fidelity(out, phi) < 1e-10


def test_hybrid_dominant_weight():
    d = 3
    r = task_rng(8)
    phi = haar_random_pure(d, r)
    steps = hybrid_steps(Simulator(phi), _hybrid_cfg(d, e1=1e-4, e2=1.0), fourier_mub(d), r)
    assert fidelity(steps.final, steps.coarse) > 0.999


def test_hybrid_global_phase_invariance():
    d = 3
    phi = haar_random_pure(d, task_rng(12))
    cfg = _hybrid_cfg(d, e1=2e-3, e2=3e-4)
    for seed in range(5):
        a = mse_exact(hybrid_dst(Simulator(phi), cfg, fourier_mub(d), task_rng(seed)), phi)
        shifted = np.exp(0.7j) * phi
        b = mse_exact(hybrid_dst(Simulator(shifted), cfg, fourier_mub(d), task_rng(seed)), shifted)
        assert a == pytest.approx(b, abs=1e-9)


def test_hybrid_mse_decreases_with_budget():
    d = 2
    means, ses = [], []
    for N in (1_000, 10_000, 100_000):
        cfg = HybridConfig(d, N // 5, N - N // 5, 1.2, 0.4, 1.0, 0.25)
        errs = []
        for rep in range(300):
            r = task_rng(55, N, rep)
            phi = haar_random_pure(d, r)
            errs.append(mse_exact(hybrid_dst(Simulator(phi), cfg, fourier_mub(d), r), phi))
        means.append(np.mean(errs))
        ses.append(np.std(errs) / np.sqrt(len(errs)))
    for k in range(2):
        assert means[k + 1] <= means[k] + 2 * np.hypot(ses[k], ses[k + 1])


def test_combine_fallback_when_orthogonal():
    assert np.array_equal(combine(ket(0, 2), ket(1, 2), 1.0, 2.0), ket(0, 2))
    assert np.array_equal(combine(ket(0, 2), ket(1, 2), 3.0, 2.0), ket(1, 2))


def test_combine_aligns_phase():
    v = np.array([0.6, 0.8j])
    out = combine(v, np.exp(2.0j) * v, 1.0, 1.0)
    assert np.allclose(out, v)


def test_hybrid_config_validation():
    with pytest.raises(ValueError):
        HybridConfig(2, 0, 10, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        HybridConfig(2, 10, 10, 1.0, 1.0, 0.0, 1.0)


def test_calibration_monotone_in_budget():
    entries = [calibrate(2, 1.2, N, "original", 200, 3) for N in (1_000, 10_000, 100_000)]
    for lo, hi in zip(entries, entries[1:]):
        assert hi.mse <= lo.mse + 2 * np.hypot(lo.stderr, hi.stderr)


def test_calibration_stderr_shrinks_with_reps():
    small = calibrate(2, 0.4, 1_000, "revised", 1000, 4)
    large = calibrate(2, 0.4, 1_000, "revised", 2000, 4)
    assert small.stderr / large.stderr == pytest.approx(np.sqrt(2), rel=0.25)


def test_calibration_matches_fig1_minimum():
    # ideal probe, d=2, g=1.2, N=100 vs. the theta = pi/2 point of the probe-|0> sweep
    e2 = calibrate(2, 1.2, 100, "revised", 4000, 6)
    phi = np.array([1, 1], dtype=complex) / np.sqrt(2)
    src = Simulator(phi)
    post = fourier_mub(2).basis_psi
    errs = [mse_exact(revised_dst(src, ket(0, 2), post, 1.2, 100, task_rng(7, r)), phi) for r in range(4000)]
    se = np.hypot(e2.stderr, np.std(errs) / np.sqrt(len(errs)))
    assert abs(e2.mse - np.mean(errs)) < 3 * se


def test_calibrate_requires_reps():
    with pytest.raises(ValueError):
        calibrate(2, 1.2, 100, "original", 50, 0)


def test_calibration_table_roundtrip(tmp_path):
    table = CalibrationTable()
    table.add(CalibrationEntry(2, 1.2, 4000, "original", 1e-3, 1e-4, 200))
    table.add(CalibrationEntry(2, 0.4, 16000, "revised", 2e-4, 1e-5, 200))
    table.add(CalibrationEntry(2, 0.4, 16000, "revised", 3e-4, 1e-5, 300))
    path = tmp_path / "cal.json"
    table.save(path)
    loaded = CalibrationTable.load(path)
    assert loaded.weights(2, 4000, 16000, 1.2, 0.4) == (1e-3, 3e-4)
    with pytest.raises(KeyError):
        loaded.lookup(3, 1.2, 4000, "original")
    path.write_text('{"version": 99, "entries": []}')
    with pytest.raises(ValueError):
        CalibrationTable.load(path)
