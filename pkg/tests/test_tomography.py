"""Linear-inversion and maximum-likelihood two-qubit state reconstruction."""

import io
import math

import numpy as np
import pytest

from entsim.qcore import BLOCH_Z, DensityMatrix, born_probabilities, fidelity
from entsim.sources import BellKind, bell_state, nonmax_state, werner
from entsim.tomography import (
    design_matrix,
    linear_inversion,
    log_likelihood,
    mle_reconstruct,
    project_to_physical,
    simulate_counts,
    tomo_settings,
    write_matrix,
)


def exact_weights(rho):
    """Per-setting outcome probabilities in count-table key format."""
    weights = {}
    for sid, (va, vb) in enumerate(tomo_settings()):
        for pattern, prob in born_probabilities(rho, (va, vb)).items():
            weights[(sid, "".join(str(b) for b in pattern))] = prob
    return weights


def random_density(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    return DensityMatrix((2, 2), rho / np.trace(rho).real)


STATES = [
    bell_state(BellKind.PSI_MINUS).density(),
    nonmax_state(0.45).density(),
    werner(0.83),
    random_density(1),
    random_density(2),
]


def test_sixteen_settings_and_full_rank_design():
    settings = tomo_settings()
    assert len(settings) == 16
    assert np.linalg.matrix_rank(design_matrix(settings)) == 16


def test_simulate_counts_totals_and_determinism():
    rho = werner(0.6)
    t1 = simulate_counts(rho, tomo_settings(), 500, np.random.default_rng(4))
    t2 = simulate_counts(rho, tomo_settings(), 500, np.random.default_rng(4))
    assert t1.counts == t2.counts
    assert t1.total_gates == 16 * 500
    for sid in range(16):
        assert t1.setting_total(sid) == 500


def test_linear_inversion_recovers_exact_probabilities():
    for rho in STATES:
        est = linear_inversion(exact_weights(rho))
        assert np.abs(est - rho.mat).max() < 1e-10


def test_linear_inversion_output_is_hermitian_unit_trace():
    counts = simulate_counts(werner(0.5), tomo_settings(), 300,
                             np.random.default_rng(9))
    est = linear_inversion(counts)
    assert np.allclose(est, est.conj().T, atol=1e-12)
    assert np.trace(est).real == pytest.approx(1.0, abs=1e-12)


def test_linear_inversion_rejects_singular_design():
    degenerate = [(BLOCH_Z, BLOCH_Z)] * 16
    weights = {}
    rho = werner(0.4)
    for sid in range(16):
        for pattern, prob in born_probabilities(rho, (BLOCH_Z, BLOCH_Z)).items():
            weights[(sid, "".join(str(b) for b in pattern))] = prob
    with pytest.raises(ValueError, match="singular"):
        linear_inversion(weights, settings=degenerate)


def test_project_to_physical_clips_negative_eigenvalues():
    mat = np.diag([0.7, 0.5, -0.1, -0.1]).astype(complex)
    rho = project_to_physical(mat)
    evals = np.linalg.eigvalsh(rho.mat)
    assert evals.min() >= -1e-12
    assert np.trace(rho.mat).real == pytest.approx(1.0, abs=1e-12)


def test_mle_from_exact_probabilities_is_near_perfect():
    for rho in STATES:
        result = mle_reconstruct(exact_weights(rho))
        assert result.converged
        assert fidelity(rho, result.rho) >= 1.0 - 1e-6


def test_mle_from_sampled_counts():
    rho = werner(0.83)
    counts = simulate_counts(rho, tomo_settings(), 100_000,
                             np.random.default_rng(12))
    result = mle_reconstruct(counts)
    assert result.converged
    assert fidelity(rho, result.rho) >= 0.999


def test_mle_always_physical_when_linear_inversion_is_not():
    rho = bell_state(BellKind.PHI_PLUS).density()
    unphysical_seen = 0
    for seed in range(12):
        counts = simulate_counts(rho, tomo_settings(), 100,
                                 np.random.default_rng(seed))
        if np.linalg.eigvalsh(linear_inversion(counts)).min() < -1e-6:
            unphysical_seen += 1
        result = mle_reconstruct(counts)
        assert np.linalg.eigvalsh(result.rho.mat).min() >= -1e-9
    assert unphysical_seen > 0


def test_mle_does_not_decrease_likelihood():
    counts = simulate_counts(nonmax_state(0.45).density(), tomo_settings(), 400,
                             np.random.default_rng(3))
    start = project_to_physical(linear_inversion(counts))
    result = mle_reconstruct(counts)
    assert result.log_likelihood >= log_likelihood(counts, start) - 1e-9
    assert result.log_likelihood == pytest.approx(
        log_likelihood(counts, result.rho), abs=1e-6
    )


def test_write_matrix_round_trip():
    rho = random_density(7)
    buf = io.StringIO()
    write_matrix(rho.mat, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row,col,re,im"
    back = np.zeros((4, 4), dtype=complex)
    for line in lines[1:]:
        r, c, re, im = line.split(",")
        back[int(r), int(c)] = float(re) + 1j * float(im)
    assert np.abs(back - rho.mat).max() < 1e-9
