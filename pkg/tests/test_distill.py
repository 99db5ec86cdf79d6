"""Local filtering: Procrustean concentration and filter-revealed nonlocality."""

import math

import numpy as np
import pytest

from entsim.belltest import TSIRELSON, chsh_optimize, correlation_matrix_bound
from entsim.distill import (
    HIDDEN_FAMILY_ALPHA,
    HIDDEN_FAMILY_WEIGHT,
    LocalFilter,
    best_diagonal_filter,
    hidden_family,
    hidden_nonlocality_demo,
    local_filter,
    procrustean_filter_for,
)
from entsim.qcore import IDENTITY_2, StateVector, fidelity
from entsim.sources import BellKind, bell_state, ghz, nonmax_state, werner


def test_filter_rejects_bad_shapes_and_norms():
    with pytest.raises(ValueError, match="2x2"):
        LocalFilter(a=np.eye(3), b=np.eye(2))
    with pytest.raises(ValueError, match="norm"):
        LocalFilter(a=np.diag([1.2, 1.0]), b=np.eye(2))


def test_filter_requires_two_qubits_and_nonzero_success():
    filt = LocalFilter(a=IDENTITY_2.copy(), b=IDENTITY_2.copy())
    with pytest.raises(ValueError, match="two-qubit"):
        local_filter(ghz(3).density(), filt)
    killer = LocalFilter(a=np.diag([0.0, 1.0]), b=IDENTITY_2.copy())
    vacuum = StateVector((2, 2), [1, 0, 0, 0])
    with pytest.raises(ValueError, match="vanishes"):
        local_filter(vacuum, killer)


@pytest.mark.parametrize("alpha", [0.3, 0.45, 0.6, 0.75])
def test_procrustean_success_probability_and_output(alpha):
    beta = math.sqrt(1.0 - alpha * alpha)
    out, p = local_filter(nonmax_state(alpha), procrustean_filter_for(alpha))
    assert p == pytest.approx(2.0 * min(alpha, beta) ** 2, abs=1e-12)
    assert correlation_matrix_bound(out) == pytest.approx(TSIRELSON, abs=1e-9)
    assert fidelity(out, bell_state(BellKind.PHI_PLUS)) == pytest.approx(
        1.0, abs=1e-12
    )


def test_procrustean_balanced_state_needs_no_filtering():
    alpha = 1.0 / math.sqrt(2.0)
    filt = procrustean_filter_for(alpha)
    assert np.allclose(filt.a, np.eye(2), atol=1e-12)
    _, p = local_filter(nonmax_state(alpha), filt)
    assert p == pytest.approx(1.0, abs=1e-12)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            procrustean_filter_for(bad)


def test_hidden_family_matrix_structure():
    rho = hidden_family()
    w, alpha = HIDDEN_FAMILY_WEIGHT, HIDDEN_FAMILY_ALPHA
    pure = nonmax_state(alpha)
    expect = (1 - w) * np.outer(pure.amps, pure.amps.conj())
    expect[2, 2] += w  # product noise on outcome pattern (0, 1)
    assert np.abs(rho.mat - expect).max() < 1e-12
    with pytest.raises(ValueError):
        hidden_family(weight=1.0)


def test_unfiltered_family_member_is_local():
    s0 = chsh_optimize(hidden_family()).s_value
    assert s0 == pytest.approx(1.8186236554053732, abs=1e-6)
    assert s0 < 2.0


def test_best_diagonal_filter_optimum():
    filt, s_f, p = best_diagonal_filter(hidden_family())
    t = filt.a[1, 1].real
    s = filt.b[1, 1].real
    assert t == pytest.approx(1.0, abs=1e-3)
    assert s == pytest.approx(0.43967877, abs=1e-3)
    assert s_f == pytest.approx(2.4679327632869197, abs=1e-6)
    w, alpha = HIDDEN_FAMILY_WEIGHT, HIDDEN_FAMILY_ALPHA
    beta_sq = 1.0 - alpha * alpha
    p_analytic = (1 - w) * (alpha**2 + (t * s) ** 2 * beta_sq) + w * s**2
    assert p == pytest.approx(p_analytic, abs=1e-9)


def test_demo_reveals_nonlocality_after_filtering():
    report = hidden_nonlocality_demo()
    assert report is not None
    assert 1.77 <= report.s_initial <= 1.87
    assert report.s_filtered >= 2.2
    assert 0.25 <= report.success_probability <= 0.40


def test_diagonal_filters_cannot_rescue_a_werner_state():
    _, s_f, _ = best_diagonal_filter(werner(0.65), grid=20)
    assert s_f < 2.01
