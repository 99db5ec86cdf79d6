"""CHSH and Mermin inequalities, loss thresholds, and the timing bound."""

import math

import numpy as np
import pytest

from entsim.belltest import (
    ALPHA_MAXIMAL,
    ChshSettings,
    LHV_BOUND,
    MERMIN_LHV_BOUND,
    SPEED_OF_LIGHT,
    TSIRELSON,
    chsh,
    chsh_estimate,
    chsh_optimize,
    correlation_matrix_bound,
    correlation_tensor,
    critical_efficiency,
    diagonal_coincidence_profile,
    mermin3,
    speed_lower_bound,
    threshold_sweep,
)
from entsim.qcore import StateVector, tensor
from entsim.sources import BellKind, bell_state, ghz, nonmax_state, werner

SINGLET = bell_state(BellKind.PSI_MINUS).density()


# ---------------------------------------------------------------------------
# CHSH


def test_canonical_settings_reach_tsirelson_on_singlet():
    report = chsh(SINGLET, ChshSettings.canonical())
    assert report.s_value == pytest.approx(TSIRELSON, abs=1e-12)
    assert report.violated


def test_product_state_stays_within_classical_bound():
    product = tensor(
        StateVector((2,), [1.0, 0.0]), StateVector((2,), [0.0, 1.0])
    ).density()
    report = chsh(product, ChshSettings.canonical())
    assert report.s_value <= LHV_BOUND + 1e-12
    best = chsh_optimize(product)
    assert best.s_value <= LHV_BOUND + 1e-7


def test_optimized_settings_on_singlet():
    report = chsh_optimize(SINGLET)
    assert report.s_value == pytest.approx(TSIRELSON, abs=1e-9)


def test_optimizer_matches_matrix_bound_for_werner():
    for v in (0.5, 0.72, 0.9, 1.0):
        rho = werner(v)
        expected = TSIRELSON * v
        assert correlation_matrix_bound(rho) == pytest.approx(expected, abs=1e-12)
        assert chsh_optimize(rho).s_value == pytest.approx(expected, abs=1e-9)


def test_optimizer_matches_analytic_value_for_partially_entangled():
    # for a|00> + b|11> the best possible S is 2 sqrt(1 + 4 a^2 b^2)
    for alpha in (0.3, 0.45, 0.6):
        beta_sq = 1.0 - alpha * alpha
        expected = 2.0 * math.sqrt(1.0 + 4.0 * alpha * alpha * beta_sq)
        rho = nonmax_state(alpha).density()
        assert correlation_matrix_bound(rho) == pytest.approx(expected, abs=1e-12)
        assert chsh_optimize(rho).s_value == pytest.approx(expected, abs=1e-9)


def test_correlation_tensor_of_singlet():
    t = correlation_tensor(SINGLET)
    assert np.allclose(t, -np.eye(3), atol=1e-12)


def test_chsh_estimate_within_errors():
    report = chsh_estimate(
        SINGLET,
        ChshSettings.canonical(),
        40_000,
        rng=np.random.default_rng(31),
        workers=2,
    )
    sigma = (report.s_value - LHV_BOUND) / report.sigma_margin
    assert abs(report.s_value - TSIRELSON) < 5.0 * sigma
    assert report.sigma_margin > 10.0
    assert report.counts.total_gates == 4 * 40_000


def test_chsh_estimate_deterministic():
    kwargs = dict(shots=10_000, workers=3)
    r1 = chsh_estimate(SINGLET, ChshSettings.canonical(),
                       rng=np.random.default_rng(5), **kwargs)
    r2 = chsh_estimate(SINGLET, ChshSettings.canonical(),
                       rng=np.random.default_rng(5), **kwargs)
    assert r1.s_value == r2.s_value
    assert r1.counts.counts == r2.counts.counts


# ---------------------------------------------------------------------------
# Mermin and GHZ profiles


def test_mermin_reaches_four_on_ghz():
    m = mermin3(ghz(3).density())
    assert abs(m) == pytest.approx(4.0, abs=1e-9)
    assert abs(m) > MERMIN_LHV_BOUND


def test_mermin_vanishes_on_product_state():
    product = tensor(
        tensor(StateVector((2,), [1.0, 0.0]), StateVector((2,), [1.0, 0.0])),
        StateVector((2,), [1.0, 0.0]),
    ).density()
    assert mermin3(product) == pytest.approx(0.0, abs=1e-12)


def test_mermin_requires_three_qubits():
    with pytest.raises(ValueError):
        mermin3(SINGLET)


def test_diagonal_profile_even_parity_quartet():
    profile = diagonal_coincidence_profile(ghz(3, ("001", "110")))
    quartet = {"PPP", "PMM", "MPM", "MMP"}
    for pattern, prob in profile.items():
        if pattern in quartet:
            assert prob == pytest.approx(0.25, abs=1e-12)
        else:
            assert prob == pytest.approx(0.0, abs=1e-12)


def test_diagonal_profile_four_qubits():
    profile = diagonal_coincidence_profile(ghz(4))
    nonzero = {p: v for p, v in profile.items() if v > 1e-12}
    assert len(nonzero) == 8
    for pattern, prob in nonzero.items():
        assert pattern.count("M") % 2 == 0
        assert prob == pytest.approx(0.125, abs=1e-12)


# ---------------------------------------------------------------------------
# detection-efficiency thresholds


def test_critical_efficiency_maximally_entangled():
    eta = critical_efficiency()
    assert eta == pytest.approx(2.0 / (1.0 + math.sqrt(2.0)), abs=5e-4)


def test_critical_efficiency_drops_for_weak_entanglement():
    eta_mid = critical_efficiency(0.5)
    eta_weak = critical_efficiency(0.05)
    assert eta_weak < eta_mid < critical_efficiency(ALPHA_MAXIMAL)
    assert eta_mid == pytest.approx(0.7649, abs=2e-3)
    assert eta_weak <= 0.68
    assert eta_weak > 2.0 / 3.0 - 1e-3


def test_threshold_sweep_is_monotone():
    sweep = threshold_sweep((0.1, 0.3, 0.5, ALPHA_MAXIMAL), tol=5e-4)
    etas = [eta for _, eta in sweep]
    assert etas == sorted(etas)


def test_critical_efficiency_validates_alpha():
    with pytest.raises(ValueError):
        critical_efficiency(0.0)
    with pytest.raises(ValueError):
        critical_efficiency(1.0)


# ---------------------------------------------------------------------------
# timing bound


def test_speed_bound_exact_values():
    assert speed_lower_bound(SPEED_OF_LIGHT, 1.0) == 1.0
    assert speed_lower_bound(1.0e4, 5.0e-12) == 6666666.666666667


def test_speed_bound_validation():
    with pytest.raises(ValueError):
        speed_lower_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        speed_lower_bound(1.0, 0.0)
