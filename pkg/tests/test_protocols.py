"""Bell-state analysis, teleportation, dense coding, and swapping."""

import math

import numpy as np
import pytest

from entsim.belltest import TSIRELSON, chsh_optimize, correlation_matrix_bound
from entsim.protocols import (
    BsmKind,
    MESSAGE_BITS,
    MESSAGE_TRITS,
    average_teleport_fidelity,
    bsm_probabilities,
    dense_capacity,
    dense_code,
    dense_decode,
    entanglement_swap,
    full_bsm,
    partial_bsm,
    swap_outcomes,
    teleport,
    teleport_outcomes,
)
from entsim.qcore import StateVector, fidelity
from entsim.sources import BellKind, bell_state, werner

RNG = lambda seed=0: np.random.default_rng(seed)  # noqa: E731

INPUTS = [
    StateVector((2,), [1.0, 0.0]),
    StateVector((2,), [0.6, 0.8]),
    StateVector((2,), [0.6, 0.8j]),
    StateVector((2,), [math.cos(0.4), math.sin(0.4) * np.exp(1.3j)]),
]


# ---------------------------------------------------------------------------
# Bell-state measurement


def test_bsm_probabilities_identify_bell_states():
    for kind in BellKind:
        probs = bsm_probabilities(bell_state(kind).density())
        assert probs[kind] == pytest.approx(1.0, abs=1e-12)
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)


def test_bsm_probabilities_on_werner():
    v = 0.7
    probs = bsm_probabilities(werner(v))
    assert probs[BellKind.PSI_MINUS] == pytest.approx(v + (1 - v) / 4, abs=1e-12)
    for kind in (BellKind.PSI_PLUS, BellKind.PHI_MINUS, BellKind.PHI_PLUS):
        assert probs[kind] == pytest.approx((1 - v) / 4, abs=1e-12)


def test_full_bsm_sampling_and_residue():
    outcome, residue = full_bsm(bell_state(BellKind.PHI_MINUS).density(), RNG(3))
    assert outcome.kind is BsmKind.PHI_MINUS
    assert outcome.probability == pytest.approx(1.0, abs=1e-12)
    assert fidelity(bell_state(BellKind.PHI_MINUS), residue) == pytest.approx(1.0)


def test_partial_bsm_merges_phi_outcomes():
    outcome, residue = partial_bsm(bell_state(BellKind.PHI_PLUS).density(), RNG(0))
    assert outcome.kind is BsmKind.AMBIGUOUS
    assert outcome.probability == pytest.approx(1.0, abs=1e-12)
    # psi outcomes stay fully resolved
    outcome2, _ = partial_bsm(bell_state(BellKind.PSI_PLUS).density(), RNG(0))
    assert outcome2.kind is BsmKind.PSI_PLUS


def test_partial_bsm_equal_mixture_rates():
    rho = werner(0.0)  # maximally mixed: 1/4 per Bell state
    seen = {BsmKind.PSI_MINUS: 0, BsmKind.PSI_PLUS: 0, BsmKind.AMBIGUOUS: 0}
    rng = RNG(17)
    for _ in range(2000):
        outcome, _ = partial_bsm(rho, rng)
        seen[outcome.kind] += 1
    assert abs(seen[BsmKind.AMBIGUOUS] / 2000 - 0.5) < 5 * math.sqrt(0.25 / 2000)


# ---------------------------------------------------------------------------
# teleportation


def test_teleport_branches_uniform_and_faithful():
    for resource in BellKind:
        for psi in INPUTS:
            branches = teleport_outcomes(psi, resource)
            assert len(branches) == 4
            for _, prob, bob in branches:
                assert prob == pytest.approx(0.25, abs=1e-12)
                assert fidelity(psi, bob) == pytest.approx(1.0, abs=1e-12)


def test_teleport_without_correction_depolarizes():
    for psi in INPUTS:
        avg = average_teleport_fidelity(psi, apply_correction=False)
        assert avg == pytest.approx(0.5, abs=1e-9)


def test_teleport_corrected_average_fidelity():
    for resource in BellKind:
        avg = average_teleport_fidelity(INPUTS[2], resource)
        assert avg == pytest.approx(1.0, abs=1e-12)


def test_teleport_partial_bsm_resolves_half_the_rounds():
    psi = INPUTS[1]
    branches = teleport_outcomes(psi, bsm="partial")
    by_kind = {kind: (prob, bob) for kind, prob, bob in branches}
    assert set(by_kind) == {BsmKind.PSI_MINUS, BsmKind.PSI_PLUS, BsmKind.AMBIGUOUS}
    assert by_kind[BsmKind.AMBIGUOUS][0] == pytest.approx(0.5, abs=1e-12)
    for kind in (BsmKind.PSI_MINUS, BsmKind.PSI_PLUS):
        prob, bob = by_kind[kind]
        assert prob == pytest.approx(0.25, abs=1e-12)
        assert fidelity(psi, bob) == pytest.approx(1.0, abs=1e-12)


def test_teleport_single_round_message():
    bob, message = teleport(INPUTS[1], rng=RNG(2))
    assert message.bits == MESSAGE_BITS[message.outcome.bell_kind]
    assert message.success
    assert fidelity(INPUTS[1], bob) == pytest.approx(1.0, abs=1e-12)
    _, message_p = teleport(INPUTS[1], bsm="partial", rng=RNG(2))
    assert message_p.trit in (0, 1, 2)


# ---------------------------------------------------------------------------
# dense coding


def test_dense_code_produces_bell_states():
    # the four encodings on a fixed resource are exactly the four Bell states
    encoded = [dense_code(m) for m in ((0, 0), (0, 1), (1, 0), (1, 1))]
    gram = np.array(
        [[abs(np.vdot(u.amps, v.amps)) for v in encoded] for u in encoded]
    )
    assert np.allclose(gram, np.eye(4), atol=1e-12)


def test_dense_round_trip_all_messages_and_resources():
    for resource in BellKind:
        for message in ((0, 0), (0, 1), (1, 0), (1, 1)):
            encoded = dense_code(message, resource)
            decoded, capacity = dense_decode(encoded, resource=resource, rng=RNG(1))
            assert decoded == message
            assert capacity == 2.0


def test_dense_partial_analyzer_trit_mapping():
    # phi-like encodings merge into the ambiguous symbol
    trits = {}
    for message in ((0, 0), (0, 1), (1, 0), (1, 1)):
        encoded = dense_code(message)
        trit, capacity = dense_decode(encoded, bsm="partial", rng=RNG(1))
        trits[message] = trit
        assert capacity == pytest.approx(math.log2(3.0), abs=1e-12)
    assert trits[(0, 0)] == MESSAGE_TRITS[BsmKind.AMBIGUOUS]
    assert trits[(1, 0)] == MESSAGE_TRITS[BsmKind.AMBIGUOUS]
    assert trits[(0, 1)] != trits[(1, 1)]


def test_dense_capacity_values():
    assert dense_capacity("full") == 2.0
    assert dense_capacity("partial") == pytest.approx(math.log2(3.0), abs=1e-12)
    with pytest.raises(ValueError):
        dense_capacity("other")


# ---------------------------------------------------------------------------
# entanglement swapping


def test_swap_pure_singlets():
    pair = bell_state(BellKind.PSI_MINUS).density()
    outcomes = swap_outcomes(pair, pair)
    assert len(outcomes) == 4
    for kind, prob, kept in outcomes:
        assert prob == pytest.approx(0.25, abs=1e-12)
        # every branch leaves the never-interacting pair maximally entangled
        assert correlation_matrix_bound(kept) == pytest.approx(TSIRELSON, abs=1e-9)
        if kind is BsmKind.PSI_MINUS:
            assert fidelity(bell_state(BellKind.PSI_MINUS), kept) == pytest.approx(
                1.0, abs=1e-12
            )


def test_swap_werner_visibility_multiplies():
    v = 0.925
    outcomes = swap_outcomes(werner(v), werner(v))
    kept = next(o for o in outcomes if o[0] is BsmKind.PSI_MINUS)[2]
    s = chsh_optimize(kept).s_value
    assert s == pytest.approx(TSIRELSON * v * v, abs=1e-9)


def test_swap_sampling_deterministic():
    pair = werner(0.9)
    a = entanglement_swap(pair, pair, RNG(8))
    b = entanglement_swap(pair, pair, RNG(8))
    assert a[0].kind == b[0].kind
    assert np.allclose(a[1].mat, b[1].mat, atol=1e-15)
