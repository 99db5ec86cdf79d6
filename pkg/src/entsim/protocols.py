"""Bell-state measurement and the protocols built on it: teleportation,
dense coding, and entanglement swapping.

A linear-optics Bell analyzer resolves only the two psi states; both phi
states produce the same detector signature and are reported as a single
Ambiguous outcome.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    DensityMatrix,
    IDENTITY_2,
    PAULI_X,
    PAULI_Z,
    StateVector,
    expand_operator,
    fidelity,
    partial_trace,
    tensor,
)
from .sources import BellKind, bell_state

BELL_ORDER = (BellKind.PSI_MINUS, BellKind.PSI_PLUS, BellKind.PHI_MINUS, BellKind.PHI_PLUS)


class BsmKind(enum.Enum):
    PSI_MINUS = "psi-minus"
    PSI_PLUS = "psi-plus"
    PHI_MINUS = "phi-minus"
    PHI_PLUS = "phi-plus"
    AMBIGUOUS = "ambiguous"

    @property
    def bell_kind(self) -> BellKind | None:
        if self is BsmKind.AMBIGUOUS:
            return None
        return BellKind(self.value)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class BsmOutcome:
    kind: BsmKind
    probability: float


@dataclass(frozen=True)
class ClassicalMessage:
    """What Alice announces after her Bell measurement: two bits for a full
    analyzer, a trit for the linear-optics one.  ``success`` is False only
    for the ambiguous trit value."""

    outcome: BsmKind
    bits: tuple[int, int] | None = None
    trit: int | None = None

    @property
    def success(self) -> bool:
        return self.outcome is not BsmKind.AMBIGUOUS


#: Fixed bit encoding of the four Bell outcomes, in BELL_ORDER.
MESSAGE_BITS = {kind: ((i >> 1) & 1, i & 1) for i, kind in enumerate(BELL_ORDER)}
#: Trit values for the linear-optics analyzer.
MESSAGE_TRITS = {BsmKind.PSI_MINUS: 0, BsmKind.PSI_PLUS: 1, BsmKind.AMBIGUOUS: 2}


def _as_density(state) -> DensityMatrix:
    if isinstance(state, StateVector):
        return state.density()
    if isinstance(state, DensityMatrix):
        return state
    raise TypeError("expected StateVector or DensityMatrix")


def _bell_projectors(dims, targets) -> dict[BellKind, np.ndarray]:
    out = {}
    for kind in BELL_ORDER:
        amps = bell_state(kind).amps
        out[kind] = expand_operator(np.outer(amps, amps.conj()), dims, targets)
    return out


def bsm_probabilities(rho: DensityMatrix) -> dict[BellKind, float]:
    """Born probabilities of the four Bell outcomes for a two-qubit state."""
    rho = _as_density(rho)
    if rho.dims != (2, 2):
        raise ValueError("Bell-state measurement acts on two qubits")
    probs = {}
    for kind in BELL_ORDER:
        amps = bell_state(kind).amps
        probs[kind] = float(np.real(amps.conj() @ rho.mat @ amps))
    return probs


def full_bsm(
    rho, rng: np.random.Generator
) -> tuple[BsmOutcome, DensityMatrix]:
    """Projective measurement in the Bell basis; returns the sampled outcome
    and the post-measurement state (the projected Bell state)."""
    probs = bsm_probabilities(_as_density(rho))
    kinds = list(probs.keys())
    p = np.array([probs[k] for k in kinds])
    cum = np.cumsum(p)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    i = min(i, 3)
    kind = kinds[i]
    residue = bell_state(kind).density()
    return BsmOutcome(BsmKind(kind.value), float(p[i])), residue


def partial_bsm(
    rho, rng: np.random.Generator
) -> tuple[BsmOutcome, DensityMatrix]:
    """Linear-optics Bell analyzer: psi outcomes resolved, both phi outcomes
    merged into Ambiguous with summed probability.  The ambiguous residue is
    the normalized mixture of the two phi projections."""
    rho = _as_density(rho)
    probs = bsm_probabilities(rho)
    p_amb = probs[BellKind.PHI_MINUS] + probs[BellKind.PHI_PLUS]
    branches = [
        (BsmKind.PSI_MINUS, probs[BellKind.PSI_MINUS]),
        (BsmKind.PSI_PLUS, probs[BellKind.PSI_PLUS]),
        (BsmKind.AMBIGUOUS, p_amb),
    ]
    p = np.array([b[1] for b in branches])
    cum = np.cumsum(p)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    i = min(i, 2)
    kind, prob = branches[i]
    if kind is BsmKind.AMBIGUOUS:
        if prob <= 1e-300:
            residue_mat = np.eye(4) / 4.0
        else:
            mats = []
            for bk in (BellKind.PHI_MINUS, BellKind.PHI_PLUS):
                amps = bell_state(bk).amps
                mats.append(probs[bk] * np.outer(amps, amps.conj()))
            residue_mat = (mats[0] + mats[1]) / prob
        residue = DensityMatrix((2, 2), residue_mat)
    else:
        residue = bell_state(kind.bell_kind).density()
    return BsmOutcome(kind, float(prob)), residue


# correction Bob applies, per resource Bell state and announced outcome;
# phases are irrelevant so XZ stands in for iY
_XZ = PAULI_X @ PAULI_Z
CORRECTIONS: dict[BellKind, dict[BsmKind, np.ndarray]] = {
    BellKind.PSI_MINUS: {
        BsmKind.PSI_MINUS: IDENTITY_2,
        BsmKind.PSI_PLUS: PAULI_Z,
        BsmKind.PHI_MINUS: PAULI_X,
        BsmKind.PHI_PLUS: _XZ,
    },
    BellKind.PSI_PLUS: {
        BsmKind.PSI_MINUS: PAULI_Z,
        BsmKind.PSI_PLUS: IDENTITY_2,
        BsmKind.PHI_MINUS: _XZ,
        BsmKind.PHI_PLUS: PAULI_X,
    },
    BellKind.PHI_MINUS: {
        BsmKind.PSI_MINUS: PAULI_X,
        BsmKind.PSI_PLUS: _XZ,
        BsmKind.PHI_MINUS: IDENTITY_2,
        BsmKind.PHI_PLUS: PAULI_Z,
    },
    BellKind.PHI_PLUS: {
        BsmKind.PSI_MINUS: _XZ,
        BsmKind.PSI_PLUS: PAULI_X,
        BsmKind.PHI_MINUS: PAULI_Z,
        BsmKind.PHI_PLUS: IDENTITY_2,
    },
}


def teleport_outcomes(
    input_state,
    resource: BellKind = BellKind.PSI_MINUS,
    bsm: str = "full",
    apply_correction: bool = True,
) -> list[tuple[BsmKind, float, DensityMatrix]]:
    """Deterministic branch enumeration of the teleportation protocol.

    Register layout: subsystem 0 is the input, (1, 2) hold the resource
    pair, the Bell measurement acts on (0, 1) and Bob keeps 2.  Returns
    (outcome, probability, Bob's conditional state) for every branch.
    """
    if bsm not in ("full", "partial"):
        raise ValueError("bsm must be 'full' or 'partial'")
    rho_in = _as_density(input_state)
    if rho_in.dims != (2,):
        raise ValueError("teleportation input must be a single qubit")
    total = tensor(rho_in, bell_state(resource).density())
    projectors = _bell_projectors(total.dims, (0, 1))

    raw = {}
    for kind in BELL_ORDER:
        proj = projectors[kind]
        sub = proj @ total.mat @ proj
        raw[kind] = (float(np.trace(sub).real), sub)

    branches: list[tuple[BsmKind, float, np.ndarray]] = []
    if bsm == "full":
        for kind in BELL_ORDER:
            p, sub = raw[kind]
            branches.append((BsmKind(kind.value), p, sub))
    else:
        for kind in (BellKind.PSI_MINUS, BellKind.PSI_PLUS):
            p, sub = raw[kind]
            branches.append((BsmKind(kind.value), p, sub))
        p_amb = raw[BellKind.PHI_MINUS][0] + raw[BellKind.PHI_PLUS][0]
        branches.append(
            (BsmKind.AMBIGUOUS, p_amb, raw[BellKind.PHI_MINUS][1] + raw[BellKind.PHI_PLUS][1])
        )

    out = []
    for kind, p, sub in branches:
        if p <= 1e-300:
            bob = DensityMatrix((2,), np.eye(2) / 2.0)
        else:
            cond = DensityMatrix(total.dims, _hermitize(sub / p))
            bob = partial_trace(cond, keep=(2,))
            if apply_correction and kind is not BsmKind.AMBIGUOUS:
                u = CORRECTIONS[resource][kind]
                bob = DensityMatrix((2,), u @ bob.mat @ u.conj().T)
        out.append((kind, p, bob))
    return out


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.conj().T)


def teleport(
    input_state,
    resource: BellKind = BellKind.PSI_MINUS,
    bsm: str = "full",
    apply_correction: bool = True,
    rng: np.random.Generator | None = None,
) -> tuple[DensityMatrix, ClassicalMessage]:
    """One sampled teleportation round.

    Returns Bob's state and Alice's classical message.  With the partial
    analyzer an ambiguous outcome is a declared failure: Bob receives his
    uncorrected conditional state and ``message.success`` is False.
    """
    if rng is None:
        rng = np.random.default_rng()
    branches = teleport_outcomes(input_state, resource, bsm, apply_correction)
    p = np.array([b[1] for b in branches])
    cum = np.cumsum(p)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    i = min(i, len(branches) - 1)
    kind, _, bob = branches[i]
    if bsm == "full":
        message = ClassicalMessage(kind, bits=MESSAGE_BITS[kind.bell_kind])
    else:
        message = ClassicalMessage(kind, trit=MESSAGE_TRITS[kind])
    return bob, message


def average_teleport_fidelity(
    input_state,
    resource: BellKind = BellKind.PSI_MINUS,
    apply_correction: bool = True,
) -> float:
    """Branch-probability-weighted fidelity between input and output.

    Without correction the outcome-averaged channel is completely
    depolarizing, so this evaluates to 1/2 for any pure input.
    """
    branches = teleport_outcomes(input_state, resource, "full", apply_correction)
    avg = np.zeros((2, 2), dtype=complex)
    for _, p, bob in branches:
        avg += p * bob.mat
    return fidelity(_as_density(input_state), DensityMatrix((2,), _hermitize(avg)))


# ---------------------------------------------------------------------------
# dense coding

_ENCODING = {
    (0, 0): IDENTITY_2,
    (0, 1): PAULI_X,
    (1, 0): PAULI_Z,
    (1, 1): _XZ,
}


def dense_code(message: tuple[int, int], resource: BellKind = BellKind.PHI_PLUS) -> StateVector:
    """Alice encodes two bits by a local Pauli on her half (qubit 0) of the
    shared pair.  The four encodings are mutually orthogonal Bell states."""
    message = (int(message[0]), int(message[1]))
    if message not in _ENCODING:
        raise ValueError("message must be a pair of bits")
    u = _ENCODING[message]
    amps = bell_state(resource).amps.reshape(2, 2, order="F")  # [qubit0, qubit1]
    encoded = np.einsum("ij,jk->ik", u, amps)
    flat = encoded.reshape(-1, order="F")
    return StateVector((2, 2), flat / np.linalg.norm(flat))


def _decode_map(resource: BellKind) -> dict[BellKind, tuple[int, int]]:
    """Which Bell outcome each message produces, inverted for decoding."""
    table = {}
    for message in _ENCODING:
        encoded = dense_code(message, resource)
        probs = bsm_probabilities(encoded.density())
        kind = max(probs, key=probs.get)
        table[kind] = message
    return table


def dense_decode(
    state,
    bsm: str = "full",
    resource: BellKind = BellKind.PHI_PLUS,
    rng: np.random.Generator | None = None,
) -> tuple[tuple[int, int] | int, float]:
    """Bob's Bell measurement on the encoded pair.

    Returns (decoded message bits, capacity) for the full analyzer or
    (trit, capacity) for the linear-optics one.  Capacity is that of the
    induced noiseless symbol channel: log2(4) = 2 bits, or log2(3) when
    the phi pair merges.
    """
    if rng is None:
        rng = np.random.default_rng()
    if bsm == "full":
        outcome, _ = full_bsm(state, rng)
        symbol = _decode_map(resource)[outcome.kind.bell_kind]
        return symbol, dense_capacity("full")
    if bsm == "partial":
        outcome, _ = partial_bsm(state, rng)
        return MESSAGE_TRITS[outcome.kind], dense_capacity("partial")
    raise ValueError("bsm must be 'full' or 'partial'")


def dense_capacity(bsm: str) -> float:
    """Channel capacity of dense coding with the given analyzer."""
    if bsm == "full":
        return 2.0
    if bsm == "partial":
        return math.log2(3.0)
    raise ValueError("bsm must be 'full' or 'partial'")


# ---------------------------------------------------------------------------
# entanglement swapping


def swap_outcomes(pair12, pair34) -> list[tuple[BsmKind, float, DensityMatrix]]:
    """Branch enumeration of entanglement swapping.

    Qubits (0, 1) hold the first pair and (2, 3) the second; the Bell
    measurement acts on the inner qubits (1, 2).  Returns the outcome,
    its probability, and the conditional joint state of the outer qubits
    (0, 3) for each Bell branch.
    """
    r12 = _as_density(pair12)
    r34 = _as_density(pair34)
    if r12.dims != (2, 2) or r34.dims != (2, 2):
        raise ValueError("both pairs must be two-qubit states")
    total = tensor(r12, r34)
    projectors = _bell_projectors(total.dims, (1, 2))
    out = []
    for kind in BELL_ORDER:
        proj = projectors[kind]
        sub = proj @ total.mat @ proj
        p = float(np.trace(sub).real)
        if p <= 1e-300:
            outer = DensityMatrix((2, 2), np.eye(4) / 4.0)
        else:
            cond = DensityMatrix(total.dims, _hermitize(sub / p))
            outer = partial_trace(cond, keep=(0, 3))
        out.append((BsmKind(kind.value), p, outer))
    return out


def entanglement_swap(
    pair12, pair34, rng: np.random.Generator | None = None
) -> tuple[BsmOutcome, DensityMatrix]:
    """Sampled swapping round: Bell measurement on the inner qubits leaves
    the outer, never-interacted qubits in the corresponding Bell branch."""
    if rng is None:
        rng = np.random.default_rng()
    branches = swap_outcomes(pair12, pair34)
    p = np.array([b[1] for b in branches])
    cum = np.cumsum(p)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    i = min(i, 3)
    kind, prob, outer = branches[i]
    return BsmOutcome(kind, float(prob)), outer
