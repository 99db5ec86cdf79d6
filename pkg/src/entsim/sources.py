"""Entangled-state and pair-source factories.

Bell-state sign convention: psi+- = (|01> +- |10>)/sqrt(2) and
phi+- = (|00> +- |11>)/sqrt(2), so psi- is the rotationally invariant
singlet.  Kets list qubits in declaration order, |01> meaning qubit 0
in 0 and qubit 1 in 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import DensityMatrix, StateVector, pattern_to_index

SQRT_HALF = 1.0 / math.sqrt(2.0)


class BellKind(enum.Enum):
    PSI_MINUS = "psi-minus"
    PSI_PLUS = "psi-plus"
    PHI_MINUS = "phi-minus"
    PHI_PLUS = "phi-plus"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def bell_state(kind: BellKind) -> StateVector:
    """One of the four two-qubit Bell states."""
    dims = (2, 2)
    amps = np.zeros(4, dtype=complex)
    if kind in (BellKind.PSI_MINUS, BellKind.PSI_PLUS):
        sign = -1.0 if kind is BellKind.PSI_MINUS else 1.0
        amps[pattern_to_index((0, 1), dims)] = SQRT_HALF
        amps[pattern_to_index((1, 0), dims)] = sign * SQRT_HALF
    elif kind in (BellKind.PHI_MINUS, BellKind.PHI_PLUS):
        sign = -1.0 if kind is BellKind.PHI_MINUS else 1.0
        amps[pattern_to_index((0, 0), dims)] = SQRT_HALF
        amps[pattern_to_index((1, 1), dims)] = sign * SQRT_HALF
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown Bell kind {kind}")
    return StateVector(dims, amps)


def nonmax_state(alpha: float, phi: float = 0.0) -> StateVector:
    """Partially entangled pure state alpha|00> + sqrt(1-alpha^2) e^{i phi}|11>."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not math.isfinite(phi):
        raise ValueError("phi must be finite")
    beta = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    amps = np.zeros(4, dtype=complex)
    amps[0] = alpha
    amps[3] = beta * np.exp(1j * phi)
    return StateVector((2, 2), amps)


def werner(visibility: float) -> DensityMatrix:
    """Singlet mixed with white noise: v |psi-><psi-| + (1-v) I/4."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    singlet = bell_state(BellKind.PSI_MINUS)
    mat = visibility * np.outer(singlet.amps, singlet.amps.conj())
    mat += (1.0 - visibility) * np.eye(4) / 4.0
    return DensityMatrix((2, 2), mat)


def _normalize_pattern(pattern, n: int) -> tuple[int, ...]:
    if isinstance(pattern, str):
        pattern = tuple(int(c) for c in pattern)
    pattern = tuple(int(b) for b in pattern)
    if len(pattern) != n:
        raise ValueError(f"pattern length {len(pattern)} does not match n = {n}")
    if any(b not in (0, 1) for b in pattern):
        raise ValueError("pattern entries must be 0 or 1")
    return pattern


def ghz(n: int, patterns: Sequence | None = None) -> StateVector:
    """n-qubit GHZ-class state (|p1> + |p2>)/sqrt(2) for complementary patterns.

    Defaults to (|0..0> + |1..1>)/sqrt(2).  The two patterns must differ in
    every position, so each single-qubit reduction is maximally mixed.
    """
    if n < 2:
        raise ValueError("GHZ states need at least 2 qubits")
    if patterns is None:
        p1, p2 = (0,) * n, (1,) * n
    else:
        if len(patterns) != 2:
            raise ValueError("patterns must be a pair")
        p1 = _normalize_pattern(patterns[0], n)
        p2 = _normalize_pattern(patterns[1], n)
    if any(a == b for a, b in zip(p1, p2)):
        raise ValueError("patterns must be complementary in every position")
    dims = (2,) * n
    amps = np.zeros(2**n, dtype=complex)
    amps[pattern_to_index(p1, dims)] = SQRT_HALF
    amps[pattern_to_index(p2, dims)] = SQRT_HALF
    return StateVector(dims, amps)


@dataclass(frozen=True)
class SourceModel:
    """Photon-pair source: mean pairs per pulse and pair visibility.

    ``distribution`` selects the pair-number statistics: "poisson" for the
    usual down-conversion model at low gain, or "thermal" (Bose-Einstein)
    for a single-mode source.
    """

    mu: float = 0.1
    visibility: float = 1.0
    distribution: str = "poisson"

    def __post_init__(self) -> None:
        if self.mu < 0.0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.distribution not in ("poisson", "thermal"):
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def pair_state(self) -> DensityMatrix:
        return werner(self.visibility)

    def pair_count(self, rng: np.random.Generator) -> int:
        if self.distribution == "poisson":
            return int(rng.poisson(self.mu))
        # thermal: P(n) = mu^n / (1+mu)^(n+1), geometric with p = 1/(1+mu)
        return int(rng.geometric(1.0 / (1.0 + self.mu)) - 1)


def poisson_pair_count(mu: float, rng: np.random.Generator) -> int:
    """Number of pairs in one pulse for a Poissonian source."""
    if mu < 0.0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    return int(rng.poisson(mu))
