"""Local filtering: Procrustean entanglement concentration and states whose
nonlocality is revealed only after filtering.

A local filter is a pair of single-qubit operators with operator norm at
most 1 (each realizable as one arm of a generalized measurement).  The
filtered state is (A x B) rho (A x B)^dagger / p with p the success
probability of the double transmission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .belltest import chsh_optimize, correlation_matrix_bound
from .qcore import DensityMatrix, IDENTITY_2, StateVector
from .sources import nonmax_state


@dataclass(frozen=True)
class LocalFilter:
    """One 2x2 filter operator per side; operator norms must not exceed 1."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        for name, m in (("a", a), ("b", b)):
            if m.shape != (2, 2):
                raise ValueError(f"filter {name} must be 2x2")
            if np.linalg.norm(m, 2) > 1.0 + 1e-12:
                raise ValueError(f"filter {name} has operator norm above 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def joint(self) -> np.ndarray:
        return np.kron(self.b, self.a)  # qubit 0 least significant


def local_filter(rho, filt: LocalFilter) -> tuple[DensityMatrix, float]:
    """Apply the filter; returns (normalized state, success probability)."""
    if isinstance(rho, StateVector):
        rho = rho.density()
    if rho.dims != (2, 2):
        raise ValueError("local filtering is defined for two-qubit states")
    f = filt.joint()
    out = f @ rho.mat @ f.conj().T
    p = float(np.trace(out).real)
    if p <= 1e-12:
        raise ValueError("filter success probability vanishes for this state")
    out = 0.5 * (out + out.conj().T) / p
    return DensityMatrix((2, 2), out), p


def procrustean_filter_for(alpha: float) -> LocalFilter:
    """Filter turning nonmax_state(alpha) into a maximally entangled state.

    Attenuates the majority amplitude on one side only.  Success
    probability is 2(1 - alpha^2) for alpha >= 1/sqrt(2), and 2 alpha^2
    below; alpha = 1/sqrt(2) yields the identity filter.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    beta = math.sqrt(1.0 - alpha * alpha)
    if alpha >= beta:
        a = np.diag([beta / alpha, 1.0])
    else:
        a = np.diag([1.0, alpha / beta])
    return LocalFilter(a=a, b=IDENTITY_2.copy())


@dataclass(frozen=True)
class DistillationReport:
    s_initial: float
    s_filtered: float
    success_probability: float
    filter: LocalFilter


#: Tuned family member: entanglement strength of the pure part.
HIDDEN_FAMILY_ALPHA = 0.45
#: Default mixing weight of the aligned product noise.
HIDDEN_FAMILY_WEIGHT = 0.2


def hidden_family(weight: float = HIDDEN_FAMILY_WEIGHT, alpha: float = HIDDEN_FAMILY_ALPHA) -> DensityMatrix:
    """(1-w) |psi_alpha><psi_alpha| + w |01><01|.

    The product noise is aligned so a one-sided filter suppresses it
    together with the majority amplitude of the pure part.  At the default
    parameters the unfiltered state satisfies S < 2 while a local filter
    lifts it well above.
    """
    if not 0.0 <= weight < 1.0:
        raise ValueError("weight must lie in [0, 1)")
    pure = nonmax_state(alpha)
    noise = np.zeros((4, 4), dtype=complex)
    noise[2, 2] = 1.0  # pattern (0, 1)
    mat = (1.0 - weight) * np.outer(pure.amps, pure.amps.conj()) + weight * noise
    return DensityMatrix((2, 2), mat)


def best_diagonal_filter(
    rho: DensityMatrix, grid: int = 40
) -> tuple[LocalFilter, float, float]:
    """Search diag(1, t) x diag(1, s), t, s in (0, 1], for the largest
    post-filter CHSH value.  Grid scan refined by a bounded local search;
    returns (filter, S after filtering, success probability).
    """
    ts = np.linspace(1.0 / grid, 1.0, grid)

    def s_after(t, s):
        f = np.kron(np.diag([1.0, s]), np.diag([1.0, t]))
        out = f @ rho.mat @ f.conj().T
        p = np.trace(out).real
        if p <= 1e-12:
            return -1.0, 0.0
        out = 0.5 * (out + out.conj().T) / p
        return correlation_matrix_bound(DensityMatrix((2, 2), out)), p

    best = (-1.0, 1.0, 1.0)
    for t in ts:
        for s in ts:
            val, _ = s_after(t, s)
            if val > best[0]:
                best = (val, t, s)

    res = minimize(
        lambda x: -s_after(x[0], x[1])[0],
        [best[1], best[2]],
        method="L-BFGS-B",
        bounds=[(1e-3, 1.0), (1e-3, 1.0)],
    )
    t_opt, s_opt = (res.x if -res.fun >= best[0] else (best[1], best[2]))
    filt = LocalFilter(a=np.diag([1.0, t_opt]), b=np.diag([1.0, s_opt]))
    _, p = s_after(t_opt, s_opt)
    s_val, _ = s_after(t_opt, s_opt)
    return filt, float(s_val), float(p)


def hidden_nonlocality_demo(weight: float = HIDDEN_FAMILY_WEIGHT) -> DistillationReport | None:
    """Exhibit hidden nonlocality in the tuned family, if present.

    Returns a report whose unfiltered S is below 2 and filtered S above,
    or None when no filter in the searched family achieves a violation.
    """
    rho = hidden_family(weight)
    s_initial = chsh_optimize(rho).s_value
    filt, s_filtered, p = best_diagonal_filter(rho)
    if s_filtered <= 2.0:
        return None
    filtered, p_exact = local_filter(rho, filt)
    s_filtered = chsh_optimize(filtered).s_value
    return DistillationReport(
        s_initial=float(s_initial),
        s_filtered=float(s_filtered),
        success_probability=float(p_exact),
        filter=filt,
    )
