"""CHSH and Mermin nonlocality tests, loophole thresholds, timing bounds.

The CHSH combination used everywhere is

    S = |E(a,b) - E(a,b')| + |E(a',b') + E(a',b)|

with local-hidden-variable bound 2 and quantum maximum 2*sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .measure import (
    CountTable,
    DetectorModel,
    IDEAL_DETECTOR,
    correlation,
    estimate_correlation,
    joint_expectation,
)
from .qcore import (
    BLOCH_X,
    BLOCH_Y,
    BlochVector,
    DensityMatrix,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    StateVector,
    born_probabilities,
)

LHV_BOUND = 2.0
TSIRELSON = 2.0 * math.sqrt(2.0)

#: Rounded vacuum light speed used for the timing bounds, m/s.
SPEED_OF_LIGHT = 3.0e8

MERMIN_LHV_BOUND = 2.0


@dataclass(frozen=True)
class ChshSettings:
    a: BlochVector
    a_prime: BlochVector
    b: BlochVector
    b_prime: BlochVector

    @classmethod
    def canonical(cls) -> "ChshSettings":
        """Polarization angles 0 and 45 deg for a, 22.5 and 67.5 deg for b."""
        return cls(
            a=BlochVector.from_polarization(0.0),
            a_prime=BlochVector.from_polarization(math.pi / 4),
            b=BlochVector.from_polarization(math.pi / 8),
            b_prime=BlochVector.from_polarization(3 * math.pi / 8),
        )

    def as_tuple(self) -> tuple[BlochVector, BlochVector, BlochVector, BlochVector]:
        return (self.a, self.a_prime, self.b, self.b_prime)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of a Bell-type test: the value, the settings that produced
    it, whether the LHV bound is beaten, and (for sampled runs) the margin
    in standard deviations."""

    s_value: float
    settings: ChshSettings | None
    violated: bool
    sigma_margin: float | None = None
    counts: CountTable | None = None


def _combine(e_ab, e_abp, e_apbp, e_apb) -> float:
    return abs(e_ab - e_abp) + abs(e_apbp + e_apb)


def chsh(rho: DensityMatrix, settings: ChshSettings) -> BoundReport:
    """Analytic CHSH value of a two-qubit state at fixed settings."""
    e = [
        correlation(rho, settings.a, settings.b),
        correlation(rho, settings.a, settings.b_prime),
        correlation(rho, settings.a_prime, settings.b_prime),
        correlation(rho, settings.a_prime, settings.b),
    ]
    s = _combine(*e)
    return BoundReport(s, settings, s > LHV_BOUND)


def chsh_estimate(
    rho: DensityMatrix,
    settings: ChshSettings,
    shots: int,
    detector: DetectorModel = IDEAL_DETECTOR,
    rng: np.random.Generator | None = None,
    workers: int = 1,
) -> BoundReport:
    """Monte Carlo CHSH estimate; shots are per setting pair.

    sigma_margin is (S - 2) over the propagated standard error.
    """
    if rng is None:
        rng = np.random.default_rng()
    pairs = [
        (settings.a, settings.b),
        (settings.a, settings.b_prime),
        (settings.a_prime, settings.b_prime),
        (settings.a_prime, settings.b),
    ]
    values, variances = [], []
    merged = CountTable({}, 0)
    for sid, (va, vb) in enumerate(pairs):
        est = estimate_correlation(
            rho, va, vb, shots, detector, rng, workers=workers, setting_id=sid
        )
        values.append(est.value)
        variances.append(est.std_err**2)
        merged.add(est.counts)
    s = _combine(*values)
    sigma = math.sqrt(sum(variances))
    margin = (s - LHV_BOUND) / sigma if sigma > 0 else float("inf")
    return BoundReport(s, settings, s > LHV_BOUND, margin, merged)


def correlation_tensor(rho: DensityMatrix) -> np.ndarray:
    """3x3 matrix T_ij = <sigma_i x sigma_j>."""
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    t = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            t[i, j] = np.trace(rho.mat @ np.kron(sj, si)).real
    return t


def correlation_matrix_bound(rho: DensityMatrix) -> float:
    """Exact CHSH maximum 2*sqrt(m1 + m2) from the correlation tensor,
    m1, m2 being the two largest eigenvalues of T^T T."""
    t = correlation_tensor(rho)
    w = np.linalg.eigvalsh(t.T @ t)
    return 2.0 * math.sqrt(max(0.0, w[-1] + w[-2]))


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else fallback


def _bloch_from_array(v: np.ndarray) -> BlochVector:
    v = v / np.linalg.norm(v)
    return BlochVector(float(v[0]), float(v[1]), float(v[2]))


def chsh_optimize(rho: DensityMatrix, grid_deg: float = 15.0) -> BoundReport:
    """Maximize S over all four analyzer axes.

    For fixed b, b' the optimal a, a' align with T(b -+ b'), giving
    S(b,b') = |T(b-b')| + |T(b+b')|.  That surface is scanned on a
    grid (default 15 deg in each spherical angle) and polished with a
    local simplex search; deterministic and seedless.
    """
    t = correlation_tensor(rho)

    thetas = np.arange(0.0, 180.0 + 0.5 * grid_deg, grid_deg) * math.pi / 180.0
    phis = np.arange(0.0, 360.0, grid_deg) * math.pi / 180.0
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    dirs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    tb = dirs @ t.T
    diff = np.linalg.norm(tb[:, None, :] - tb[None, :, :], axis=-1)
    summ = np.linalg.norm(tb[:, None, :] + tb[None, :, :], axis=-1)
    grid_s = diff + summ
    i, j = np.unravel_index(np.argmax(grid_s), grid_s.shape)

    def angles_of(v):
        v = v / max(np.linalg.norm(v), 1e-300)
        return [math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0])]

    def neg_s(x):
        b = np.array(
            [math.sin(x[0]) * math.cos(x[1]), math.sin(x[0]) * math.sin(x[1]), math.cos(x[0])]
        )
        bp = np.array(
            [math.sin(x[2]) * math.cos(x[3]), math.sin(x[2]) * math.sin(x[3]), math.cos(x[2])]
        )
        return -(np.linalg.norm(t @ (b - bp)) + np.linalg.norm(t @ (b + bp)))

    x0 = np.array(angles_of(dirs[i]) + angles_of(dirs[j]))
    res = minimize(
        neg_s,
        x0,
        method="Nelder-Mead",
        options=dict(xatol=1e-9, fatol=1e-12, maxiter=4000, maxfev=8000),
    )
    best = -res.fun
    if grid_s[i, j] > best:  # polish should never lose to the grid
        best = float(grid_s[i, j])
        res.x = x0

    bx = res.x
    b = np.array(
        [math.sin(bx[0]) * math.cos(bx[1]), math.sin(bx[0]) * math.sin(bx[1]), math.cos(bx[0])]
    )
    bp = np.array(
        [math.sin(bx[2]) * math.cos(bx[3]), math.sin(bx[2]) * math.sin(bx[3]), math.cos(bx[2])]
    )
    z = np.array([0.0, 0.0, 1.0])
    a_dir = _unit(t @ (b - bp), z)
    ap_dir = _unit(t @ (b + bp), z)
    settings = ChshSettings(
        a=_bloch_from_array(a_dir),
        a_prime=_bloch_from_array(ap_dir),
        b=_bloch_from_array(b),
        b_prime=_bloch_from_array(bp),
    )
    return BoundReport(float(best), settings, best > LHV_BOUND)


def mermin3(
    rho: DensityMatrix,
    settings: tuple[tuple[BlochVector, BlochVector], ...] | None = None,
) -> float:
    """Three-party Mermin combination

        M = E(a1 b2 b3) + E(b1 a2 b3) + E(b1 b2 a3) - E(a1 a2 a3)

    with per-party setting pairs (a_i, b_i); defaults a_i = x, b_i = y.
    |M| <= 2 for any local-hidden-variable model, while GHZ states reach 4.
    """
    if rho.dims != (2, 2, 2):
        raise ValueError("mermin3 is defined for three-qubit states")
    if settings is None:
        settings = ((BLOCH_X, BLOCH_Y),) * 3
    if len(settings) != 3:
        raise ValueError("need a setting pair for each of the three parties")
    (a1, b1), (a2, b2), (a3, b3) = settings
    return (
        joint_expectation(rho, (a1, b2, b3))
        + joint_expectation(rho, (b1, a2, b3))
        + joint_expectation(rho, (b1, b2, a3))
        - joint_expectation(rho, (a1, a2, a3))
    )


def diagonal_coincidence_profile(state: StateVector) -> dict[str, float]:
    """Coincidence probabilities with every analyzer at +-45 degrees.

    P marks the +45 port ((|0>+|1>)/sqrt(2)), M the -45 port.  Keys cover
    all 2^n patterns, e.g. 'PMM'.
    """
    n = state.num_subsystems
    probs = born_probabilities(state.density(), (BLOCH_X,) * n)
    table = {}
    for pattern, p in probs.items():
        key = "".join("P" if b == 0 else "M" for b in pattern)
        table[key] = p
    return table


# ---------------------------------------------------------------------------
# detection-efficiency threshold


def _best_s_with_losses(alpha: float, eta: float, grid: int = 24) -> float:
    """Best CHSH value for nonmax_state(alpha) when undetected particles are
    assigned the +1 outcome at both stations.

    E_eff = eta^2 E + eta(1-eta)(mA + mB) + (1-eta)^2, with the analyzers
    restricted to the x-z plane (optimal for this real state family).
    """
    beta = math.sqrt(1.0 - alpha * alpha)
    txx = 2.0 * alpha * beta
    mz = alpha * alpha - beta * beta

    th = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    cos, sin = np.cos(th), np.sin(th)
    e_q = cos[:, None] * cos[None, :] + txx * sin[:, None] * sin[None, :]
    marg = mz * cos
    e_eff = (
        eta * eta * e_q
        + eta * (1.0 - eta) * (marg[:, None] + marg[None, :])
        + (1.0 - eta) ** 2
    )
    term1 = np.abs(e_eff[:, None, :, None] - e_eff[:, None, None, :])
    term2 = np.abs(e_eff[None, :, None, :] + e_eff[None, :, :, None])
    s_grid = term1 + term2
    idx = np.unravel_index(np.argmax(s_grid), s_grid.shape)
    x0 = np.array([th[k] for k in idx])

    def e_one(ta, tb):
        return (
            eta * eta * (math.cos(ta) * math.cos(tb) + txx * math.sin(ta) * math.sin(tb))
            + eta * (1.0 - eta) * mz * (math.cos(ta) + math.cos(tb))
            + (1.0 - eta) ** 2
        )

    def neg_s(x):
        ta, tap, tb, tbp = x
        return -(
            abs(e_one(ta, tb) - e_one(ta, tbp)) + abs(e_one(tap, tbp) + e_one(tap, tb))
        )

    res = minimize(neg_s, x0, method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-13))
    return max(float(-res.fun), float(s_grid[idx]))


#: alpha of the maximally entangled family member.
ALPHA_MAXIMAL = 1.0 / math.sqrt(2.0)


def critical_efficiency(alpha: float = ALPHA_MAXIMAL, tol: float = 1e-4) -> float:
    """Smallest detection efficiency at which nonmax_state(alpha) still
    violates CHSH when non-detections count as +1 outcomes.

    alpha defaults to 1/sqrt(2), the maximally entangled member, whose
    threshold is 2/(1+sqrt(2)) ~ 0.8284.  Weakly entangled members push
    the threshold down toward 2/3.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    lo, hi = 0.5, 1.0
    if _best_s_with_losses(alpha, hi) <= LHV_BOUND + 1e-9:
        raise ValueError(f"no violation even at unit efficiency for alpha = {alpha}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _best_s_with_losses(alpha, mid) > LHV_BOUND + 1e-12:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


DEFAULT_ALPHA_SWEEP = (0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, ALPHA_MAXIMAL)


def threshold_sweep(
    alphas: tuple[float, ...] = DEFAULT_ALPHA_SWEEP, tol: float = 1e-4
) -> list[tuple[float, float]]:
    """Critical efficiency along a family of entanglement strengths."""
    return [(a, critical_efficiency(a, tol)) for a in alphas]


def speed_lower_bound(separation_m: float, timing_uncertainty_s: float) -> float:
    """Lower bound, in multiples of c, on the speed any hypothetical
    influence would need to connect two detection events."""
    if separation_m <= 0.0:
        raise ValueError("separation must be positive")
    if timing_uncertainty_s <= 0.0:
        raise ValueError("timing uncertainty must be positive")
    return (separation_m / timing_uncertainty_s) / SPEED_OF_LIGHT
