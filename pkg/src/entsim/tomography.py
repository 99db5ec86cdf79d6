"""Two-qubit state tomography: counts, linear inversion, and maximum
likelihood with a physical (positive, unit-trace) parameterization.

The measurement set pairs each qubit with one of four analyzer states
|0>, |1>, (|0>+|1>)/sqrt(2), (|0>+i|1>)/sqrt(2) -- sixteen joint settings,
each read out through both analyzer ports (four outcomes per setting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .measure import CountTable, pattern_label
from .qcore import (
    BLOCH_X,
    BLOCH_Y,
    BLOCH_Z,
    BlochVector,
    DensityMatrix,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    born_probabilities,
    index_to_pattern,
    projector_from_bloch,
)

#: Analyzer axes whose +1 ports project on |0>, |1>, |+>, |+i>.
_AXES = (
    BLOCH_Z,
    BlochVector(0.0, 0.0, -1.0),
    BLOCH_X,
    BLOCH_Y,
)

TomographySettings = Sequence[tuple[BlochVector, BlochVector]]

_OUTCOME_LABELS = tuple(
    pattern_label(index_to_pattern(i, (2, 2))) for i in range(4)
)


def tomo_settings() -> list[tuple[BlochVector, BlochVector]]:
    """The sixteen standard two-qubit settings, first-qubit-major order."""
    return [(va, vb) for va in _AXES for vb in _AXES]


def simulate_counts(
    rho: DensityMatrix,
    settings: TomographySettings,
    shots_per_setting: int,
    rng: np.random.Generator,
) -> CountTable:
    """Multinomial counts for every setting at ideal detection."""
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be positive")
    table = CountTable({}, 0)
    for sid, (va, vb) in enumerate(settings):
        probs = born_probabilities(rho, (va, vb))
        p = np.fromiter(probs.values(), dtype=float)
        p = p / p.sum()
        draws = rng.multinomial(shots_per_setting, p)
        for idx, c in enumerate(draws):
            if c:
                table.counts[(sid, _OUTCOME_LABELS[idx])] = int(c)
        table.total_gates += shots_per_setting
    table.validate()
    return table


_PAULIS = (IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z)


def _basis_ops() -> np.ndarray:
    """Orthonormal Hermitian basis G_m = (sigma_i x sigma_j)/2, 16 of them."""
    ops = []
    for i in range(4):  # qubit 0
        for j in range(4):  # qubit 1
            ops.append(np.kron(_PAULIS[j], _PAULIS[i]) / 2.0)
    return np.array(ops)


def _projector_stack(settings: TomographySettings) -> np.ndarray:
    """All (setting, outcome) projectors, shape (4*len(settings), 4, 4)."""
    mats = []
    for va, vb in settings:
        for idx in range(4):
            k0, k1 = index_to_pattern(idx, (2, 2))
            mats.append(
                np.kron(projector_from_bloch(vb, k1), projector_from_bloch(va, k0))
            )
    return np.array(mats)


def design_matrix(settings: TomographySettings) -> np.ndarray:
    """Real matrix mapping basis coefficients to outcome probabilities."""
    basis = _basis_ops()
    projs = _projector_stack(settings)
    return np.einsum("rab,mba->rm", projs, basis).real


def _as_weights(counts, settings: TomographySettings) -> np.ndarray:
    """Row-aligned weight vector (counts or probability masses)."""
    if isinstance(counts, CountTable):
        mapping: Mapping = counts.counts
    elif isinstance(counts, Mapping):
        mapping = counts
    else:
        raise TypeError("counts must be a CountTable or a mapping")
    w = np.zeros(4 * len(settings))
    for (sid, label), c in mapping.items():
        if not 0 <= sid < len(settings):
            raise ValueError(f"setting id {sid} out of range")
        if label not in _OUTCOME_LABELS:
            raise ValueError(f"unknown outcome label {label!r}")
        if c < 0:
            raise ValueError("negative count")
        w[4 * sid + _OUTCOME_LABELS.index(label)] = float(c)
    return w


def linear_inversion(counts, settings: TomographySettings | None = None) -> np.ndarray:
    """Least-squares inversion of the measured frequencies.

    Returns a Hermitian, unit-trace matrix that may well have negative
    eigenvalues for finite counts -- deliberately a plain array, not a
    DensityMatrix.
    """
    if settings is None:
        settings = tomo_settings()
    w = _as_weights(counts, settings)
    a = design_matrix(settings)

    rows = []
    y = []
    for sid in range(len(settings)):
        block = w[4 * sid : 4 * sid + 4]
        total = block.sum()
        if total <= 0:
            continue
        for k in range(4):
            rows.append(4 * sid + k)
            y.append(block[k] / total)
    if not rows:
        raise ValueError("no counts provided")
    a_used = a[rows]
    if np.linalg.matrix_rank(a_used, tol=1e-10) < 16:
        raise ValueError("design matrix is singular for the provided settings")
    x, *_ = np.linalg.lstsq(a_used, np.array(y), rcond=None)

    basis = _basis_ops()
    rho = np.tensordot(x, basis, axes=1)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def project_to_physical(mat: np.ndarray) -> DensityMatrix:
    """Clip negative eigenvalues and renormalize."""
    mat = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        return DensityMatrix((2, 2), np.eye(4) / 4.0)
    vals /= vals.sum()
    return DensityMatrix((2, 2), (vecs * vals) @ vecs.conj().T)


@dataclass(frozen=True)
class ReconstructionResult:
    rho: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool


_TRIL_INDICES = [(i, j) for i in range(4) for j in range(i)]


def _t_from_params(t: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[np.arange(4), np.arange(4)] = t[:4]
    for k, (i, j) in enumerate(_TRIL_INDICES):
        m[i, j] = t[4 + 2 * k] + 1j * t[5 + 2 * k]
    return m


def _params_from_t(m: np.ndarray) -> np.ndarray:
    t = np.zeros(16)
    t[:4] = np.diag(m).real
    for k, (i, j) in enumerate(_TRIL_INDICES):
        t[4 + 2 * k] = m[i, j].real
        t[5 + 2 * k] = m[i, j].imag
    return t


def _lower_factor(rho: np.ndarray) -> np.ndarray:
    """Lower-triangular T with T^dagger T = rho (flip-reversed Cholesky)."""
    j = np.eye(4)[::-1]
    l2 = np.linalg.cholesky(j @ rho @ j)
    return (j @ l2 @ j).conj().T


_P_FLOOR = 1e-14


def mle_reconstruct(
    counts,
    settings: TomographySettings | None = None,
    tolerance: float = 1e-9,
    max_iter: int = 10_000,
) -> ReconstructionResult:
    """Maximum-likelihood estimate over physical states.

    The state is parameterized as rho = T^dagger T / tr(T^dagger T) with a
    lower-triangular T, so every iterate is positive and unit-trace.  The
    multinomial log-likelihood is maximized by gradient ascent with a
    Barzilai-Borwein step and backtracking; the likelihood never decreases.
    Converged means the final improvement fell below ``tolerance``.
    """
    if settings is None:
        settings = tomo_settings()
    w = _as_weights(counts, settings)
    if w.sum() <= 0:
        raise ValueError("no counts provided")
    projs = _projector_stack(settings)
    pstack = projs.transpose(0, 2, 1).reshape(len(projs), 16)  # row: vec(Pi^T)

    w_total = w.sum()
    active = w > 0

    def rho_of(tmat):
        m = tmat.conj().T @ tmat
        return m / np.trace(m).real

    def loglike(rho):
        p = np.clip((pstack @ rho.ravel()).real, _P_FLOOR, None)
        return float(np.sum(w[active] * np.log(p[active])))

    def gradient(tmat):
        m = tmat.conj().T @ tmat
        tau = np.trace(m).real
        rho = m / tau
        p = np.clip((pstack @ rho.ravel()).real, _P_FLOOR, None)
        coeff = np.where(active, w / p, 0.0)
        g1 = np.tensordot(coeff, projs, axes=1)
        gmat = (g1 - w_total * np.eye(4)) / tau
        tg = tmat @ gmat
        return _params_from_t(2.0 * tg)  # packs 2*Re diag and 2*(Re, Im) tril

    # start from the projected linear inversion, floored away from the boundary
    try:
        start = project_to_physical(linear_inversion(counts, settings)).mat
    except ValueError:
        start = np.eye(4) / 4.0
    start = (1.0 - 1e-6) * start + 1e-6 * np.eye(4) / 4.0
    tmat = _lower_factor(start)
    x = _params_from_t(tmat)

    ll = loglike(rho_of(_t_from_params(x)))
    g = gradient(_t_from_params(x))
    step = 1.0 / (np.linalg.norm(g) + 1.0)
    x_prev = None
    g_prev = None
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        if x_prev is not None:
            s = x - x_prev
            yv = g - g_prev
            denom = float(s @ yv)
            if abs(denom) > 1e-300:
                step = abs(float(s @ s) / denom)
            step = min(max(step, 1e-12), 1e6)

        gnorm2 = float(g @ g)
        if gnorm2 == 0.0:
            converged = True
            break
        trial_step = step
        improved = False
        for _ in range(60):
            x_new = x + trial_step * g
            ll_new = loglike(rho_of(_t_from_params(x_new)))
            if ll_new >= ll:  # never let the likelihood decrease
                improved = True
                break
            trial_step *= 0.5
        if not improved:
            converged = True
            break

        x_prev, g_prev = x, g
        x = x_new
        gain = ll_new - ll
        ll = ll_new
        g = gradient(_t_from_params(x))
        if gain < tolerance:
            converged = True
            break

    rho = rho_of(_t_from_params(x))
    rho = 0.5 * (rho + rho.conj().T)
    return ReconstructionResult(
        rho=DensityMatrix((2, 2), rho),
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
    )


def log_likelihood(counts, rho: DensityMatrix, settings: TomographySettings | None = None) -> float:
    """Multinomial log-likelihood of a candidate state for the given counts."""
    if settings is None:
        settings = tomo_settings()
    w = _as_weights(counts, settings)
    projs = _projector_stack(settings)
    pstack = projs.transpose(0, 2, 1).reshape(len(projs), 16)
    p = np.clip((pstack @ rho.mat.ravel()).real, _P_FLOOR, None)
    active = w > 0
    return float(np.sum(w[active] * np.log(p[active])))


def write_matrix(mat: np.ndarray, out) -> None:
    """Delimited export of a matrix: columns row, col, re, im."""
    close = False
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        out = open(out, "w", encoding="utf-8")
        close = True
    try:
        out.write("row,col,re,im\n")
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                out.write(f"{i},{j},{mat[i, j].real:.12g},{mat[i, j].imag:.12g}\n")
    finally:
        if close:
            out.close()
