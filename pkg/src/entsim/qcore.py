"""Dense linear-algebra core for small multi-qubit (and qudit) registers.

Conventions used throughout the package:

* A register is described by a ``dims`` sequence, one local dimension per
  subsystem, in declaration order.
* Flat indices are little-endian over ``dims``: subsystem 0 is the least
  significant digit, so pattern ``(k0, k1, ..)`` lives at flat index
  ``k0 + k1*d0 + k2*d0*d1 + ...``  Outcome patterns always index
  subsystems in declaration order.
* ``tensor(a, b)`` appends ``b``'s subsystems after ``a``'s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# tolerance tiers: exact algebra, positivity slack, unitarity slack
ATOL_ALGEBRA = 1e-12
ATOL_PSD = 1e-9
ATOL_UNITARY = 1e-10

Outcome = tuple[int, ...]


def pattern_to_index(pattern: Sequence[int], dims: Sequence[int]) -> int:
    """Flat index of an outcome pattern (little-endian over dims)."""
    if len(pattern) != len(dims):
        raise ValueError("pattern length does not match register size")
    idx = 0
    stride = 1
    for k, d in zip(pattern, dims):
        if not 0 <= k < d:
            raise ValueError(f"pattern entry {k} out of range for dimension {d}")
        idx += k * stride
        stride *= d
    return idx


def index_to_pattern(index: int, dims: Sequence[int]) -> Outcome:
    """Inverse of :func:`pattern_to_index`."""
    pattern = []
    for d in dims:
        pattern.append(index % d)
        index //= d
    if index:
        raise ValueError("index out of range for register")
    return tuple(pattern)


def all_outcomes(dims: Sequence[int]) -> list[Outcome]:
    """All outcome patterns in flat-index order."""
    return [index_to_pattern(i, dims) for i in range(int(np.prod(dims)))]


@dataclass(frozen=True)
class BlochVector:
    """Unit vector on the Bloch sphere selecting a qubit analyzer axis."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"Bloch vector must be unit length, got |v| = {norm}")

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "BlochVector":
        """Polar angle theta from +z, azimuth phi from +x."""
        return cls(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )

    @classmethod
    def from_polarization(cls, chi: float) -> "BlochVector":
        """Axis of a linear-polarization analyzer at angle chi (radians).

        The transmitted port projects onto cos(chi)|0> + sin(chi)|1>, which
        sits at Bloch angle 2*chi in the x-z plane.
        """
        return cls.from_angles(2.0 * chi)

    @property
    def arr(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def operator(self) -> np.ndarray:
        """The observable v . sigma with eigenvalues +-1."""
        return self.x * PAULI_X + self.y * PAULI_Y + self.z * PAULI_Z


BLOCH_X = BlochVector(1.0, 0.0, 0.0)
BLOCH_Y = BlochVector(0.0, 1.0, 0.0)
BLOCH_Z = BlochVector(0.0, 0.0, 1.0)


def projector_from_bloch(v: BlochVector, outcome: int = 0) -> np.ndarray:
    """Rank-1 projector for the +1 (outcome 0) or -1 (outcome 1) port."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    sign = 1.0 if outcome == 0 else -1.0
    return 0.5 * (IDENTITY_2 + sign * v.operator())


def _as_dims(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 2 for d in out):
        raise ValueError("dims must be a non-empty sequence of integers >= 2")
    return out


@dataclass(frozen=True)
class StateVector:
    """Pure state of a register: dims plus a normalized amplitude array."""

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        dims = _as_dims(self.dims)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1).copy()
        if amps.size != int(np.prod(dims)):
            raise ValueError("amplitude count does not match dims")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"state vector not normalized: |psi| = {norm}")
        amps.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amps, self.amps.conj()))

    def amplitude(self, pattern: Sequence[int]) -> complex:
        return complex(self.amps[pattern_to_index(pattern, self.dims)])


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: Hermitian, unit-trace, positive semidefinite matrix."""

    dims: tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self) -> None:
        dims = _as_dims(self.dims)
        n = int(np.prod(dims))
        mat = np.asarray(self.mat, dtype=complex).copy()
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL_ALGEBRA:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"density matrix trace is {tr}, expected 1")
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] < -ATOL_PSD:
            raise ValueError(f"density matrix has negative eigenvalue {eigs[0]}")
        mat.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)


def tensor(a, b):
    """Composite of two states; b's subsystems are appended after a's.

    Accepts two StateVectors or two DensityMatrix instances.  In the
    little-endian flat layout the later (more significant) factor goes
    first in the Kronecker product.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(a.dims + b.dims, np.kron(b.amps, a.amps))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(a.dims + b.dims, np.kron(b.mat, a.mat))
    raise TypeError("tensor expects two StateVectors or two DensityMatrices")


def _mat_as_tensor(mat: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Reshape a flat operator into per-subsystem axes.

    Returns shape dims + dims with axis j acting on subsystem j (rows)
    and axis n+j on subsystem j (columns).
    """
    n = len(dims)
    rev = tuple(reversed(dims))
    t = mat.reshape(rev + rev)
    perm = tuple(n - 1 - j for j in range(n)) + tuple(2 * n - 1 - j for j in range(n))
    return t.transpose(perm)


def _tensor_as_mat(t: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    n = len(dims)
    size = int(np.prod(dims))
    perm = tuple(n - 1 - j for j in range(n)) + tuple(2 * n - 1 - j for j in range(n))
    return t.transpose(perm).reshape(size, size)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems appear in ascending order of their original index.
    """
    keep_sorted = sorted(set(int(k) for k in keep))
    n = rho.num_subsystems
    if not keep_sorted:
        raise ValueError("keep must name at least one subsystem")
    if keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise ValueError(f"keep indices out of range for {n} subsystems")

    t = _mat_as_tensor(rho.mat, rho.dims)
    traced = [j for j in range(n) if j not in keep_sorted]
    # contract row axis against col axis for each traced subsystem
    for j in sorted(traced, reverse=True):
        t = np.trace(t, axis1=j, axis2=t.ndim // 2 + j)
    new_dims = tuple(rho.dims[j] for j in keep_sorted)
    return DensityMatrix(new_dims, _tensor_as_mat(t, new_dims))


def apply_local_unitary(rho: DensityMatrix, u: np.ndarray, target: int) -> DensityMatrix:
    """Conjugate one subsystem by a unitary, leaving the rest untouched."""
    n = rho.num_subsystems
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} subsystems")
    d = rho.dims[target]
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"unitary shape {u.shape} does not match subsystem dimension {d}")
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > ATOL_UNITARY:
        raise ValueError("matrix is not unitary within tolerance")

    big = expand_operator(u, rho.dims, (target,))
    return DensityMatrix(rho.dims, big @ rho.mat @ big.conj().T)


def expand_operator(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Embed an operator on selected subsystems into the full register.

    ``op`` is given over the composite of ``targets`` using the package's
    little-endian layout with the targets in listed order.  Built by
    explicit index bookkeeping so it is correct for any target placement.
    """
    dims = tuple(dims)
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    if any(t < 0 or t >= len(dims) for t in targets):
        raise ValueError("target index out of range")
    tdims = tuple(dims[t] for t in targets)
    td = int(np.prod(tdims))
    op = np.asarray(op, dtype=complex)
    if op.shape != (td, td):
        raise ValueError(f"operator shape {op.shape} does not match targets {targets}")

    size = int(np.prod(dims))
    patterns = np.array([index_to_pattern(i, dims) for i in range(size)])
    tstride = np.cumprod((1,) + tdims[:-1])
    tidx = patterns[:, list(targets)] @ tstride
    rest = [j for j in range(len(dims)) if j not in targets]
    if rest:
        rdims = tuple(dims[j] for j in rest)
        rstride = np.cumprod((1,) + rdims[:-1])
        ridx = patterns[:, rest] @ rstride
    else:
        ridx = np.zeros(size, dtype=int)

    full = np.zeros((size, size), dtype=complex)
    for r in range(int(np.prod([dims[j] for j in rest])) if rest else 1):
        members = np.nonzero(ridx == r)[0]
        members = members[np.argsort(tidx[members])]
        full[np.ix_(members, members)] = op
    return full


def born_probabilities(
    rho: DensityMatrix, settings: Sequence[BlochVector]
) -> dict[Outcome, float]:
    """Outcome distribution for per-qubit analyzers along the given axes.

    Outcome 0 at qubit j is the +1 port of ``settings[j]``.  Keys run in
    flat-index order; probabilities are clipped at 0 and sum to 1 within
    1e-9.
    """
    n = rho.num_subsystems
    if any(d != 2 for d in rho.dims):
        raise ValueError("analyzer measurements are defined for qubit registers")
    if len(settings) != n:
        raise ValueError(f"need {n} analyzer axes, got {len(settings)}")

    # rotate each qubit into its analyzer eigenbasis, then read the diagonal
    rot = np.array([[1.0]], dtype=complex)
    for v in settings:
        theta = math.acos(max(-1.0, min(1.0, v.z)))
        phi = math.atan2(v.y, v.x)
        u = np.array(
            [
                [math.cos(theta / 2), np.exp(-1j * phi) * math.sin(theta / 2)],
                [math.sin(theta / 2), -np.exp(-1j * phi) * math.cos(theta / 2)],
            ],
            dtype=complex,
        )
        rot = np.kron(u, rot)  # later qubits are more significant
    diag = np.einsum("ij,jk,ik->i", rot, rho.mat, rot.conj()).real
    probs = np.clip(diag, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, expected 1")
    return {index_to_pattern(i, rho.dims): float(p) for i, p in enumerate(probs)}


def sample_outcome(probabilities: Mapping[Outcome, float], rng: np.random.Generator) -> Outcome:
    """Draw one outcome pattern; iteration order fixes the inverse-CDF order."""
    outcomes = list(probabilities.keys())
    p = np.fromiter(probabilities.values(), dtype=float)
    if p.min() < -ATOL_PSD:
        raise ValueError("negative probability")
    cum = np.cumsum(p)
    if abs(cum[-1] - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return outcomes[min(i, len(outcomes) - 1)]


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a, b) -> float:
    """Fidelity between two states (Uhlmann for mixed inputs), in [0, 1]."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        f = abs(np.vdot(a.amps, b.amps)) ** 2
    elif isinstance(a, StateVector) and isinstance(b, DensityMatrix):
        f = np.real(a.amps.conj() @ b.mat @ a.amps)
    elif isinstance(b, StateVector) and isinstance(a, DensityMatrix):
        f = np.real(b.amps.conj() @ a.mat @ b.amps)
    elif isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        ra = _sqrtm_psd(a.mat)
        w = np.clip(np.linalg.eigvalsh(ra @ b.mat @ ra), 0.0, None)
        # rank-deficiency noise (~1e-16) would be amplified to ~1e-8 by the root
        w[w < 1e-13] = 0.0
        f = np.sum(np.sqrt(w)) ** 2
    else:
        raise TypeError("fidelity expects StateVector or DensityMatrix arguments")
    return float(min(1.0, max(0.0, float(f))))
