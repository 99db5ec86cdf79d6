"""Analyzer settings, detector models, and correlation estimation.

Monte Carlo estimators accept a ``workers`` argument.  Shots are split
into ``workers`` contiguous chunks, each driven by its own child stream
spawned from the caller's generator, and the per-chunk count tables are
merged additively.  Results are therefore bit-identical for a fixed
(seed, workers) pair regardless of execution order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .qcore import (
    BlochVector,
    DensityMatrix,
    born_probabilities,
    index_to_pattern,
)

#: One analyzer axis per qubit.
AnalyzerSetting = Sequence[BlochVector]


@dataclass(frozen=True)
class DetectorModel:
    """Per-station detection: efficiency, dark-count probability per gate,
    and number of physical detectors (2 for an active analyzer, 4 for a
    passive dual-basis receiver)."""

    eta: float = 1.0
    p_dark: float = 0.0
    n_det: int = 2

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.p_dark < 1.0:
            raise ValueError(f"p_dark must lie in [0, 1), got {self.p_dark}")
        if self.n_det < 1:
            raise ValueError("n_det must be at least 1")


IDEAL_DETECTOR = DetectorModel()


@dataclass
class CountTable:
    """Raw coincidence counts keyed by (setting id, outcome pattern string)."""

    counts: dict[tuple[int, str], int] = field(default_factory=dict)
    total_gates: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for (sid, pattern), c in self.counts.items():
            if c < 0:
                raise ValueError(f"negative count for setting {sid}, outcome {pattern}")
        if self.total_gates < 0:
            raise ValueError("total_gates must be nonnegative")
        if sum(self.counts.values()) > self.total_gates:
            raise ValueError("counts exceed total gates")

    def add(self, other: "CountTable") -> None:
        for key, c in other.counts.items():
            self.counts[key] = self.counts.get(key, 0) + c
        self.total_gates += other.total_gates

    def setting_total(self, sid: int) -> int:
        return sum(c for (s, _), c in self.counts.items() if s == sid)

    def write_delimited(self, out) -> None:
        """Write as delimited text with columns setting_id, outcome, count."""
        close = False
        if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
            out = open(out, "w", encoding="utf-8")
            close = True
        try:
            out.write("setting_id,outcome,count\n")
            for (sid, pattern), c in sorted(self.counts.items()):
                out.write(f"{sid},{pattern},{c}\n")
        finally:
            if close:
                out.close()

    @classmethod
    def read_delimited(cls, src, total_gates: int | None = None) -> "CountTable":
        close = False
        if isinstance(src, (str, bytes)) or hasattr(src, "__fspath__"):
            src = open(src, "r", encoding="utf-8")
            close = True
        try:
            header = src.readline().strip()
            if header != "setting_id,outcome,count":
                raise ValueError(f"unexpected header {header!r}")
            counts: dict[tuple[int, str], int] = {}
            for line in src:
                line = line.strip()
                if not line:
                    continue
                sid, pattern, c = line.split(",")
                counts[(int(sid), pattern)] = int(c)
        finally:
            if close:
                src.close()
        total = sum(counts.values()) if total_gates is None else total_gates
        return cls(counts, total)

    def to_text(self) -> str:
        buf = io.StringIO()
        self.write_delimited(buf)
        return buf.getvalue()


def pattern_label(pattern: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in pattern)


def correlation(rho: DensityMatrix, a: BlochVector, b: BlochVector) -> float:
    """Two-qubit correlation E = <(a.sigma) x (b.sigma)> for the state rho."""
    if rho.dims != (2, 2):
        raise ValueError("correlation is defined for two-qubit states")
    op = np.kron(b.operator(), a.operator())  # qubit 0 least significant
    return float(np.trace(rho.mat @ op).real)


def detect(
    outcome: Sequence[int], detector: DetectorModel, rng: np.random.Generator
) -> tuple[tuple[bool, ...], ...]:
    """Click pattern produced by one true outcome, one station per entry.

    For each station the true click survives with probability eta and lands
    on the detector indexed by the outcome; every detector can additionally
    dark-fire.  Draw order per station: survival first, then the dark draws
    in detector order.
    """
    stations = []
    for k in outcome:
        k = int(k)
        if not 0 <= k < detector.n_det:
            raise ValueError(f"outcome {k} needs a detector index below {detector.n_det}")
        survived = rng.random() < detector.eta
        clicks = list(rng.random(detector.n_det) < detector.p_dark)
        if survived:
            clicks[k] = True
        stations.append(tuple(bool(c) for c in clicks))
    return tuple(stations)


class CorrelationEstimate(NamedTuple):
    value: float
    std_err: float
    counts: CountTable


def _station_clicks(
    true_det: np.ndarray, detector: DetectorModel, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized single-station detection for a block of gates.

    Returns (single, det_index): whether exactly one detector clicked, and
    which one (valid only where single is True).
    """
    m = true_det.size
    survive = rng.random(m) < detector.eta
    clicks = rng.random((m, detector.n_det)) < detector.p_dark
    clicks[np.arange(m), true_det] |= survive
    n_clicks = clicks.sum(axis=1)
    single = n_clicks == 1
    det_index = np.argmax(clicks, axis=1)
    return single, det_index


def estimate_correlation(
    rho: DensityMatrix,
    a: BlochVector,
    b: BlochVector,
    shots: int,
    detector: DetectorModel = IDEAL_DETECTOR,
    rng: np.random.Generator | None = None,
    workers: int = 1,
    setting_id: int = 0,
) -> CorrelationEstimate:
    """Sampled correlation estimate under a detector model.

    Gates with anything other than exactly one click per station are
    discarded (fair-sampling coincidence rule).  E maps outcome 0 to +1
    and outcome 1 to -1 at each station.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    if workers < 1:
        raise ValueError("workers must be positive")
    if rng is None:
        rng = np.random.default_rng()

    probs = born_probabilities(rho, (a, b))
    p = np.fromiter(probs.values(), dtype=float)
    cum = np.cumsum(p)
    # pattern bit values in flat order: index i -> (i % 2, i // 2)
    bits_a = np.array([index_to_pattern(i, (2, 2))[0] for i in range(4)])
    bits_b = np.array([index_to_pattern(i, (2, 2))[1] for i in range(4)])

    chunk_sizes = [shots // workers] * workers
    for i in range(shots % workers):
        chunk_sizes[i] += 1
    streams = rng.spawn(workers)

    merged = CountTable({}, 0)
    for size, stream in zip(chunk_sizes, streams):
        if size == 0:
            continue
        draws = np.searchsorted(cum, stream.random(size) * cum[-1], side="right")
        draws = np.minimum(draws, 3)
        single_a, det_a = _station_clicks(bits_a[draws], detector, stream)
        single_b, det_b = _station_clicks(bits_b[draws], detector, stream)
        keep = single_a & single_b & (det_a < 2) & (det_b < 2)
        table = CountTable({}, size)
        if np.any(keep):
            joint = det_a[keep] + 2 * det_b[keep]
            for idx in range(4):
                c = int(np.count_nonzero(joint == idx))
                if c:
                    label = pattern_label(index_to_pattern(idx, (2, 2)))
                    table.counts[(setting_id, label)] = c
        merged.add(table)

    return _estimate_from_counts(merged, setting_id)


def _estimate_from_counts(table: CountTable, setting_id: int) -> CorrelationEstimate:
    n_cc = table.setting_total(setting_id)
    if n_cc == 0:
        return CorrelationEstimate(float("nan"), float("nan"), table)
    same = table.counts.get((setting_id, "00"), 0) + table.counts.get((setting_id, "11"), 0)
    diff = n_cc - same
    e_hat = (same - diff) / n_cc
    var = max(0.0, 1.0 - e_hat * e_hat) / n_cc
    return CorrelationEstimate(float(e_hat), float(np.sqrt(var)), table)


def correlation_from_counts(table: CountTable, setting_id: int = 0) -> CorrelationEstimate:
    """Recompute (E, stderr) from an existing coincidence table."""
    return _estimate_from_counts(table, setting_id)


def joint_expectation(rho: DensityMatrix, axes: Sequence[BlochVector]) -> float:
    """n-party correlation <prod_j (axes[j].sigma)> for an n-qubit state."""
    if len(axes) != rho.num_subsystems:
        raise ValueError("need one axis per qubit")
    op = np.array([[1.0]], dtype=complex)
    for v in axes:
        op = np.kron(v.operator(), op)
    return float(np.trace(rho.mat @ op).real)
