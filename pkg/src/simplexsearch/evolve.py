"""Time evolution of reduced states under piecewise-constant jumping rates."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyWindow, InvalidSchedule
from .hamiltonian import OracleSpec, SearchHamiltonian, build, spectrum
from .partition import Partition, QuotientMatrix

DEFAULT_SAMPLES = 512


@dataclass(frozen=True)
class Schedule:
    segments: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise InvalidSchedule("a schedule needs at least one segment")
        for gamma, duration in self.segments:
            if not gamma > 0:
                raise InvalidSchedule(f"segment gamma must be positive, got {gamma}")
            if not duration >= 0:
                raise InvalidSchedule(f"segment duration must be >= 0, got {duration}")

    @classmethod
    def of(cls, segments: Sequence[Sequence[float]]) -> "Schedule":
        return cls(tuple((float(g), float(t)) for g, t in segments))

    @property
    def total_time(self) -> float:
        return sum(t for _, t in self.segments)


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    times: np.ndarray
    probabilities: np.ndarray  # (samples, classes)
    final_state: np.ndarray
    segment_starts: tuple[int, ...]  # sample index where each segment begins

    def segment_slice(self, k: int) -> slice:
        end = self.segment_starts[k + 1] if k + 1 < len(self.segment_starts) else len(self.times)
        return slice(self.segment_starts[k], end)


def uniform_initial_state(partition: Partition) -> np.ndarray:
    n = partition.num_vertices
    return np.array([math.sqrt(s / n) for s in partition.sizes], dtype=complex)


def class_state(d: int, index: int) -> np.ndarray:
    psi = np.zeros(d, dtype=complex)
    psi[index] = 1.0
    return psi


class Propagator:
    """exp(-i H t) through one dense eigendecomposition."""

    def __init__(self, h: SearchHamiltonian | np.ndarray):
        self.values, self.vectors = spectrum(h)

    def apply(self, psi: np.ndarray, t: float | np.ndarray) -> np.ndarray:
        coeff = self.vectors.T @ psi
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self.vectors @ (np.exp(-1j * self.values * t) * coeff)
        phases = np.exp(-1j * np.outer(t, self.values)) * coeff[None, :]
        return phases @ self.vectors.T


def evolve_segment(h: SearchHamiltonian | np.ndarray, psi: np.ndarray, t: float) -> np.ndarray:
    if t < 0:
        raise InvalidSchedule("evolution time must be >= 0")
    if t == 0:
        return np.array(psi, dtype=complex)
    return Propagator(h).apply(np.asarray(psi, dtype=complex), t)


def run_schedule(
    quotient: QuotientMatrix,
    oracle: OracleSpec,
    schedule: Schedule,
    psi0: np.ndarray,
    samples_per_segment: int = DEFAULT_SAMPLES,
    kind: str = "adjacency",
) -> EvolutionResult:
    """Evolve through the segments in order, sampling each one uniformly.

    Each segment contributes ``samples_per_segment`` instants from its start
    to its end inclusive, on the global clock.
    """
    if samples_per_segment < 2:
        raise InvalidSchedule("samples_per_segment must be >= 2")
    psi = np.asarray(psi0, dtype=complex)
    clock = 0.0
    times, probs, starts = [], [], []
    for gamma, duration in schedule.segments:
        prop = Propagator(build(quotient, gamma, oracle, kind))
        local = np.linspace(0.0, duration, samples_per_segment)
        states = prop.apply(psi, local)
        starts.append(sum(len(t) for t in times))
        times.append(clock + local)
        probs.append(np.abs(states) ** 2)
        psi = states[-1]
        clock += duration
    return EvolutionResult(np.concatenate(times), np.concatenate(probs), psi, tuple(starts))


def peak_probability(result: EvolutionResult, target: int | Sequence[int], window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Earliest sample maximizing the summed probability of the target classes."""
    idx = [target] if isinstance(target, (int, np.integer)) else list(target)
    series = result.probabilities[:, idx].sum(axis=1)
    times = result.times
    if window is not None:
        lo, hi = window
        keep = (times >= lo) & (times <= hi)
        if not keep.any():
            raise EmptyWindow(f"no samples in window [{lo}, {hi}]")
        series, times = series[keep], times[keep]
    k = int(np.argmax(series))
    return float(times[k]), float(series[k])


def result_to_csv(result: EvolutionResult, labels: Sequence[str], header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write("time," + ",".join(labels) + "\n")
    for t, row in zip(result.times, result.probabilities):
        buf.write(f"{t:.17g}," + ",".join(f"{p:.17g}" for p in row) + "\n")
    return buf.getvalue()
