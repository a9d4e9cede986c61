"""Reduced search Hamiltonians H(gamma) = -gamma * Q - oracle."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceFailure, InvalidOracle, NonPositiveGamma
from .partition import Partition, QuotientMatrix

GENERATOR_KINDS = ("adjacency", "laplacian")
ORACLE_KINDS = ("class_state", "vertex_sum")


@dataclass(frozen=True)
class OracleSpec:
    """Oracle term on the marked classes.

    ``class_state`` adds the projector onto each normalized class state.
    ``vertex_sum`` adds the sum of single-vertex projectors over the marked
    vertices of each class, restricted to the subspace; its diagonal weight
    is the marked fraction of the class.
    """

    kind: str
    targets: tuple[int, ...]
    weights: tuple[float, ...]

    def diagonal(self, d: int) -> np.ndarray:
        out = np.zeros(d)
        for t, w in zip(self.targets, self.weights):
            out[t] += w
        return out


def make_oracle(partition: Partition, targets: Iterable[int] | None = None, kind: str = "class_state") -> OracleSpec:
    if kind not in ORACLE_KINDS:
        raise InvalidOracle(f"oracle kind must be one of {ORACLE_KINDS}, got {kind!r}")
    targets = tuple(partition.marked_classes if targets is None else (int(t) for t in targets))
    for t in targets:
        if t not in partition.marked_classes:
            raise InvalidOracle(f"class {t} is not a marked class")
    if kind == "class_state":
        weights = tuple(1.0 for _ in targets)
    else:
        weights = tuple(float(partition.marked_fraction[t]) for t in targets)
    return OracleSpec(kind, targets, weights)


def no_oracle() -> OracleSpec:
    return OracleSpec("class_state", (), ())


@dataclass(frozen=True, eq=False)
class SearchHamiltonian:
    matrix: np.ndarray
    gamma: float
    generator_kind: str


def build(quotient: QuotientMatrix, gamma: float, oracle: OracleSpec, kind: str = "adjacency") -> SearchHamiltonian:
    if not gamma > 0:
        raise NonPositiveGamma(f"gamma must be positive, got {gamma}")
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"generator kind must be one of {GENERATOR_KINDS}")
    d = quotient.dim
    if any(not 0 <= t < d for t in oracle.targets):
        raise InvalidOracle("oracle target outside the quotient")
    h = -gamma * quotient.entries
    if kind == "laplacian":
        h = h + gamma * quotient.degree * np.eye(d)
    h = h - np.diag(oracle.diagonal(d))
    return SearchHamiltonian(h, float(gamma), kind)


def spectrum(h: SearchHamiltonian | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = h.matrix if isinstance(h, SearchHamiltonian) else np.asarray(h)
    try:
        return np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None


def matrix_to_csv(m: np.ndarray, labels: Sequence[str] | None = None, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    if labels is not None:
        buf.write(",".join(labels) + "\n")
    for row in np.asarray(m):
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return buf.getvalue()
