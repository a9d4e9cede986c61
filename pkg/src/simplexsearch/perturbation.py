"""Stage-wise block analysis of the search Hamiltonian.

For each stage the classes are split into a target block, an initial block
and a pruned remainder.  Cutting every edge between blocks leaves a
block-diagonal leading-order Hamiltonian; the critical jumping rate is where
the two block ground energies cross, and the full Hamiltonian restricted to
the two block ground states gives the stage's two-level model.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceFailure, DegenerateBlockGround, InvalidStage, NoCrossing
from .hamiltonian import OracleSpec, build
from .partition import Partition, QuotientMatrix, pattern
from .scenarios import Scenario, get_scenario

DEFAULT_POINTS_PER_DECADE = 512
TOL_CROSS = 1e-10
MAX_BISECTIONS = 200
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class Stage:
    label: str
    block_a: tuple[int, ...]
    block_b: tuple[int, ...]
    pruned: tuple[int, ...]
    target: tuple[int, ...]
    hint: float | None = None
    gamma_range: tuple[float, float] | None = None

    def validate(self, d: int) -> None:
        a, b, p = set(self.block_a), set(self.block_b), set(self.pruned)
        if a & b or a & p or b & p:
            raise InvalidStage(f"{self.label}: blocks overlap")
        if a | b | p != set(range(d)):
            raise InvalidStage(f"{self.label}: blocks do not cover the {d} classes")
        if not a:
            raise InvalidStage(f"{self.label}: target block is empty")


@dataclass(frozen=True)
class StagePlan:
    scenario: str
    stages: tuple[Stage, ...]
    sequential: bool = True

    def stage(self, index: int) -> Stage:
        """1-based stage lookup."""
        if not 1 <= index <= len(self.stages):
            raise InvalidStage(f"stage {index} out of range 1..{len(self.stages)}")
        return self.stages[index - 1]


@dataclass(frozen=True)
class PresetPlan:
    """Scenario block rules, ready to be evaluated on a partition."""

    scenario: Scenario

    @property
    def num_stages(self) -> int:
        return len(self.scenario.stages)

    def resolve(self, partition: Partition) -> StagePlan:
        engine = partition.engine
        if engine is None or partition.representatives is None:
            raise InvalidStage("preset plans need an orbit partition")
        if partition.spec.order != self.scenario.order:
            raise InvalidStage(f"scenario {self.scenario.name} is for order {self.scenario.order}")
        pats = [pattern(w, engine.fixed) for w in partition.representatives]
        stages = []
        for rule in self.scenario.stages:
            a = tuple(i for i, p in enumerate(pats) if rule.block_a(p, engine))
            b = tuple(i for i, p in enumerate(pats) if i not in a and rule.block_b(p, engine))
            rest = tuple(i for i in range(partition.dim) if i not in a and i not in b)
            if rule.target == "marked":
                target = tuple(i for i in a if i in partition.marked_classes)
            else:
                target = (max(a, key=lambda i: (partition.sizes[i], -i)),)
            m = partition.spec.dim
            stage = Stage(rule.label, a, b, rest, target, rule.hint(m), rule.gamma_range(m))
            stage.validate(partition.dim)
            stages.append(stage)
        return StagePlan(self.scenario.name, tuple(stages), self.scenario.sequential)


def preset_plan(order: int, scenario: str) -> PresetPlan:
    sc = get_scenario(scenario)
    if sc.order != order:
        raise InvalidStage(f"scenario {scenario} is defined for order {sc.order}, not {order}")
    return PresetPlan(sc)


def _check(stage: Stage, d: int, need_b: bool = True) -> None:
    stage.validate(d)
    if need_b and not stage.block_b:
        raise InvalidStage(f"{stage.label}: initial block is empty")


def leading_order_blocks(quotient: QuotientMatrix, oracle: OracleSpec, stage: Stage, gamma: float, kind: str = "adjacency") -> tuple[np.ndarray, np.ndarray]:
    _check(stage, quotient.dim, need_b=False)
    h = build(quotient, gamma, oracle, kind).matrix
    a, b = list(stage.block_a), list(stage.block_b)
    return h[np.ix_(a, a)], h[np.ix_(b, b)]


@dataclass(frozen=True)
class CriticalRate:
    gamma_c: float
    crossing_energy: float
    all_crossings: tuple[tuple[float, float], ...]


class _BlockEnergies:
    """Ground energies of both blocks as functions of gamma."""

    def __init__(self, quotient: QuotientMatrix, oracle: OracleSpec, stage: Stage):
        o = oracle.diagonal(quotient.dim)
        self.parts = []
        for block in (stage.block_a, stage.block_b):
            idx = list(block)
            self.parts.append((quotient.entries[np.ix_(idx, idx)], np.diag(o[idx])))

    def ground(self, gamma: float) -> tuple[float, float]:
        return tuple(float(np.linalg.eigvalsh(-gamma * q - o)[0]) for q, o in self.parts)

    def ground_many(self, gammas: np.ndarray) -> np.ndarray:
        out = []
        for q, o in self.parts:
            stack = -gammas[:, None, None] * q[None] - o[None]
            out.append(np.linalg.eigvalsh(stack)[:, 0])
        return np.stack(out, axis=1)

    def gap(self, gamma: float) -> float:
        ea, eb = self.ground(gamma)
        return ea - eb


def gamma_grid(gamma_range: tuple[float, float], grid_points: int | None = None) -> np.ndarray:
    lo, hi = gamma_range
    if not 0 < lo < hi:
        raise InvalidStage(f"gamma range must satisfy 0 < lo < hi, got {gamma_range}")
    if grid_points is None:
        grid_points = int(math.ceil(DEFAULT_POINTS_PER_DECADE * math.log10(hi / lo))) + 1
    if grid_points < 32:
        raise InvalidStage(f"grid_points must be >= 32, got {grid_points}")
    return np.geomspace(lo, hi, grid_points)


def crossing_curve(quotient: QuotientMatrix, oracle: OracleSpec, stage: Stage, gamma_range=None, grid_points=None) -> tuple[np.ndarray, np.ndarray]:
    """Grid of gammas and the two block ground energies on it."""
    _check(stage, quotient.dim)
    grid = gamma_grid(gamma_range or stage.gamma_range, grid_points)
    return grid, _BlockEnergies(quotient, oracle, stage).ground_many(grid)


def find_critical_rate(
    quotient: QuotientMatrix,
    oracle: OracleSpec,
    stage: Stage,
    gamma_range: tuple[float, float] | None = None,
    grid_points: int | None = None,
    tol: float = TOL_CROSS,
    hint: float | None = None,
) -> CriticalRate:
    _check(stage, quotient.dim)
    gamma_range = gamma_range or stage.gamma_range
    if gamma_range is None:
        raise InvalidStage("no gamma range given")
    hint = stage.hint if hint is None else hint
    energies = _BlockEnergies(quotient, oracle, stage)
    grid = gamma_grid(gamma_range, grid_points)
    e = energies.ground_many(grid)
    f = e[:, 0] - e[:, 1]
    crossings = []
    for k in range(len(grid) - 1):
        if f[k] == 0.0:
            crossings.append((float(grid[k]), float(e[k, 0])))
        elif f[k] * f[k + 1] < 0:
            root = brentq(energies.gap, grid[k], grid[k + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=MAX_BISECTIONS)
            ea, eb = energies.ground(root)
            if abs(ea - eb) > tol * max(1.0, abs(ea)):
                raise ConvergenceFailure(f"crossing near gamma={root:.6g} not resolved: gap {ea - eb:.3g}")
            crossings.append((float(root), float(ea)))
    if f[-1] == 0.0:
        crossings.append((float(grid[-1]), float(e[-1, 0])))
    if not crossings:
        raise NoCrossing(
            f"{stage.label}: E0_A - E0_B keeps one sign on [{gamma_range[0]:.6g}, {gamma_range[1]:.6g}]; "
            f"endpoint values {f[0]:.6g}, {f[-1]:.6g}"
        )
    if hint is not None and hint > 0:
        best = min(crossings, key=lambda c: abs(math.log(c[0] / hint)))
    else:
        best = crossings[0]
    return CriticalRate(best[0], best[1], tuple(crossings))


@dataclass(frozen=True, eq=False)
class TwoLevelModel:
    e_minus: float
    e_plus: float
    stage_time: float
    ground_a: np.ndarray
    ground_b: np.ndarray
    gamma: float


def _block_ground(h: np.ndarray, idx: Sequence[int], d: int, name: str) -> np.ndarray:
    w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
    if len(w) > 1 and w[1] - w[0] < DEGENERACY_TOL:
        raise DegenerateBlockGround(f"block {name} ground energy is degenerate (gap {w[1] - w[0]:.3g})")
    g = v[:, 0]
    g = g * np.sign(g[np.argmax(np.abs(g))])
    out = np.zeros(d)
    out[list(idx)] = g
    return out


def two_level_model(quotient: QuotientMatrix, oracle: OracleSpec, stage: Stage, gamma_c: float, kind: str = "adjacency") -> TwoLevelModel:
    _check(stage, quotient.dim)
    h = build(quotient, gamma_c, oracle, kind).matrix
    d = quotient.dim
    ga = _block_ground(h, stage.block_a, d, "A")
    gb = _block_ground(h, stage.block_b, d, "B")
    x = np.stack([ga, gb], axis=1)
    e_minus, e_plus = np.linalg.eigvalsh(x.T @ h @ x)
    if not e_plus > e_minus:
        raise DegenerateBlockGround("two-level energies coincide")
    return TwoLevelModel(float(e_minus), float(e_plus), math.pi / (e_plus - e_minus), ga, gb, float(gamma_c))


@dataclass(frozen=True)
class PruneReport:
    shortest_path_ok: bool
    full_distance: int | None
    pruned_distance: int | None
    blocking: tuple[int, ...]
    structure_ok: bool | None
    levels_a: tuple[int, ...]
    levels_b: tuple[int, ...]
    mismatched: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.shortest_path_ok and self.structure_ok is not False


def _distances(adj: np.ndarray, start: int, allowed: set[int]) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v in allowed and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _level(partition: Partition, cls: int, block: set[int]) -> int:
    """Largest k such that the whole level-k complete subgraph around the class lies in the block."""
    engine = partition.engine
    word = partition.representatives[cls]
    for k in range(partition.spec.order - 1, -1, -1):
        if engine.contains_subgraph(word, k, block):
            return k
    return -1


def prune_check(quotient: QuotientMatrix, partition: Partition, stage: Stage, initial_class: int | None = None, target_class: int | None = None) -> PruneReport:
    """Check that pruning keeps the shortest route and a matching block structure.

    The route check compares breadth-first distances between the initial and
    target classes on the quotient graph with and without the pruned classes.
    The structure check compares the sets of complete-subgraph levels that
    the two blocks are made of; it is a heuristic and only advisory.
    """
    stage.validate(quotient.dim)
    if initial_class is None:
        if not stage.block_b:
            raise InvalidStage(f"{stage.label}: initial block is empty")
        initial_class = max(stage.block_b, key=lambda i: (partition.sizes[i], -i))
    if target_class is None:
        target_class = stage.target[0]
    adj = quotient.counts > 0
    np.fill_diagonal(adj, False)
    everything = set(range(quotient.dim))
    kept = everything - set(stage.pruned)
    d_init = _distances(adj, initial_class, everything)
    d_targ = _distances(adj, target_class, everything)
    full = d_init.get(target_class)
    reduced = _distances(adj, initial_class, kept).get(target_class) if initial_class in kept else None
    ok = full is not None and reduced == full
    blocking = tuple(sorted(c for c in stage.pruned if full is not None and d_init.get(c, -1) + d_targ.get(c, -1) == full))
    if partition.engine is None:
        return PruneReport(ok, full, reduced, blocking, None, (), (), ())
    a_set, b_set = set(stage.block_a), set(stage.block_b)
    lev_a = {c: _level(partition, c, a_set) for c in stage.block_a}
    lev_b = {c: _level(partition, c, b_set) for c in stage.block_b}
    sa, sb = set(lev_a.values()), set(lev_b.values())
    mismatched = tuple(sorted([c for c, k in lev_a.items() if k not in sb] + [c for c, k in lev_b.items() if k not in sa]))
    return PruneReport(ok, full, reduced, blocking, sa == sb, tuple(sorted(sa)), tuple(sorted(sb)), mismatched)


def crossing_to_csv(grid: np.ndarray, energies: np.ndarray, dim: int, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write("gamma,gamma_times_M,E0_blockA,E0_blockB\n")
    for g, (ea, eb) in zip(grid, energies):
        buf.write(f"{g:.17g},{g * dim:.17g},{ea:.17g},{eb:.17g}\n")
    return buf.getvalue()
