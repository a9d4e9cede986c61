"""Preset search scenarios: marked sets and per-stage block rules.

Block rules are predicates on a class's pattern (see ``partition.pattern``),
so one rule applies at every M.  Most staged searches use the prefix rule:
at stage s the target block holds the classes whose first s letters agree
with a marked word, the initial block holds the classes that agree on the
first s-1 letters and then continue into a free letter, and everything else
is pruned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import UnknownScenario
from .lattice import Lattice, LatticeSpec
from .partition import OrbitEngine, Partition, Pattern, _act, pattern, reduced_partition, refine_patterns

BlockRule = Callable[[Pattern, OrbitEngine], bool]


@dataclass(frozen=True)
class StageRule:
    label: str
    block_a: BlockRule
    block_b: BlockRule
    target: str  # "marked" or "largest" (largest class of block A)
    hint_coeff: float
    hint_power: int  # hinted critical rate = hint_coeff * M**hint_power

    def hint(self, dim: int) -> float:
        return self.hint_coeff * float(dim) ** self.hint_power

    def gamma_range(self, dim: int) -> tuple[float, float]:
        unit = float(dim) ** self.hint_power
        return 0.1 * unit, 10.0 * unit


@dataclass(frozen=True)
class Scenario:
    name: str
    order: int
    marks: tuple[Pattern, ...]
    stages: tuple[StageRule, ...]
    fixed: tuple[int, ...] | None = None
    sequential: bool = True
    description: str = ""

    def spec(self, dim: int) -> LatticeSpec:
        return LatticeSpec(self.order, dim)

    def partition(self, dim: int) -> Partition:
        return reduced_partition(self.spec(dim), self.marks, self.fixed)

    def explicit_partition(self, lattice: Lattice) -> Partition:
        return refine_patterns(lattice, self.marks, self.fixed)

    def marked_addresses(self, lattice: Lattice) -> list[tuple[int, ...]]:
        p = self.explicit_partition(lattice)
        return [v for c in p.marked_classes for v in p.classes[c]]


def _closure(engine: OrbitEngine, marks: Sequence[Pattern]) -> set[Pattern]:
    base = {pattern(m, engine.fixed) for m in marks}
    return {_act(g, p) for g in engine.group for p in base}


def prefix_stage(s: int, hint: float, label: str, toward: Sequence[Pattern] | None = None, final: bool = False) -> StageRule:
    """Stage s of the prefix rule; ``toward`` restricts the target marks."""

    def targets(engine: OrbitEngine) -> set[Pattern]:
        return _closure(engine, toward) if toward is not None else set(engine.marked_patterns)

    def in_a(p: Pattern, engine: OrbitEngine) -> bool:
        return any(p[:s] == t[:s] for t in targets(engine))

    def in_b(p: Pattern, engine: OrbitEngine) -> bool:
        if in_a(p, engine) or p[s - 1] >= 0:
            return False
        return any(p[: s - 1] == t[: s - 1] for t in targets(engine))

    return StageRule(label, in_a, in_b, "marked" if final else "largest", hint, -1)


def _staged(name: str, order: int, marks, hints: Sequence[float], description: str, **kw) -> Scenario:
    n = len(hints)
    stages = tuple(prefix_stage(s, h, f"stage{s}", final=(s == n)) for s, h in enumerate(hints, start=1))
    return Scenario(name, order, tuple(tuple(m) for m in marks), stages, description=description, **kw)


def _first_letter_scheme(power: int, narrow: bool) -> StageRule:
    # Target side: classes starting with the anchor letter 0.  Initial side:
    # classes starting with a free letter.  The narrow variant also drops the
    # cliques that point back at letter 1.
    if narrow:
        def in_a(p, engine):
            return p[0] == 0 and p[1] < 0

        def in_b(p, engine):
            return p[0] < 0 and p[1] != 1
    else:
        def in_a(p, engine):
            return p[0] == 0

        def in_b(p, engine):
            return p[0] < 0

    return StageRule("scheme2" if narrow else "scheme1", in_a, in_b, "marked", 1.0, power)


SCENARIOS: dict[str, Scenario] = {}


def _register(s: Scenario) -> None:
    SCENARIOS[s.name] = s


_register(_staged("single_mark_r1", 1, [(0, 1)], [2, 1], "one marked vertex, first order"))
_register(_staged("single_mark_r2", 2, [(0, 1, 0)], [3, 2, 1], "one marked vertex, second order"))
_register(_staged("single_mark_r2_alt", 2, [(0, 1, 2)], [3, 2, 1], "one marked vertex in the alternate position, second order"))
_register(_staged("single_mark_r3", 3, [(0, 1, 0, 1)], [4, 3, 2, 1], "one marked vertex, third order"))

_CLASS_E = ((0, -1, -2),)
_CLASS_O = ((0, -1, -2, -3),)
for _name, _order, _marks, _power in (
    ("marked_class_e", 2, _CLASS_E, 1),
    ("marked_class_o", 3, _CLASS_O, 2),
):
    for _narrow in (False, True):
        _suffix = "_scheme2" if _narrow else "_scheme1"
        _register(
            Scenario(
                _name + _suffix,
                _order,
                _marks,
                (_first_letter_scheme(_power, _narrow),),
                fixed=(0, 1),
                description=f"every vertex of one class marked, order {_order}",
            )
        )
SCENARIOS["marked_class_o"] = SCENARIOS["marked_class_o_scheme1"]

TABLE5 = {
    "table5_a": (((0, 1, 0), (0, 1, 2)), (5, 3, 1)),
    "table5_b": (((0, 1, 0), (0, 2, 1)), (4, 2, 1)),
    "table5_c": (((0, 1, 0), (0, 2, 0)), (4, 2, 1)),
    "table5_d": (((0, 1, 0), (1, 0, 1)), (3, 2, 1)),
    "table5_e": (((0, 1, 0), (1, 2, 1)), (3, 2, 1)),
}
for _name, (_marks, _hints) in TABLE5.items():
    _register(_staged(_name, 2, _marks, _hints, "two marked vertices, second order"))

_register(
    Scenario(
        "fig11_three_marks",
        1,
        ((0, 1), (0, 2), (1, 0)),
        (
            prefix_stage(1, 3, "toward_ab", toward=((0, 1), (0, 2)), final=True),
            prefix_stage(1, 2, "toward_d", toward=((1, 0),), final=True),
        ),
        sequential=False,
        description="three marked vertices, first order; two alternative first stages",
    )
)


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}") from None
