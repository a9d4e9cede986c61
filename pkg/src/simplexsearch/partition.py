"""Invariant-subspace partitions and quotient matrices.

The default partition is the orbit partition of the letter-permutation
symmetry that fixes the marked set.  Marks split the alphabet into a set of
distinguished letters L and a block of freely interchangeable letters; a
class is then a word *pattern*: letters of L stay literal and the other
letters are numbered -1, -2, ... in order of first appearance.  Classes are
patterns up to the permutations of L that preserve the marked patterns.

Because a pattern never mentions the actual free letters, classes, sizes and
neighbor counts can be computed without building the lattice
(``reduced_partition``), which is how large M is handled.  ``refine`` does the
same on an explicit lattice and recounts every neighbor number from the
adjacency.  Plain color refinement is available as ``method="color"``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, NotEquitable
from .lattice import Lattice, LatticeSpec, Word, external_neighbor, word_to_address

Pattern = tuple[int, ...]

# Beyond this many distinguished letters the stabilizer is not enumerated and
# only the identity is used; the partition stays equitable but may be finer.
MAX_ENUMERATED_LETTERS = 7


def pattern(word: Sequence[int], fixed: Iterable[int]) -> Pattern:
    fixed = set(fixed)
    seen: dict[int, int] = {}
    out = []
    for a in word:
        if a in fixed:
            out.append(int(a))
        else:
            if a not in seen:
                seen[a] = len(seen)
            out.append(-1 - seen[a])
    return tuple(out)


def pattern_label(p: Pattern) -> str:
    return ".".join(str(t) if t >= 0 else f"n{-t}" for t in p)


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _act(g: dict[int, int], p: Pattern) -> Pattern:
    return tuple(g.get(t, t) for t in p)


class OrbitEngine:
    """Pattern classes of an order-r, dimension-M lattice for fixed marks."""

    def __init__(self, spec: LatticeSpec, fixed: Iterable[int], marked: Iterable[Sequence[int]]):
        self.spec = spec
        r, m = spec.order, spec.dim
        self.fixed = tuple(sorted({int(a) for a in fixed}))
        if any(a < 0 or a > m for a in self.fixed):
            raise InvalidSpec(f"distinguished letters {self.fixed} do not fit dimension {m}")
        fs = set(self.fixed)
        marks = set()
        for w in marked:
            w = tuple(int(a) for a in w)
            if len(w) != r + 1 or any(x == y for x, y in zip(w, w[1:])):
                raise InvalidSpec(f"mark {w!r} is not a word of length {r + 1}")
            if any(a > m for a in w):
                raise InvalidSpec(f"mark {w!r} uses a letter above {m}")
            marks.add(pattern(w, fs))
        self.marked_patterns = frozenset(marks)
        self.group = self._stabilizer()
        free = [a for a in range(m + 1) if a not in fs]
        self.alphabet = list(self.fixed) + free[: r + 2]
        self.free_letters = free
        self._enumerate()

    # -- symmetry ---------------------------------------------------------
    def _stabilizer(self) -> list[dict[int, int]]:
        ident = {a: a for a in self.fixed}
        if len(self.fixed) > MAX_ENUMERATED_LETTERS:
            return [ident]
        out = []
        for perm in itertools.permutations(self.fixed):
            g = dict(zip(self.fixed, perm))
            if {_act(g, p) for p in self.marked_patterns} == self.marked_patterns:
                out.append(g)
        return out

    def canonical(self, word: Sequence[int]) -> Pattern:
        p = pattern(word, self.fixed)
        return min(_act(g, p) for g in self.group)

    def orbit_patterns(self, key: Pattern) -> set[Pattern]:
        return {_act(g, key) for g in self.group}

    def instantiate(self, p: Pattern) -> Word:
        """Lexicographically smallest word with pattern p."""
        return tuple(t if t >= 0 else self.free_letters[-1 - t] for t in p)

    # -- classes ------------------------------------------------------------
    def _enumerate(self) -> None:
        r, m = self.spec.order, self.spec.dim
        found: dict[Pattern, Word] = {}

        def grow(prefix: list[int]) -> None:
            if len(prefix) == r + 1:
                found.setdefault(self.canonical(prefix), tuple(prefix))
                return
            for a in self.alphabet:
                if not prefix or a != prefix[-1]:
                    prefix.append(a)
                    grow(prefix)
                    prefix.pop()

        grow([])
        nfix = len(self.fixed)
        rows = []
        for key in found:
            pats = self.orbit_patterns(key)
            nfree = -min([t for t in key if t < 0], default=0)
            size = len(pats) * _falling(m + 1 - nfix, nfree)
            least = min(self.instantiate(p) for p in pats)
            rows.append((size, word_to_address(least), key, least, len(pats), nfree))
        rows.sort()
        self.sizes = tuple(row[0] for row in rows)
        self.keys = tuple(row[2] for row in rows)
        self.representatives = tuple(row[3] for row in rows)
        self.n_patterns = tuple(row[4] for row in rows)
        self.n_free = tuple(row[5] for row in rows)
        self.key_index = {k: i for i, k in enumerate(self.keys)}
        self.marked_classes = tuple(i for i, k in enumerate(self.keys) if k in self.marked_patterns)
        self._count()

    def neighbor_terms(self, word: Word) -> list[tuple[Word, int, int]]:
        """Neighbor representatives of ``word`` as (neighbor, multiplicity, scales_with_M).

        Clique neighbors with a known letter appear once each.  All clique
        neighbors through unknown free letters share one pattern, so they are
        folded into one term of multiplicity M + 1 - |known|.
        """
        m = self.spec.dim
        known = set(self.fixed) | set(word)
        spare = [a for a in self.alphabet if a not in known]
        n_spare = m + 1 - len(known)
        banned = {word[-1]} if len(word) == 1 else {word[-1], word[-2]}
        out = [(word[:-1] + (a,), 1, 0) for a in sorted(known) if a not in banned]
        if n_spare > 0:
            out.append((word[:-1] + (spare[0],), n_spare, 1))
        if len(word) > 1:
            out.append((external_neighbor(word), 1, 0))
        return out

    def _count(self) -> None:
        d = len(self.keys)
        counts = np.zeros((d, d), dtype=np.int64)
        scaling = np.zeros((d, d), dtype=np.int64)  # multiplicity that grows like M
        constant = np.zeros((d, d), dtype=np.int64)
        for i, w in enumerate(self.representatives):
            for u, mult, grows in self.neighbor_terms(w):
                j = self.key_index[self.canonical(u)]
                counts[i, j] += mult
                if grows:
                    scaling[i, j] += 1
                else:
                    constant[i, j] += mult
        self.counts = counts
        self.count_scaling = scaling
        self.count_constant = constant

    def asymptotic_entries(self) -> np.ndarray:
        """Leading monomial in M of every quotient entry, dropping entries below sqrt(M).

        Neighbor counts like M - l become M and class sizes like
        k (M - l1)(M - l2) become k M^2.
        """
        m = float(self.spec.dim)
        d = len(self.keys)
        out = np.zeros((d, d))
        npat = np.array(self.n_patterns, dtype=float)
        nfree = np.array(self.n_free, dtype=float)
        for i in range(d):
            for j in range(d):
                if self.counts[i, j] == 0:
                    continue
                grows = self.count_scaling[i, j] > 0
                lead = self.count_scaling[i, j] if grows else self.count_constant[i, j]
                power = (1.0 if grows else 0.0) + 0.5 * (nfree[i] - nfree[j])
                if power < 0.5:
                    continue
                out[i, j] = lead * math.sqrt(npat[i] / npat[j]) * m**power
        return out

    def contains_subgraph(self, word: Word, level: int, block: set[int]) -> bool:
        """Whether the level-k complete subgraph around ``word`` lies inside ``block``."""
        r = self.spec.order
        prefix = list(word[: r - level])

        def grow(w: list[int]) -> bool:
            if len(w) == r + 1:
                return self.key_index[self.canonical(w)] in block
            for a in self.alphabet:
                if a != w[-1]:
                    w.append(a)
                    ok = grow(w)
                    w.pop()
                    if not ok:
                        return False
            return True

        return grow(prefix)


def marks_from_words(dim: int, words: Sequence[Word]) -> tuple[tuple[int, ...], list[Word]]:
    """Split the alphabet for an explicit marked set.

    Two letters are interchangeable when swapping them maps the marked set
    onto itself; this is an equivalence relation.  The largest class of
    interchangeable letters (two or more letters) becomes the free block and
    every other letter is distinguished.
    """
    marked = set(words)
    parent = list(range(dim + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(dim + 1):
        for b in range(a + 1, dim + 1):
            if find(a) == find(b):
                continue
            swap = {a: b, b: a}
            if {tuple(swap.get(x, x) for x in w) for w in marked} == marked:
                parent[find(b)] = find(a)
    groups: dict[int, list[int]] = {}
    for a in range(dim + 1):
        groups.setdefault(find(a), []).append(a)
    blocks = [g for g in groups.values() if len(g) >= 2]
    free = set(max(blocks, key=lambda g: (len(g), g[-1]))) if blocks else set()
    fixed = tuple(a for a in range(dim + 1) if a not in free)
    return fixed, sorted(marked)


@dataclass(frozen=True, eq=False)
class Partition:
    spec: LatticeSpec
    sizes: tuple[int, ...]
    marked_classes: tuple[int, ...]
    labels: tuple[str, ...]
    counts: np.ndarray
    marked_fraction: np.ndarray
    method: str = "orbits"
    keys: tuple[Pattern, ...] | None = None
    representatives: tuple[Word, ...] | None = None
    engine: OrbitEngine | None = field(default=None, repr=False)
    members: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    vertices: tuple[tuple[int, ...], ...] | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def num_vertices(self) -> int:
        return sum(self.sizes)

    @property
    def classes(self) -> list[list[tuple[int, ...]]]:
        if self.members is None or self.vertices is None:
            raise DimensionMismatch("partition was computed without a lattice and has no member lists")
        return [[self.vertices[int(i)] for i in m] for m in self.members]

    def class_of(self, key: Sequence[int]) -> int:
        if self.keys is None:
            raise KeyError("color-refined partitions have no pattern keys")
        return self.keys.index(tuple(key))


@dataclass(frozen=True, eq=False)
class QuotientMatrix:
    entries: np.ndarray
    class_sizes: tuple[int, ...]
    counts: np.ndarray
    labels: tuple[str, ...]
    degree: int
    asymptotic: bool = False

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _symbolic_partition(engine: OrbitEngine) -> Partition:
    d = len(engine.keys)
    frac = np.zeros(d)
    frac[list(engine.marked_classes)] = 1.0
    return Partition(
        spec=engine.spec,
        sizes=engine.sizes,
        marked_classes=engine.marked_classes,
        labels=tuple(pattern_label(k) for k in engine.keys),
        counts=engine.counts.copy(),
        marked_fraction=frac,
        keys=engine.keys,
        representatives=engine.representatives,
        engine=engine,
    )


def reduced_partition(spec: LatticeSpec, marks: Iterable[Sequence[int]], fixed: Iterable[int] | None = None) -> Partition:
    """Orbit partition computed from patterns alone, for any M.

    ``marks`` are words or patterns (negative entries stand for free letters).
    ``fixed`` defaults to the nonnegative letters used by the marks.
    """
    marks = [tuple(int(a) for a in w) for w in marks]
    if fixed is None:
        fixed = sorted({a for w in marks for a in w if a >= 0})
    return _symbolic_partition(OrbitEngine(spec, fixed, marks))


def recount(lattice: Lattice, class_of: np.ndarray, d: int) -> np.ndarray:
    """Neighbor counts b_ij; raises NotEquitable if members of a class disagree."""
    n = lattice.num_vertices
    per_vertex = np.zeros((n, d), dtype=np.int64)
    np.add.at(per_vertex, (np.repeat(np.arange(n), lattice.nbr.shape[1]), class_of[lattice.nbr.ravel()]), 1)
    counts = np.zeros((d, d), dtype=np.int64)
    for i in range(d):
        rows = per_vertex[class_of == i]
        if not (rows == rows[0]).all():
            raise NotEquitable(f"class {i} members have differing neighbor counts")
        counts[i] = rows[0]
    return counts


def _marked_vector(lattice: Lattice, marked: Iterable[Sequence[int]]) -> np.ndarray:
    flag = np.zeros(lattice.num_vertices, dtype=bool)
    for v in marked:
        flag[lattice.vertex_index(v)] = True
    return flag


def _explicit_partition(lattice: Lattice, class_of: np.ndarray, flag: np.ndarray, method: str, engine=None) -> Partition:
    n = lattice.num_vertices
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(int(class_of[i]), []).append(i)
    ordered = sorted(groups.values(), key=lambda g: (len(g), lattice.vertices[g[0]]))
    d = len(ordered)
    cls = np.empty(n, dtype=np.int64)
    for c, g in enumerate(ordered):
        cls[g] = c
    members = tuple(np.array(g, dtype=np.int64) for g in ordered)
    counts = recount(lattice, cls, d)
    frac = np.array([flag[g].mean() for g in members])
    if not np.all((frac == 0) | (frac == 1)):
        raise NotEquitable("a class mixes marked and unmarked vertices")
    if engine is not None:
        keys = tuple(engine.canonical(lattice.words[int(g[0])]) for g in members)
        labels = tuple(pattern_label(k) for k in keys)
        reps = tuple(lattice.words[int(g[0])] for g in members)
    else:
        keys = reps = None
        labels = tuple(".".join(map(str, lattice.vertices[int(g[0])])) for g in members)
    return Partition(
        spec=lattice.spec,
        sizes=tuple(len(g) for g in members),
        marked_classes=tuple(int(i) for i in np.flatnonzero(frac == 1)),
        labels=labels,
        counts=counts,
        marked_fraction=frac,
        method=method,
        keys=keys,
        representatives=reps,
        engine=engine,
        members=members,
        vertices=lattice.vertices,
    )


def color_refinement(lattice: Lattice, flag: np.ndarray) -> np.ndarray:
    """Coarsest equitable coloring refining the marked/unmarked split."""
    colors = flag.astype(np.int64)
    n_colors = len(np.unique(colors))
    while True:
        keys = [(int(colors[i]),) + tuple(sorted(int(c) for c in colors[lattice.nbr[i]])) for i in range(lattice.num_vertices)]
        distinct = sorted(set(keys))
        if len(distinct) == n_colors:
            return colors
        dense = {k: c for c, k in enumerate(distinct)}
        colors = np.array([dense[k] for k in keys], dtype=np.int64)
        n_colors = len(distinct)


def refine(lattice: Lattice, marked: Iterable[Sequence[int]], method: str = "orbits") -> Partition:
    """Partition of an explicit lattice for a set of marked vertex addresses."""
    marked = [tuple(int(c) for c in v) for v in marked]
    flag = _marked_vector(lattice, marked)
    if method == "color":
        return _explicit_partition(lattice, color_refinement(lattice, flag), flag, "color")
    if method != "orbits":
        raise ValueError(f"unknown partition method {method!r}")
    words = [lattice.words[lattice.vertex_index(v)] for v in marked]
    fixed, words = marks_from_words(lattice.spec.dim, words)
    engine = OrbitEngine(lattice.spec, fixed, words)
    class_of = np.array([engine.key_index[engine.canonical(w)] for w in lattice.words], dtype=np.int64)
    return _explicit_partition(lattice, class_of, flag, "orbits", engine)


def refine_patterns(lattice: Lattice, marks: Iterable[Sequence[int]], fixed: Iterable[int] | None = None) -> Partition:
    """Explicit partition whose marked vertices are all words matching the given patterns."""
    sym = reduced_partition(lattice.spec, marks, fixed)
    engine = sym.engine
    keys = np.array([engine.key_index[engine.canonical(w)] for w in lattice.words], dtype=np.int64)
    flag = np.isin(keys, engine.marked_classes)
    return _explicit_partition(lattice, keys, flag, "orbits", engine)


def quotient(lattice: Lattice | None, partition: Partition, asymptotic: bool = False) -> QuotientMatrix:
    """Symmetric reduced adjacency acting on normalized class states.

    With a lattice and member lists the neighbor counts are recounted from the
    adjacency; otherwise the partition's own counts are used.
    """
    counts = partition.counts
    if lattice is not None and partition.members is not None:
        if lattice.num_vertices != partition.num_vertices:
            raise DimensionMismatch("lattice and partition sizes differ")
        cls = np.empty(lattice.num_vertices, dtype=np.int64)
        for c, g in enumerate(partition.members):
            cls[g] = c
        counts = recount(lattice, cls, partition.dim)
    if asymptotic:
        if partition.engine is None:
            raise ValueError("asymptotic entries need a pattern partition")
        entries = partition.engine.asymptotic_entries()
    else:
        sizes = partition.sizes
        d = partition.dim
        entries = np.zeros((d, d))
        for i, j in zip(*np.nonzero(counts)):
            entries[i, j] = counts[i, j] * math.sqrt(sizes[i] / sizes[j])
    if not np.allclose(entries, entries.T, atol=1e-12, rtol=1e-12):
        raise NotEquitable("quotient entries are not symmetric")
    entries = 0.5 * (entries + entries.T)
    return QuotientMatrix(entries, partition.sizes, counts, partition.labels, partition.spec.dim, asymptotic)


def lift(partition: Partition, reduced_state: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(reduced_state)
    if psi.shape != (partition.dim,):
        raise DimensionMismatch(f"expected {partition.dim} class amplitudes, got shape {psi.shape}")
    if partition.members is None:
        raise DimensionMismatch("lifting needs a partition computed on an explicit lattice")
    out = np.zeros(partition.num_vertices, dtype=np.result_type(psi.dtype, float))
    for amp, g, size in zip(psi, partition.members, partition.sizes):
        out[g] = amp / math.sqrt(size)
    return out


def project(partition: Partition, vertex_state: Sequence[complex]) -> np.ndarray:
    """Coordinates of a vertex state on the normalized class states."""
    phi = np.asarray(vertex_state)
    if partition.members is None or phi.shape != (partition.num_vertices,):
        raise DimensionMismatch("vertex state does not match the partition")
    return np.array([phi[g].sum() / math.sqrt(s) for g, s in zip(partition.members, partition.sizes)])


def partition_to_json(partition: Partition) -> str:
    classes = []
    for c in range(partition.dim):
        entry = {"size": int(partition.sizes[c]), "marked": c in partition.marked_classes, "label": partition.labels[c]}
        if partition.members is not None:
            entry["members"] = [list(partition.vertices[int(i)]) for i in partition.members[c]]
        classes.append(entry)
    return json.dumps({"classes": classes})


def quotient_to_csv(q: QuotientMatrix, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(q.labels)
    for row in q.entries:
        writer.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()

