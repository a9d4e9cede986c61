"""Truncated simplex lattices.

A lattice of order r and dimension M starts from the complete graph
K_{M+1}; each round replaces every vertex by a copy of K_M whose clones
inherit the replaced vertex's edges, one per clone.

Vertices are handled internally as words ``(w0, ..., wr)`` over the letters
``0..M`` with no two equal consecutive letters.  Letter ``w0`` names the base
vertex and ``wk`` names the clone created at round k.  Clone ``wk`` of the
clique that replaced ``(w0, ..., w_{k-1})`` carries the edge that used to point
in direction ``wk``: toward the sibling ``(..., w_{k-2}, wk)`` when
``wk != w_{k-2}``, and along the inherited edge otherwise.  Letter
permutations are then graph automorphisms.

The public address ``(c0, ..., cr)`` is the rank form of the word: ``c0 = w0``
and ``ck`` is the rank of ``wk`` among the M letters different from
``w_{k-1}``, so ``ck`` lies in ``[0, M-1]``.  Address order and word order
agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSpec, LevelOutOfRange, UnknownVertex

Address = tuple[int, ...]
Word = tuple[int, ...]


@dataclass(frozen=True)
class LatticeSpec:
    order: int
    dim: int

    def __post_init__(self) -> None:
        if not isinstance(self.order, (int, np.integer)) or not isinstance(self.dim, (int, np.integer)):
            raise InvalidSpec(f"order and dim must be integers, got {self.order!r}, {self.dim!r}")
        if self.order < 0:
            raise InvalidSpec(f"order must be >= 0, got {self.order}")
        if self.dim < 2:
            raise InvalidSpec(f"dim must be >= 2, got {self.dim}")
        if self.order >= 2 and self.dim < 4:
            raise InvalidSpec(f"order {self.order} needs dim >= 4, got {self.dim}")

    @property
    def num_vertices(self) -> int:
        return (self.dim + 1) * self.dim ** self.order

    @property
    def num_edges(self) -> int:
        return self.num_vertices * self.dim // 2


def address_to_word(address: Sequence[int]) -> Word:
    word = [int(address[0])]
    for c in address[1:]:
        c = int(c)
        word.append(c if c < word[-1] else c + 1)
    return tuple(word)


def word_to_address(word: Sequence[int]) -> Address:
    out = [int(word[0])]
    for prev, a in zip(word, word[1:]):
        out.append(a if a < prev else a - 1)
    return tuple(out)


def external_neighbor(word: Word) -> Word:
    """The neighbor reached through the inherited (non-clique) edge; needs r >= 1."""
    if len(word) == 2:
        return (word[1], word[0])
    head, y, x = word[:-2], word[-2], word[-1]
    if x != head[-1]:
        return head + (x, y)
    up = external_neighbor(word[:-1])
    return up + (up[-2],)


def word_neighbors(word: Word, dim: int) -> list[Word]:
    """All M neighbors of a word, clique members first, external edge last."""
    if len(word) == 1:
        return [(a,) for a in range(dim + 1) if a != word[0]]
    out = [word[:-1] + (a,) for a in range(dim + 1) if a != word[-1] and a != word[-2]]
    out.append(external_neighbor(word))
    return out


def enumerate_words(order: int, dim: int) -> list[Word]:
    out: list[Word] = []

    def grow(prefix: list[int]) -> None:
        if len(prefix) == order + 1:
            out.append(tuple(prefix))
            return
        for a in range(dim + 1):
            if not prefix or a != prefix[-1]:
                prefix.append(a)
                grow(prefix)
                prefix.pop()

    grow([])
    return out


@dataclass(frozen=True, eq=False)
class Lattice:
    spec: LatticeSpec
    vertices: tuple[Address, ...]
    words: tuple[Word, ...]
    nbr: np.ndarray  # (N, M) vertex indices, rows sorted
    index: dict[Address, int] = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def vertex_index(self, v: Sequence[int]) -> int:
        try:
            return self.index[tuple(int(c) for c in v)]
        except (KeyError, TypeError, ValueError):
            raise UnknownVertex(f"{tuple(v)!r} is not a vertex of order-{self.spec.order} dim-{self.spec.dim} lattice") from None

    def edges(self) -> list[tuple[Address, Address]]:
        """Canonical edge list: smaller endpoint first, sorted."""
        out = []
        for i, row in enumerate(self.nbr):
            for j in row:
                if i < j:
                    out.append((self.vertices[i], self.vertices[int(j)]))
        out.sort()
        return out

    def adjacency_matrix(self) -> np.ndarray:
        n = self.num_vertices
        a = np.zeros((n, n))
        rows = np.repeat(np.arange(n), self.nbr.shape[1])
        a[rows, self.nbr.ravel()] = 1.0
        return a


def _from_words(spec: LatticeSpec, words: list[Word], adjacency: list[list[Word]]) -> Lattice:
    vertices = tuple(word_to_address(w) for w in words)
    index = {v: i for i, v in enumerate(vertices)}
    windex = {w: i for i, w in enumerate(words)}
    nbr = np.array([sorted(windex[u] for u in row) for row in adjacency], dtype=np.int64)
    nbr = nbr.reshape(len(words), spec.dim)
    return Lattice(spec, vertices, tuple(words), nbr, index)


def build_lattice(spec: LatticeSpec) -> Lattice:
    words = enumerate_words(spec.order, spec.dim)
    return _from_words(spec, words, [word_neighbors(w, spec.dim) for w in words])


def neighbors(lattice: Lattice, v: Sequence[int]) -> set[Address]:
    i = lattice.vertex_index(v)
    return {lattice.vertices[int(j)] for j in lattice.nbr[i]}


def subgraph_id(lattice: Lattice, v: Sequence[int], level: int) -> Address:
    """Address prefix naming the level-k complete subgraph that contains v."""
    r = lattice.spec.order
    if not 0 <= level < r:
        raise LevelOutOfRange(f"level must lie in [0, {r}), got {level}")
    i = lattice.vertex_index(v)
    return lattice.vertices[i][: r - level]


def lattice_to_json(lattice: Lattice) -> str:
    doc = {
        "order": lattice.spec.order,
        "dim": lattice.spec.dim,
        "edges": [[list(a), list(b)] for a, b in lattice.edges()],
    }
    return json.dumps(doc, separators=(",", ":"))


def save_lattice(lattice: Lattice, path: str | Path) -> None:
    Path(path).write_text(lattice_to_json(lattice))


def lattice_from_json(text: str) -> Lattice:
    doc = json.loads(text)
    try:
        spec = LatticeSpec(int(doc["order"]), int(doc["dim"]))
        edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"malformed lattice document: {exc}") from None
    words = enumerate_words(spec.order, spec.dim)
    known = {word_to_address(w) for w in words}
    adjacency: dict[Word, list[Word]] = {w: [] for w in words}
    for a, b in edges:
        a, b = tuple(a), tuple(b)
        for v in (a, b):
            if v not in known:
                raise UnknownVertex(f"edge endpoint {v!r} is not a valid address")
        wa, wb = address_to_word(a), address_to_word(b)
        adjacency[wa].append(wb)
        adjacency[wb].append(wa)
    if any(len(row) != spec.dim for row in adjacency.values()):
        raise InvalidSpec("lattice document is not dim-regular")
    return _from_words(spec, words, [adjacency[w] for w in words])


def load_lattice(path: str | Path) -> Lattice:
    return lattice_from_json(Path(path).read_text())


def addresses_to_words(lattice: Lattice, addresses: Iterable[Sequence[int]]) -> list[Word]:
    return [lattice.words[lattice.vertex_index(a)] for a in addresses]
