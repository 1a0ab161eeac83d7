"""Permutations, automorphism tests and the pruned automorphism search.

Every verification in the toolkit reduces to ``find_automorphism``: a complete
backtracking over vertex images. Two colorings are carried down the tree, one
for the source side and one for the target side of the candidate map. Each
node individualizes the least vertex whose source cell is not a singleton,
tries every target in the matching cell (ascending), and refines both
colorings in lockstep by counting out-neighbours, and black out/in-arcs, per
color. Refinement commutes with automorphisms, so a mismatch between the two
sides prunes only maps that cannot extend to an automorphism, and the search
stays complete. Branching on the least unresolved vertex with ascending
targets makes the first accepted leaf the lexicographically least image
sequence.

The branching vertex is not picked by refinement-cell size, as nauty-style
searches pick it: a cell-size rule visits leaves out of lexicographic order,
and callers take the first leaf as the least automorphism.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from search_config import get_settings
from tournament import Tournament

if TYPE_CHECKING:
    from labeling import ArcLabeling, VertexLabeling

logger = logging.getLogger(__name__)


class PermutationError(ValueError):
    """Raised for malformed permutations or size mismatches."""


class EnumerationGuardError(ValueError):
    """Raised when full enumeration is requested above the configured guard."""


@dataclass(frozen=True)
class Permutation:
    image: Tuple[int, ...]

    def __post_init__(self) -> None:
        image = tuple(int(v) for v in self.image)
        if sorted(image) != list(range(len(image))):
            raise PermutationError(f"image {list(image)} is not a bijection on 0..{len(image) - 1}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, v: int) -> int:
        return self.image[v]

    def is_identity(self) -> bool:
        return all(v == w for v, w in enumerate(self.image))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other."""
        if other.n != self.n:
            raise PermutationError(f"cannot compose permutations of sizes {self.n} and {other.n}")
        return Permutation(tuple(self.image[w] for w in other.image))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for v, w in enumerate(self.image):
            inv[w] = v
        return Permutation(tuple(inv))

    def cycles(self) -> List[Tuple[int, ...]]:
        """Nontrivial cycles, each starting at its least element, ordered by that element."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start] or self.image[start] == start:
                continue
            cycle = [start]
            seen[start] = True
            v = self.image[start]
            while v != start:
                cycle.append(v)
                seen[v] = True
                v = self.image[v]
            out.append(tuple(cycle))
        return out

    def render(self, cycles: bool = False) -> str:
        if cycles:
            parts = self.cycles()
            return "".join("(" + " ".join(map(str, c)) + ")" for c in parts) or "()"
        return " ".join(map(str, self.image))

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "Permutation":
        text = text.strip()
        if "(" in text:
            return cls._parse_cycles(text, n)
        try:
            image = tuple(int(tok) for tok in text.split())
        except ValueError as exc:
            raise PermutationError(f"non-integer image in {text!r}") from exc
        if n is not None and len(image) != n:
            raise PermutationError(f"expected {n} images, found {len(image)}")
        return cls(image)

    @classmethod
    def _parse_cycles(cls, text: str, n: Optional[int]) -> "Permutation":
        if not re.fullmatch(r"(\(\s*(\d+\s*)*\)\s*)+", text):
            raise PermutationError(f"malformed cycle notation {text!r}")
        cycles = [[int(tok) for tok in body.split()] for body in re.findall(r"\(([^)]*)\)", text)]
        points = [v for c in cycles for v in c]
        size = n if n is not None else (max(points) + 1 if points else 0)
        image = list(range(size))
        seen = set()
        for cycle in cycles:
            for i, v in enumerate(cycle):
                if v >= size:
                    raise PermutationError(f"point {v} out of range 0..{size - 1}")
                if v in seen:
                    raise PermutationError(f"point {v} appears in two cycles")
                seen.add(v)
                image[v] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(image))


@dataclass(frozen=True)
class SearchConstraints:
    vertex_labels: Optional["VertexLabeling"] = None
    arc_labels: Optional["ArcLabeling"] = None
    fixed_pointwise: FrozenSet[int] = frozenset()
    exclude_identity: bool = False

    def validate(self, tournament: Tournament) -> None:
        if self.vertex_labels is not None:
            self.vertex_labels.check(tournament)
        if self.arc_labels is not None:
            self.arc_labels.check(tournament)
        for v in self.fixed_pointwise:
            tournament.check_vertex(v)


@dataclass
class SearchStats:
    """Counters accumulated across one or more searches."""

    searches: int = 0
    nodes: int = 0
    pruned: int = 0
    leaves: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {"searches": self.searches, "nodes": self.nodes, "pruned": self.pruned, "leaves": self.leaves}


def is_automorphism(tournament: Tournament, perm: Permutation) -> bool:
    if perm.n != tournament.n:
        raise PermutationError(f"permutation on {perm.n} points applied to a tournament of order {tournament.n}")
    p = np.asarray(perm.image)
    m = tournament.matrix
    return bool(np.array_equal(m[np.ix_(p, p)], m))


class _AutomorphismSearch:
    def __init__(
        self,
        tournament: Tournament,
        constraints: SearchConstraints,
        stats: SearchStats,
        pins: Optional[Mapping[int, int]] = None,
    ):
        self.tournament = tournament
        self.n = tournament.n
        self.constraints = constraints
        self.stats = stats
        self.pins = dict(pins or {})

        self.adjacency = tournament.matrix.astype(np.int32)
        self.black_vertices = np.zeros(self.n, dtype=bool)
        if constraints.vertex_labels is not None:
            self.black_vertices[sorted(constraints.vertex_labels.black)] = True
        self.black_arcs: Optional[np.ndarray] = None
        if constraints.arc_labels is not None and constraints.arc_labels.black_arcs:
            self.black_arcs = np.zeros((self.n, self.n), dtype=np.int32)
            for u, v in constraints.arc_labels.black_arcs:
                self.black_arcs[u, v] = 1
        self.fixed = sorted(constraints.fixed_pointwise)

    # -------------------------------------------------------- colorings

    def _initial(self, side: int) -> np.ndarray:
        keys = np.zeros((self.n, 3), dtype=np.int64)
        keys[:, 0] = self.black_vertices
        for rank, v in enumerate(self.fixed, start=1):
            keys[v, 1] = rank
        for rank, (u, w) in enumerate(sorted(self.pins.items()), start=1):
            keys[u if side == 0 else w, 2] = rank
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        return inverse.reshape(-1)

    def _signatures(self, colors: np.ndarray) -> np.ndarray:
        m = int(colors.max()) + 1
        onehot = np.zeros((self.n, m), dtype=np.int32)
        onehot[np.arange(self.n), colors] = 1
        blocks = [colors[:, None], self.adjacency @ onehot]
        if self.black_arcs is not None:
            blocks.append(self.black_arcs @ onehot)
            blocks.append(self.black_arcs.T @ onehot)
        return np.hstack(blocks)

    def _refine_pair(self, alpha: np.ndarray, beta: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        while True:
            m = int(alpha.max()) + 1
            rows_a, inv_a, counts_a = np.unique(self._signatures(alpha), axis=0, return_inverse=True, return_counts=True)
            rows_b, inv_b, counts_b = np.unique(self._signatures(beta), axis=0, return_inverse=True, return_counts=True)
            if rows_a.shape != rows_b.shape or not np.array_equal(rows_a, rows_b) or not np.array_equal(counts_a, counts_b):
                return None
            alpha, beta = inv_a.reshape(-1), inv_b.reshape(-1)
            if len(rows_a) == m:
                return alpha, beta

    # -------------------------------------------------------- leaves

    def _accepts(self, image: np.ndarray) -> bool:
        if self.constraints.exclude_identity and np.array_equal(image, np.arange(self.n)):
            return False
        for v in self.fixed:
            if image[v] != v:
                return False
        for u, w in self.pins.items():
            if image[u] != w:
                return False
        m = self.tournament.matrix
        if not np.array_equal(m[np.ix_(image, image)], m):
            return False
        if not np.array_equal(self.black_vertices[image], self.black_vertices):
            return False
        if self.black_arcs is not None and not np.array_equal(self.black_arcs[np.ix_(image, image)], self.black_arcs):
            return False
        return True

    def leaves(self) -> Iterator[Permutation]:
        self.stats.searches += 1
        start = self._refine_pair(self._initial(0), self._initial(1))
        if start is None:
            self.stats.pruned += 1
            return
        yield from self._descend(*start)

    def _descend(self, alpha: np.ndarray, beta: np.ndarray) -> Iterator[Permutation]:
        self.stats.nodes += 1
        m = int(alpha.max()) + 1
        if m == self.n:
            self.stats.leaves += 1
            inv_beta = np.empty(self.n, dtype=np.intp)
            inv_beta[beta] = np.arange(self.n)
            image = inv_beta[alpha]
            if self._accepts(image):
                yield Permutation(tuple(int(v) for v in image))
            return

        sizes = np.bincount(alpha, minlength=m)
        u = int(np.flatnonzero(sizes[alpha] > 1)[0])
        cell = alpha[u]
        for w in np.flatnonzero(beta == cell):
            a2, b2 = alpha.copy(), beta.copy()
            a2[u] = m
            b2[w] = m
            refined = self._refine_pair(a2, b2)
            if refined is None:
                self.stats.pruned += 1
                continue
            yield from self._descend(*refined)


def find_automorphism(
    tournament: Tournament,
    constraints: Optional[SearchConstraints] = None,
    stats: Optional[SearchStats] = None,
) -> Optional[Permutation]:
    """Lexicographically least automorphism satisfying the constraints, or None."""
    constraints = constraints or SearchConstraints()
    constraints.validate(tournament)
    search = _AutomorphismSearch(tournament, constraints, stats if stats is not None else SearchStats())
    return next(search.leaves(), None)


def find_mapping_automorphism(
    tournament: Tournament, source: int, target: int, stats: Optional[SearchStats] = None
) -> Optional[Permutation]:
    """Some automorphism sending source to target, or None."""
    tournament.check_vertex(source)
    tournament.check_vertex(target)
    search = _AutomorphismSearch(
        tournament, SearchConstraints(), stats if stats is not None else SearchStats(), pins={source: target}
    )
    return next(search.leaves(), None)


def enumerate_automorphisms(
    tournament: Tournament,
    guard: Optional[int] = None,
    constraints: Optional[SearchConstraints] = None,
) -> List[Permutation]:
    """All of Aut(T) (filtered by constraints when given), sorted by image."""
    guard = get_settings().enumeration_guard if guard is None else guard
    if tournament.n > guard:
        raise EnumerationGuardError(f"enumeration guard exceeded: n={tournament.n} > {guard}")
    constraints = constraints or SearchConstraints()
    constraints.validate(tournament)
    search = _AutomorphismSearch(tournament, constraints, SearchStats())
    return sorted(search.leaves(), key=lambda p: p.image)


def automorphism_group_order(tournament: Tournament, guard: Optional[int] = None) -> int:
    return len(enumerate_automorphisms(tournament, guard=guard))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x


def orbits(tournament: Tournament, guard: Optional[int] = None) -> List[FrozenSet[int]]:
    """Vertex orbits of Aut(T), each a frozenset, ordered by least element.

    Within the enumeration guard the whole group is listed; above it, one
    pinned existence search per candidate pair supplies the generators.
    """
    guard = get_settings().enumeration_guard if guard is None else guard
    n = tournament.n
    uf = _UnionFind(n)
    if n <= guard:
        generators: Sequence[Permutation] = enumerate_automorphisms(tournament, guard=guard)
        for g in generators:
            for v in range(n):
                uf.union(v, g(v))
    else:
        stats = SearchStats()
        for u in range(n):
            for w in range(u + 1, n):
                if uf.find(u) == uf.find(w):
                    continue
                g = find_mapping_automorphism(tournament, u, w, stats=stats)
                if g is not None:
                    for v in range(n):
                        uf.union(v, g(v))
        logger.debug("Orbits of n=%d via %d pinned searches", n, stats.searches)

    classes: Dict[int, List[int]] = {}
    for v in range(n):
        classes.setdefault(uf.find(v), []).append(v)
    return sorted((frozenset(c) for c in classes.values()), key=min)
