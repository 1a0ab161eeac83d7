"""Tournament representation, generators, structural queries and the .trn format."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from search_config import get_settings

logger = logging.getLogger(__name__)

Arc = Tuple[int, int]


class TournamentError(ValueError):
    """Raised for arc sets or parameters that do not describe a tournament."""


class TournamentFormatError(TournamentError):
    """Raised when a .trn document cannot be parsed."""

    def __init__(self, message: str, line: int, column: int = 0):
        location = f"line {line}" + (f", column {column}" if column else "")
        super().__init__(f"{location}: {message}")
        self.line = line
        self.column = column


class Tournament:
    """Complete oriented graph on vertices 0..n-1.

    The orientation matrix is stored bit-packed row by row (numpy.packbits);
    ``matrix`` unpacks it on first use. Instances are immutable and safe to
    share between threads and processes.
    """

    def __init__(self, n: int, packed: np.ndarray):
        self._n = n
        self._packed = packed
        self._packed.setflags(write=False)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Tournament":
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise TournamentError(f"orientation matrix must be square, got shape {matrix.shape}")
        _check_invariants(matrix)
        return cls(matrix.shape[0], np.packbits(matrix, axis=1))

    @property
    def n(self) -> int:
        return self._n

    @cached_property
    def matrix(self) -> np.ndarray:
        unpacked = np.unpackbits(self._packed, axis=1, count=self._n).astype(bool)
        unpacked.setflags(write=False)
        return unpacked

    def has_arc(self, u: int, v: int) -> bool:
        self.check_vertex(u)
        self.check_vertex(v)
        return bool(self.matrix[u, v])

    def arc_between(self, u: int, v: int) -> Arc:
        """The unique arc on the pair {u, v}, oriented as in the tournament."""
        if u == v:
            raise TournamentError(f"no arc joins vertex {u} to itself")
        return (u, v) if self.has_arc(u, v) else (v, u)

    def arcs(self) -> List[Arc]:
        rows, cols = np.nonzero(self.matrix)
        return [(int(u), int(v)) for u, v in zip(rows, cols)]

    def check_vertex(self, v: int) -> None:
        if not 0 <= int(v) < self._n:
            raise TournamentError(f"vertex {v} out of range 0..{self._n - 1}")

    def digest(self) -> str:
        return hashlib.sha256(render_trn(self).encode("ascii")).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tournament):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._packed, other._packed)

    def __hash__(self) -> int:
        return hash((self._n, self._packed.tobytes()))

    def __repr__(self) -> str:
        return f"Tournament(n={self._n})"


def _check_invariants(matrix: np.ndarray) -> None:
    if np.any(np.diagonal(matrix)):
        v = int(np.flatnonzero(np.diagonal(matrix))[0])
        raise TournamentError(f"self-loop at vertex {v}")
    both = matrix & matrix.T
    if np.any(both):
        u, v = (int(x) for x in np.argwhere(both)[0])
        raise TournamentError(f"pair {{{u},{v}}} is oriented both ways")
    neither = ~(matrix | matrix.T)
    np.fill_diagonal(neither, False)
    if np.any(neither):
        u, v = (int(x) for x in np.argwhere(neither)[0])
        raise TournamentError(f"pair {{{u},{v}}} has no arc")


def make_tournament(n: int, arcs: Iterable[Arc]) -> Tournament:
    if n < 1:
        raise TournamentError(f"a tournament needs at least one vertex, got n={n}")
    matrix = np.zeros((n, n), dtype=bool)
    seen: Set[Tuple[int, int]] = set()
    for u, v in arcs:
        if not (0 <= u < n and 0 <= v < n):
            raise TournamentError(f"pair ({u},{v}) has an index out of range 0..{n - 1}")
        if u == v:
            raise TournamentError(f"pair ({u},{v}) is a self-loop")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise TournamentError(f"duplicate pair {{{key[0]},{key[1]}}}")
        seen.add(key)
        matrix[u, v] = True
    expected = n * (n - 1) // 2
    if len(seen) != expected:
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) not in seen:
                    raise TournamentError(f"missing pair {{{u},{v}}}")
    return Tournament(n, np.packbits(matrix, axis=1))


def transitive_tournament(n: int) -> Tournament:
    if n < 1:
        raise TournamentError(f"a tournament needs at least one vertex, got n={n}")
    return Tournament.from_matrix(np.triu(np.ones((n, n), dtype=bool), k=1))


# ---------------------------------------------------------------- H_k family


@dataclass(frozen=True)
class HkIndex:
    """Base-3 addressing of H_k: digit d (most significant first) is the tertian at level d+1."""

    k: int

    @property
    def order(self) -> int:
        return 3 ** self.k

    def digits(self, v: int) -> Tuple[int, ...]:
        out = []
        for _ in range(self.k):
            v, d = divmod(v, 3)
            out.append(d)
        return tuple(reversed(out))

    def tertian(self, v: int, level: int = 1) -> int:
        """Index 0..2 of the tertian containing v at the given recursion level."""
        if not 1 <= level <= self.k:
            raise TournamentError(f"level {level} outside 1..{self.k}")
        return (v // 3 ** (self.k - level)) % 3

    def basic_module(self, v: int) -> int:
        return v // 3

    def tertian_blocks(self) -> List[range]:
        size = 3 ** (self.k - 1)
        return [range(i * size, (i + 1) * size) for i in range(3)]


def generate_hk(k: int, depth_guard: Optional[int] = None) -> Tournament:
    guard = get_settings().hk_depth_guard if depth_guard is None else depth_guard
    if k < 0:
        raise TournamentError(f"depth must be non-negative, got k={k}")
    if k > guard:
        raise TournamentError(f"depth k={k} exceeds the resource guard k <= {guard}")

    n = 3 ** k
    packed = np.zeros((n, (n + 7) // 8), dtype=np.uint8)
    row = np.zeros(n, dtype=bool)
    for u in range(n):
        row[:] = False
        # at each level, u beats the whole next block of its enclosing triple
        for level in range(k):
            size = 3 ** (k - 1 - level)
            base = u - u % (3 * size)
            nxt = ((u - base) // size + 1) % 3
            row[base + nxt * size : base + (nxt + 1) * size] = True
        packed[u] = np.packbits(row)
    logger.debug("Generated H_%d with %d vertices", k, n)
    return Tournament(n, packed)


def hk_depth(tournament: Tournament) -> Optional[int]:
    """k when the tournament is exactly generate_hk(k), otherwise None."""
    n, k = tournament.n, 0
    while n % 3 == 0:
        n //= 3
        k += 1
    if n != 1:
        return None
    return k if tournament == generate_hk(k, depth_guard=k) else None


def basic_modules(k: int) -> List[frozenset]:
    if k < 1:
        raise TournamentError("H_0 has no basic modules (k must be >= 1)")
    return [frozenset((3 * m, 3 * m + 1, 3 * m + 2)) for m in range(3 ** (k - 1))]


# ---------------------------------------------------------------- random


def generate_random(n: int, seed: int) -> Tournament:
    """Orient each pair i < j by one fair coin.

    Coins are the low bits of consecutive raw 64-bit outputs of PCG64 seeded
    with ``seed``, consumed in row-major order of the pairs. The raw PCG64
    stream is stable across numpy releases and platforms.
    """
    if n < 1:
        raise TournamentError(f"a tournament needs at least one vertex, got n={n}")
    pairs = n * (n - 1) // 2
    coins = (np.random.PCG64(seed).random_raw(pairs) & np.uint64(1)).astype(bool)
    upper = np.zeros((n, n), dtype=bool)
    iu = np.triu_indices(n, k=1)
    upper[iu] = coins
    matrix = upper | np.triu(~upper, k=1).T
    return Tournament.from_matrix(matrix)


def random_corpus(count: int, seed: int, min_n: int = 1, max_n: int = 7) -> List[Tuple[int, int, Tournament]]:
    """Deterministic corpus of (n, subseed, tournament) triples."""
    if not 1 <= min_n <= max_n:
        raise TournamentError(f"invalid order range {min_n}..{max_n}")
    raw = np.random.PCG64(seed).random_raw(2 * count)
    corpus = []
    for i in range(count):
        n = min_n + int(raw[2 * i] % np.uint64(max_n - min_n + 1))
        subseed = int(raw[2 * i + 1])
        corpus.append((n, subseed, generate_random(n, subseed)))
    return corpus


# ---------------------------------------------------------------- queries


def relationship_difference(tournament: Tournament, x: int, y: int) -> int:
    """D_T(x, y): vertices z other than x, y with z->x exactly when y->z."""
    tournament.check_vertex(x)
    tournament.check_vertex(y)
    if x == y:
        return 0
    m = tournament.matrix
    beats_x = m[:, x]
    beaten_by_y = m[y, :]
    differs = beats_x == beaten_by_y
    differs[[x, y]] = False
    return int(differs.sum())


def is_module(tournament: Tournament, members: Iterable[int]) -> bool:
    inside = sorted(set(members))
    for v in inside:
        tournament.check_vertex(v)
    outside = sorted(set(range(tournament.n)) - set(inside))
    if not inside or not outside:
        return True
    block = tournament.matrix[np.ix_(outside, inside)]
    return bool(np.all(block.all(axis=1) | ~block.any(axis=1)))


def hamiltonian_path(tournament: Tournament) -> List[int]:
    """Insertion construction: each vertex goes before the first path vertex it beats."""
    m = tournament.matrix
    path: List[int] = []
    for v in range(tournament.n):
        for i, p in enumerate(path):
            if m[v, p]:
                path.insert(i, v)
                break
        else:
            path.append(v)
    return path


def induced_subtournament(tournament: Tournament, members: Iterable[int]) -> Tuple[Tournament, Dict[int, int]]:
    """T[S] on |S| vertices, numbered by ascending original id, with the old->new map."""
    chosen = sorted(set(members))
    if not chosen:
        raise TournamentError("cannot induce a subtournament on an empty vertex set")
    for v in chosen:
        tournament.check_vertex(v)
    sub = tournament.matrix[np.ix_(chosen, chosen)]
    return Tournament.from_matrix(sub), {old: new for new, old in enumerate(chosen)}


# ---------------------------------------------------------------- .trn format


def render_trn(tournament: Tournament) -> str:
    lines = [str(tournament.n)]
    for row in tournament.matrix:
        lines.append("".join("1" if bit else "0" for bit in row))
    return "\n".join(lines) + "\n"


def parse_trn(text: str) -> Tournament:
    if not text.endswith("\n"):
        raise TournamentFormatError("missing trailing newline", line=max(1, text.count("\n") + 1))
    lines = text[:-1].split("\n")
    header = lines[0]
    if not header.isdigit():
        raise TournamentFormatError(f"expected vertex count, got {header!r}", line=1, column=1)
    n = int(header)
    if n < 1:
        raise TournamentFormatError("vertex count must be at least 1", line=1, column=1)
    if len(lines) != n + 1:
        raise TournamentFormatError(f"expected {n} matrix rows, found {len(lines) - 1}", line=len(lines))

    matrix = np.zeros((n, n), dtype=bool)
    for i, row in enumerate(lines[1:]):
        line_no = i + 2
        if len(row) != n:
            raise TournamentFormatError(f"expected {n} characters, found {len(row)}", line=line_no)
        codes = np.frombuffer(row.encode("latin-1", errors="replace"), dtype=np.uint8)
        bad = np.flatnonzero((codes != ord("0")) & (codes != ord("1")))
        if bad.size:
            j = int(bad[0])
            raise TournamentFormatError(f"unexpected character {row[j]!r}", line=line_no, column=j + 1)
        matrix[i] = codes == ord("1")

    loops = np.flatnonzero(np.diagonal(matrix))
    if loops.size:
        v = int(loops[0])
        raise TournamentFormatError(f"self-loop at vertex {v}", line=v + 2, column=v + 1)
    clash = np.argwhere(np.triu(matrix == matrix.T, k=1))
    if clash.size:
        u, v = (int(x) for x in clash[0])
        state = "oriented both ways" if matrix[u, v] else "missing"
        raise TournamentFormatError(f"pair {{{u},{v}}} is {state}", line=u + 2, column=v + 1)
    return Tournament(n, np.packbits(matrix, axis=1))


def read_trn(path) -> Tournament:
    # undecodable bytes become U+FFFD so parse_trn reports them with line and column
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        return parse_trn(f.read())
