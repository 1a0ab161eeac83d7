"""Vertex and arc 2-labelings, the recursive white/black labelings of H_k, and verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import FrozenSet, Iterable, Optional, Tuple

from search_config import get_settings
from symmetry import Permutation, SearchConstraints, SearchStats, find_automorphism
from tournament import Arc, Tournament, TournamentError

logger = logging.getLogger(__name__)


class Color(str, Enum):
    WHITE = "white"
    BLACK = "black"

    @property
    def symbol(self) -> str:
        return "B" if self is Color.BLACK else "W"


class LabelingError(ValueError):
    """Raised when a labeling does not fit its tournament."""


class LabelingFormatError(LabelingError):
    """Raised when a .vlab or .alab document cannot be parsed."""

    def __init__(self, message: str, line: int, column: int = 0):
        location = f"line {line}" + (f", column {column}" if column else "")
        super().__init__(f"{location}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class VertexLabeling:
    colors: Tuple[Color, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "colors", tuple(Color(c) for c in self.colors))

    @classmethod
    def from_black(cls, n: int, black: Iterable[int]) -> "VertexLabeling":
        black = set(black)
        return cls(tuple(Color.BLACK if v in black else Color.WHITE for v in range(n)))

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def black(self) -> FrozenSet[int]:
        return frozenset(v for v, c in enumerate(self.colors) if c is Color.BLACK)

    def count(self, color: Color) -> int:
        return sum(1 for c in self.colors if c is color)

    def check(self, tournament: Tournament) -> None:
        if self.n != tournament.n:
            raise LabelingError(f"vertex labeling has {self.n} entries, tournament has {tournament.n} vertices")

    def render(self) -> str:
        return "".join(c.symbol for c in self.colors) + "\n"

    @classmethod
    def parse(cls, text: str) -> "VertexLabeling":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) != 1:
            raise LabelingFormatError(f"expected a single line of W/B, found {len(lines)} lines", line=max(1, len(lines)))
        colors = []
        for j, ch in enumerate(lines[0]):
            if ch == "W":
                colors.append(Color.WHITE)
            elif ch == "B":
                colors.append(Color.BLACK)
            else:
                raise LabelingFormatError(f"unexpected character {ch!r}", line=1, column=j + 1)
        return cls(tuple(colors))


@dataclass(frozen=True)
class ArcLabeling:
    """Black arcs only; every other arc is white."""

    black_arcs: FrozenSet[Arc] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "black_arcs", frozenset((int(u), int(v)) for u, v in self.black_arcs))

    def __len__(self) -> int:
        return len(self.black_arcs)

    def endpoints(self) -> FrozenSet[int]:
        return frozenset(v for arc in self.black_arcs for v in arc)

    def shifted(self, offset: int) -> "ArcLabeling":
        return ArcLabeling(frozenset((u + offset, v + offset) for u, v in self.black_arcs))

    def check(self, tournament: Tournament) -> None:
        for u, v in sorted(self.black_arcs):
            try:
                present = tournament.has_arc(u, v)
            except TournamentError as exc:
                raise LabelingError(f"black arc ({u},{v}): {exc}") from exc
            if not present:
                raise LabelingError(f"black arc ({u},{v}) is not an arc of the tournament")

    def render(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in sorted(self.black_arcs))

    @classmethod
    def parse(cls, text: str) -> "ArcLabeling":
        arcs = set()
        for i, line in enumerate(text.split("\n"), start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise LabelingFormatError(f"expected 'u v', got {line!r}", line=i)
            arc = (int(parts[0]), int(parts[1]))
            if arc in arcs:
                raise LabelingFormatError(f"duplicate black arc {arc}", line=i)
            arcs.add(arc)
        return cls(frozenset(arcs))


@dataclass(frozen=True)
class DistinguishingVerdict:
    distinguishing: bool
    witness: Optional[Permutation] = None

    def __bool__(self) -> bool:
        return self.distinguishing


# ---------------------------------------------------------------- H_k labelings


@lru_cache(maxsize=None)
def _hk_pattern(k: int, white: bool) -> Tuple[bool, ...]:
    """Black flags of the white (or black) labeling of H_k; the minority copy is tertian 3."""
    if k == 0:
        return (not white,)
    major = _hk_pattern(k - 1, white)
    minor = _hk_pattern(k - 1, not white)
    return major + major + minor


def _check_depth(k: int) -> None:
    guard = get_settings().hk_depth_guard
    if not 0 <= k <= guard:
        raise TournamentError(f"depth k={k} outside 0..{guard}")


def white_labeling(k: int) -> VertexLabeling:
    _check_depth(k)
    return VertexLabeling(tuple(Color.BLACK if b else Color.WHITE for b in _hk_pattern(k, True)))


def black_labeling(k: int) -> VertexLabeling:
    _check_depth(k)
    return VertexLabeling(tuple(Color.BLACK if b else Color.WHITE for b in _hk_pattern(k, False)))


def classify_hk_labeling(k: int, black: Iterable[int]) -> Optional[str]:
    """'white' or 'black' when the black set forms that labeling of H_k, tertian order free."""
    flags = [False] * 3 ** k
    for v in black:
        flags[v] = True

    def kind(lo: int, size: int) -> Optional[str]:
        if size == 1:
            return "black" if flags[lo] else "white"
        third = size // 3
        kinds = [kind(lo + i * third, third) for i in range(3)]
        if kinds.count("white") == 2 and kinds.count("black") == 1:
            return "white"
        if kinds.count("black") == 2 and kinds.count("white") == 1:
            return "black"
        return None

    return kind(0, 3 ** k)


def restrict_labeling(labeling: VertexLabeling, members: Iterable[int]) -> VertexLabeling:
    """Labeling of T[S] with vertices renumbered by ascending original id."""
    return VertexLabeling(tuple(labeling.colors[v] for v in sorted(set(members))))


def class_to_labeling(tournament: Tournament, members: Iterable[int]) -> VertexLabeling:
    members = set(members)
    for v in members:
        tournament.check_vertex(v)
    return VertexLabeling.from_black(tournament.n, members)


# ---------------------------------------------------------------- verification


def is_distinguishing_vertex(
    tournament: Tournament, labeling: VertexLabeling, stats: Optional[SearchStats] = None
) -> DistinguishingVerdict:
    witness = find_automorphism(
        tournament, SearchConstraints(vertex_labels=labeling, exclude_identity=True), stats=stats
    )
    return DistinguishingVerdict(witness is None, witness)


def is_distinguishing_arc(
    tournament: Tournament, labeling: ArcLabeling, stats: Optional[SearchStats] = None
) -> DistinguishingVerdict:
    witness = find_automorphism(
        tournament, SearchConstraints(arc_labels=labeling, exclude_identity=True), stats=stats
    )
    return DistinguishingVerdict(witness is None, witness)


def preserves_arc_labeling(labeling: ArcLabeling, perm: Permutation) -> bool:
    return {(perm(u), perm(v)) for u, v in labeling.black_arcs} == set(labeling.black_arcs)
