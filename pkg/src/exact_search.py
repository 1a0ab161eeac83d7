"""
Exact minimum searches over vertex and arc subsets.

Each search walks subsets by increasing size in lexicographic order and
stops at the first one passing its predicate, so the witness is the
lexicographically least of minimum size. When Aut(T) fits under the
enumeration guard, subsets that are not the least member of their orbit
are skipped; the least member of the orbit holding the least witness is
that witness, so pruning never changes the answer.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from certificate import Certificate, Verdict
from labeling import ArcLabeling, VertexLabeling, is_distinguishing_arc, is_distinguishing_vertex
from search_config import SearchSettings, get_settings
from symmetry import SearchConstraints, SearchStats, enumerate_automorphisms, find_automorphism
from tournament import Arc, Tournament, TournamentError, hamiltonian_path, hk_depth, induced_subtournament

logger = logging.getLogger(__name__)


class ExhaustionPolicy(str, Enum):
    FAIL = "fail"
    RETURN_BEST = "return-best-found"


class SearchBudget(BaseModel):
    """Caps on one exact search. A size cap of 0 allows only the empty set."""

    model_config = ConfigDict(frozen=True)

    max_subset_size: Optional[int] = Field(default=None, ge=0)
    max_candidates: Optional[int] = Field(default=None, ge=1)
    on_exhaustion: ExhaustionPolicy = ExhaustionPolicy.FAIL
    orbit_pruning: bool = True

    @classmethod
    def from_settings(cls, settings: Optional[SearchSettings] = None) -> "SearchBudget":
        settings = settings or get_settings()
        return cls(
            max_subset_size=settings.max_subset_size,
            max_candidates=settings.max_candidates,
            on_exhaustion=ExhaustionPolicy(settings.on_exhaustion),
            orbit_pruning=settings.orbit_pruning,
        )


@dataclass
class SearchStatistics:
    candidates: int = 0
    skipped_by_orbit: int = 0
    skipped_by_filter: int = 0
    failed_sizes: Dict[int, int] = field(default_factory=dict)
    group_order: Optional[int] = None
    elapsed_ms: float = 0.0
    automorphism: SearchStats = field(default_factory=SearchStats)

    def as_dict(self) -> Dict[str, float]:
        out: Dict[str, float] = {
            "candidates": self.candidates,
            "skipped_by_orbit": self.skipped_by_orbit,
            "skipped_by_filter": self.skipped_by_filter,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }
        if self.group_order is not None:
            out["group_order"] = self.group_order
        for size, count in sorted(self.failed_sizes.items()):
            out[f"failed_size_{size}"] = count
        out.update({f"aut_{key}": value for key, value in self.automorphism.as_dict().items()})
        return out


class BudgetExhausted(RuntimeError):
    """The budget ran out before the minimum was reached."""

    def __init__(self, quantity: str, lower_bound: int, reason: str, statistics: SearchStatistics):
        super().__init__(f"{quantity}: budget exhausted ({reason}); minimum is at least {lower_bound}")
        self.quantity = quantity
        self.lower_bound = lower_bound
        self.reason = reason
        self.statistics = statistics


class BoundViolation(RuntimeError):
    """An object guaranteed to exist within a bound was not found."""


@dataclass
class SearchResult:
    quantity: str
    value: Optional[int]
    witness: Optional[tuple]
    exact: bool
    lower_bound: int
    statistics: SearchStatistics

    @property
    def witness_kind(self) -> str:
        return "arcs" if self.quantity == "rho_prime" else "vertices"

    def to_certificate(self, tournament: Tournament) -> Certificate:
        cert = Certificate(
            quantity=self.quantity,
            input_hash=tournament.digest(),
            order=tournament.n,
            value=self.value,
            exact=self.exact,
            lower_bound=self.lower_bound,
            witness_kind=self.witness_kind,
            witness=None if self.witness is None else list(self.witness),
            statistics=self.statistics.as_dict(),
        )
        if cert.witness is not None:
            cert.verdict = Verdict.VERIFIED if cert.recheck(tournament) else Verdict.REJECTED
        return cert


# ---------------------------------------------------------------- predicates


def _check_members(tournament: Tournament, members: Sequence[int]) -> frozenset:
    for v in members:
        tournament.check_vertex(v)
    return frozenset(members)


def is_determining_set(tournament: Tournament, members: Sequence[int], stats: Optional[SearchStats] = None) -> bool:
    """True iff only the identity fixes every member."""
    fixed = _check_members(tournament, members)
    constraints = SearchConstraints(fixed_pointwise=fixed, exclude_identity=True)
    return find_automorphism(tournament, constraints, stats=stats) is None


def is_distinguishing_class(
    tournament: Tournament, members: Sequence[int], stats: Optional[SearchStats] = None
) -> bool:
    black = _check_members(tournament, members)
    return bool(is_distinguishing_vertex(tournament, VertexLabeling.from_black(tournament.n, black), stats=stats))


def distinguishing_classes(tournament: Tournament, size: int) -> List[Tuple[int, ...]]:
    """Every distinguishing class of the given size, in lexicographic order."""
    if not 0 <= size <= tournament.n:
        raise TournamentError(f"class size {size} outside 0..{tournament.n}")
    stats = SearchStats()
    return [combo for combo in itertools.combinations(range(tournament.n), size)
            if is_distinguishing_class(tournament, combo, stats)]


# ---------------------------------------------------------------- orbit pruning


def _lexicographically_minimal(actions: np.ndarray, combo: Tuple[int, ...]) -> bool:
    """True iff no group image of combo sorts below it. actions[g, i] is the image of point i under g."""
    if not combo:
        return True
    images = np.sort(actions[:, list(combo)], axis=1)
    diff = images - np.asarray(combo)
    nonzero = diff != 0
    first = nonzero.argmax(axis=1)
    leading = diff[np.arange(len(diff)), first]
    return not bool(np.any(nonzero.any(axis=1) & (leading < 0)))


def _vertex_actions(tournament: Tournament, budget: SearchBudget, stats: SearchStatistics) -> Optional[np.ndarray]:
    if not budget.orbit_pruning or tournament.n > get_settings().enumeration_guard:
        return None
    group = enumerate_automorphisms(tournament)
    stats.group_order = len(group)
    if len(group) == 1:
        return None
    return np.array([g.image for g in group], dtype=np.int64)


def _arc_actions(vertex_actions: np.ndarray, arcs: Sequence[Arc], n: int) -> np.ndarray:
    index = np.full((n, n), -1, dtype=np.int64)
    tails = np.array([u for u, _ in arcs], dtype=np.int64)
    heads = np.array([v for _, v in arcs], dtype=np.int64)
    index[tails, heads] = np.arange(len(arcs))
    return index[vertex_actions[:, tails], vertex_actions[:, heads]]


# ---------------------------------------------------------------- driver


class _Exhausted(Exception):
    def __init__(self, lower_bound: int, reason: str):
        super().__init__(reason)
        self.lower_bound = lower_bound
        self.reason = reason


def _minimum_subset(
    quantity: str,
    universe_size: int,
    test: Callable[[Tuple[int, ...]], bool],
    budget: SearchBudget,
    stats: SearchStatistics,
    actions: Optional[np.ndarray] = None,
    keep: Optional[Callable[[Tuple[int, ...]], bool]] = None,
) -> Tuple[int, Tuple[int, ...]]:
    """Least (size, combo) over index subsets of range(universe_size) passing test."""
    top = universe_size if budget.max_subset_size is None else min(universe_size, budget.max_subset_size)
    started = time.perf_counter()
    try:
        for size in range(top + 1):
            tested = 0
            for combo in itertools.combinations(range(universe_size), size):
                if keep is not None and not keep(combo):
                    stats.skipped_by_filter += 1
                    continue
                if actions is not None and not _lexicographically_minimal(actions, combo):
                    stats.skipped_by_orbit += 1
                    continue
                if budget.max_candidates is not None and stats.candidates >= budget.max_candidates:
                    raise _Exhausted(size, "candidate cap")
                stats.candidates += 1
                tested += 1
                if test(combo):
                    return size, combo
            stats.failed_sizes[size] = tested
            logger.info("%s: size %d: all %d candidates failed", quantity, size, tested)
        if top == universe_size:
            raise BoundViolation(f"{quantity}: no subset of any size passed")
        raise _Exhausted(top + 1, "size cap")
    finally:
        stats.elapsed_ms = (time.perf_counter() - started) * 1000.0


def _run(
    quantity: str,
    universe: Sequence,
    test: Callable[[Tuple[int, ...]], bool],
    budget: SearchBudget,
    stats: SearchStatistics,
    actions: Optional[np.ndarray] = None,
    keep: Optional[Callable[[Tuple[int, ...]], bool]] = None,
    best_found: Callable[[], Optional[tuple]] = lambda: None,
) -> SearchResult:
    try:
        size, combo = _minimum_subset(quantity, len(universe), test, budget, stats, actions, keep)
    except _Exhausted as exc:
        if budget.on_exhaustion is ExhaustionPolicy.FAIL:
            raise BudgetExhausted(quantity, exc.lower_bound, exc.reason, stats) from None
        witness = best_found()
        logger.warning("%s: %s reached, returning best found (%s)", quantity, exc.reason,
                       "none" if witness is None else f"size {len(witness)}")
        return SearchResult(quantity, None if witness is None else len(witness), witness, False,
                            exc.lower_bound, stats)
    witness = tuple(universe[i] for i in combo)
    return SearchResult(quantity, size, witness, True, size, stats)


def det_exact(tournament: Tournament, budget: Optional[SearchBudget] = None) -> SearchResult:
    """Det(T): least determining set."""
    budget = budget or SearchBudget.from_settings()
    stats = SearchStatistics()
    actions = _vertex_actions(tournament, budget, stats)
    result = _run(
        "det",
        list(range(tournament.n)),
        lambda combo: is_determining_set(tournament, combo, stats.automorphism),
        budget,
        stats,
        actions,
        best_found=lambda: tuple(range(tournament.n - 1)),
    )
    if result.exact and not is_determining_set(tournament, result.witness):
        raise BoundViolation(f"det witness {result.witness} failed re-verification")
    return result


def rho_exact(tournament: Tournament, budget: Optional[SearchBudget] = None) -> SearchResult:
    """rho(T): least distinguishing vertex class."""
    budget = budget or SearchBudget.from_settings()
    stats = SearchStatistics()
    actions = _vertex_actions(tournament, budget, stats)
    result = _run(
        "rho",
        list(range(tournament.n)),
        lambda combo: is_distinguishing_class(tournament, combo, stats.automorphism),
        budget,
        stats,
        actions,
    )
    if result.exact and not is_distinguishing_class(tournament, result.witness):
        raise BoundViolation(f"rho witness {result.witness} failed re-verification")
    return result


def _covers_every_module(arcs: Sequence[Arc], k: int) -> Callable[[Tuple[int, ...]], bool]:
    modules = 3 ** (k - 1)

    def keep(combo: Tuple[int, ...]) -> bool:
        hit = {arcs[i][0] // 3 for i in combo} | {arcs[i][1] // 3 for i in combo}
        return len(hit) == modules

    return keep


def rho_prime_exact(
    tournament: Tournament, budget: Optional[SearchBudget] = None, module_filter: bool = False
) -> SearchResult:
    """rho'(T): least distinguishing black arc set.

    With module_filter the input must be H_k; arc sets missing a basic module
    are skipped, since rotating an untouched module preserves the labeling.
    """
    budget = budget or SearchBudget.from_settings()
    stats = SearchStatistics()
    arcs = tournament.arcs()

    keep = None
    if module_filter:
        k = hk_depth(tournament)
        if k is None:
            raise TournamentError("module-coverage filter needs an H_k input")
        if k >= 1:
            keep = _covers_every_module(arcs, k)

    vertex_actions = _vertex_actions(tournament, budget, stats)
    actions = None if vertex_actions is None else _arc_actions(vertex_actions, arcs, tournament.n)

    def test(combo: Tuple[int, ...]) -> bool:
        labeling = ArcLabeling(frozenset(arcs[i] for i in combo))
        return bool(is_distinguishing_arc(tournament, labeling, stats.automorphism))

    def best_found() -> tuple:
        path = hamiltonian_path(tournament)
        return tuple(zip(path, path[1:]))

    result = _run("rho_prime", arcs, test, budget, stats, actions, keep, best_found)
    if result.exact and not is_distinguishing_arc(tournament, ArcLabeling(frozenset(result.witness))):
        raise BoundViolation(f"rho_prime witness {result.witness} failed re-verification")
    return result


def min_distinguishing_class_within(
    tournament: Tournament, members: Sequence[int], bound: int, budget: Optional[SearchBudget] = None
) -> frozenset:
    """A least distinguishing class of T[S] of size at most bound, in T's vertex ids."""
    if not members:
        raise TournamentError("min_distinguishing_class_within needs a nonempty vertex set")
    sub, mapping = induced_subtournament(tournament, members)
    back = {new: old for old, new in mapping.items()}
    capped = (budget or SearchBudget.from_settings()).model_copy(
        update={"max_subset_size": bound, "on_exhaustion": ExhaustionPolicy.FAIL}
    )
    try:
        result = rho_exact(sub, capped)
    except BudgetExhausted as exc:
        if exc.reason == "size cap":
            raise BoundViolation(
                f"no distinguishing class of size <= {bound} in the subtournament on {sorted(mapping)}"
            ) from exc
        raise
    return frozenset(back[v] for v in result.witness)

