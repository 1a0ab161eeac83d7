"""
Constructive labelings with mandatory verification.

- complement_reduce: a distinguishing class of size at most n/2.
- find_determining_set_bounded: a determining set of size at most n/3.
- construct_thm4_labeling: a distinguishing arc labeling built from a
  determining set S and a distinguishing subset R of T[S], with black pairs
  over S minus R, black 2-paths over triples of R and a few extra arcs for
  the leftovers U.
- construct_hk_arc_labeling: the recursive arc labeling of H_k with
  ceil(3^(k-1)/2) black arcs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from exact_search import (
    BoundViolation,
    BudgetExhausted,
    ExhaustionPolicy,
    SearchBudget,
    det_exact,
    is_determining_set,
    is_distinguishing_class,
    min_distinguishing_class_within,
)
from labeling import ArcLabeling, LabelingError, is_distinguishing_arc
from symmetry import Permutation
from tournament import (
    Arc,
    Tournament,
    TournamentError,
    generate_hk,
    hamiltonian_path,
    hk_depth,
    induced_subtournament,
)

logger = logging.getLogger(__name__)

CASE_IDS = ("U0", "U1a", "U1b", "U2a", "U2b", "U3a", "U3b")


class ConstructionError(RuntimeError):
    """A constructed labeling failed its final verification."""

    def __init__(self, message: str, witness: Optional[Permutation] = None, trace: Optional["Thm4Trace"] = None):
        super().__init__(message)
        self.witness = witness
        self.trace = trace


def thm4_bound(n: int) -> int:
    return 7 * n // 36 + 3


def complement_reduce(tournament: Tournament, members: Iterable[int]) -> FrozenSet[int]:
    """The smaller of S and V minus S (S on a tie); both distinguish when one does."""
    chosen = frozenset(members)
    if not is_distinguishing_class(tournament, sorted(chosen)):
        raise LabelingError(f"{sorted(chosen)} is not a distinguishing class")
    rest = frozenset(range(tournament.n)) - chosen
    smaller = chosen if len(chosen) <= len(rest) else rest
    if smaller is rest and not is_distinguishing_class(tournament, sorted(rest)):
        raise BoundViolation(f"complement of distinguishing class {sorted(chosen)} does not distinguish")
    return smaller


def find_determining_set_bounded(tournament: Tournament, budget: Optional[SearchBudget] = None) -> FrozenSet[int]:
    """A determining set of size at most n // 3.

    H_k inputs take one vertex per basic module; everything else goes
    through the exact search capped at n // 3.
    """
    n = tournament.n
    if n < 1:
        raise TournamentError("find_determining_set_bounded needs n >= 1")
    k = hk_depth(tournament)
    if k is not None and k >= 1:
        chosen = frozenset(range(0, n, 3))
        if is_determining_set(tournament, sorted(chosen)):
            return chosen
        raise BoundViolation(f"module representatives of H_{k} do not determine")

    budget = budget or SearchBudget.from_settings()
    limit = n // 3
    cap = limit if budget.max_subset_size is None else min(limit, budget.max_subset_size)
    capped = budget.model_copy(update={"max_subset_size": cap, "on_exhaustion": ExhaustionPolicy.FAIL})
    try:
        result = det_exact(tournament, capped)
    except BudgetExhausted as exc:
        if exc.reason == "size cap" and cap == limit:
            raise BoundViolation(f"no determining set of size <= {limit} for n={n}") from exc
        raise
    return frozenset(result.witness)


def hamiltonian_path_labeling(tournament: Tournament, budget: Optional[SearchBudget] = None) -> ArcLabeling:
    """Black arcs along a Hamiltonian path of T[S] for a determining set S."""
    chosen = sorted(find_determining_set_bounded(tournament, budget))
    if len(chosen) >= 2:
        sub, mapping = induced_subtournament(tournament, chosen)
        back = {new: old for old, new in mapping.items()}
        path = [back[v] for v in hamiltonian_path(sub)]
        arcs = frozenset(zip(path, path[1:]))
    elif len(chosen) == 1:
        s = chosen[0]
        other = 1 if s == 0 else 0
        arcs = frozenset({tournament.arc_between(s, other)})
    else:
        arcs = frozenset()
    labeling = ArcLabeling(arcs)
    verdict = is_distinguishing_arc(tournament, labeling)
    if not verdict:
        raise ConstructionError("Hamiltonian path labeling is not distinguishing", verdict.witness)
    return labeling


# ---------------------------------------------------------------- determining-set pipeline


@dataclass
class Thm4Trace:
    determining_set: Tuple[int, ...]
    distinguishing_subset: Tuple[int, ...]
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    triples: List[Tuple[int, int, int]] = field(default_factory=list)
    leftovers: Tuple[int, ...] = ()
    extra_arcs: List[Arc] = field(default_factory=list)
    case_id: str = "U0"

    def validate(self) -> None:
        covered: List[int] = [v for p in self.pairs for v in p] + [v for t in self.triples for v in t]
        covered += list(self.leftovers)
        if sorted(covered) != sorted(self.determining_set):
            raise ValueError(f"pairs, triples and leftovers do not partition {self.determining_set}")
        rest = set(self.determining_set) - set(self.distinguishing_subset)
        from_rest = sum(1 for u in self.leftovers if u in rest)
        if len(self.leftovers) > 3 or from_rest > 1 or len(self.leftovers) - from_rest > 2:
            raise ValueError(f"leftovers {self.leftovers} exceed one from S minus R and two from R")
        if self.case_id not in CASE_IDS:
            raise ValueError(f"unknown case id {self.case_id!r}")

    def as_dict(self) -> Dict[str, str]:
        def join(groups: Iterable[Sequence[int]]) -> str:
            return " ".join(",".join(str(v) for v in g) for g in groups)

        return {
            "determining_set": " ".join(map(str, self.determining_set)),
            "distinguishing_subset": " ".join(map(str, self.distinguishing_subset)),
            "pairs": join(self.pairs),
            "triples": join(self.triples),
            "leftovers": " ".join(map(str, self.leftovers)),
            "extra_arcs": join(self.extra_arcs),
            "case_id": self.case_id,
        }


def _triple_path(tournament: Tournament, triple: Tuple[int, int, int]) -> List[int]:
    sub, mapping = induced_subtournament(tournament, triple)
    back = {new: old for old, new in mapping.items()}
    return [back[v] for v in hamiltonian_path(sub)]


def _partner(candidates: Sequence[int], black: FrozenSet[Arc], chosen: Sequence[int], n: int,
             exclude: Sequence[int]) -> int:
    """Least-id vertex of the right kind, else a black-covered vertex of S, else one outside S."""
    blocked = set(exclude)
    for pool in (
        sorted(candidates),
        sorted({v for arc in black for v in arc}),
        sorted(set(range(n)) - set(chosen)),
    ):
        for v in pool:
            if v not in blocked:
                return v
    raise BoundViolation("no vertex available to attach the leftovers to")


def construct_thm4_labeling(
    tournament: Tournament, budget: Optional[SearchBudget] = None
) -> Tuple[ArcLabeling, Thm4Trace]:
    """Distinguishing arc labeling with at most floor(7n/36) + 3 black arcs, plus its trace."""
    n = tournament.n
    if n < 2:
        raise TournamentError(f"construct_thm4_labeling needs n >= 2, got n={n}")

    chosen = tuple(sorted(find_determining_set_bounded(tournament, budget)))
    logger.debug("determining set %s", chosen)
    if not chosen:
        trace = Thm4Trace(determining_set=(), distinguishing_subset=(), case_id="U0")
        return _finish(tournament, frozenset(), trace)

    subset = tuple(sorted(min_distinguishing_class_within(tournament, chosen, len(chosen) // 2, budget)))
    logger.debug("distinguishing subset of T[S]: %s", subset)
    rest = sorted(set(chosen) - set(subset))

    black: set = set()
    pairs = [(rest[i], rest[i + 1]) for i in range(0, len(rest) - 1, 2)]
    for a, b in pairs:
        black.add(tournament.arc_between(a, b))
    pair_ends = [v for p in pairs for v in p]

    triples = [tuple(subset[i:i + 3]) for i in range(0, len(subset) - 2, 3)]
    path_ends: List[int] = []
    for triple in triples:
        path = _triple_path(tournament, triple)  # type: ignore[arg-type]
        black.update(zip(path, path[1:]))
        path_ends += [path[0], path[-1]]

    leftovers = tuple(rest[2 * len(pairs):]) + tuple(subset[3 * len(triples):])
    extra: List[Arc] = []

    def attach(kind: Sequence[int], u: int) -> None:
        partner = _partner(kind, frozenset(black), chosen, n, exclude=leftovers)
        extra.append(tournament.arc_between(partner, u))

    if not leftovers:
        case_id = "U0"
    elif len(leftovers) == 1:
        case_id = "U1a" if not subset else "U1b"
        attach(pair_ends if not subset else path_ends, leftovers[0])
    elif len(leftovers) == 2:
        u1, u2 = leftovers
        if not rest:
            case_id = "U2a"
        else:
            case_id = "U2b"
            attach(pair_ends, u1)
        extra.append(tournament.arc_between(u1, u2))
    else:
        u1, u2, u3 = leftovers
        extra += [tournament.arc_between(u1, u2), tournament.arc_between(u2, u3)]
        if not subset:
            case_id = "U3a"
        else:
            case_id = "U3b"
            attach(path_ends, u1)
    logger.info("Determining-set arc labeling for n=%d: case %s", n, case_id)

    trace = Thm4Trace(
        determining_set=chosen,
        distinguishing_subset=subset,
        pairs=pairs,
        triples=triples,  # type: ignore[arg-type]
        leftovers=leftovers,
        extra_arcs=extra,
        case_id=case_id,
    )
    return _finish(tournament, frozenset(black) | frozenset(extra), trace)


def _finish(tournament: Tournament, black: FrozenSet[Arc], trace: Thm4Trace) -> Tuple[ArcLabeling, Thm4Trace]:
    trace.validate()
    labeling = ArcLabeling(black)
    verdict = is_distinguishing_arc(tournament, labeling)
    if not verdict:
        raise ConstructionError(
            f"arc labeling for case {trace.case_id} is not distinguishing; {verdict.witness.render()} preserves it",
            verdict.witness,
            trace,
        )
    if len(labeling) > thm4_bound(tournament.n):
        raise BoundViolation(
            f"{len(labeling)} black arcs exceed floor(7n/36) + 3 = {thm4_bound(tournament.n)} for n={tournament.n}"
        )
    return labeling, trace


# ---------------------------------------------------------------- H_k arc labeling


def construct_hk_arc_labeling(k: int) -> ArcLabeling:
    """Recursive labeling of H_k: three copies of the H_{k-1} labeling, with the
    primitive arcs of tertians 2 and 3 traded for one arc from tertian 2 to 3."""
    if k < 1:
        raise TournamentError(f"H_{k} has no arcs to label (k must be >= 1)")
    labeling = _hk_arcs(k)
    tournament = generate_hk(k)
    if len(primitive_arcs(k, labeling.black_arcs)) != 1:
        raise ConstructionError(f"H_{k} labeling should keep exactly one primitive black arc")
    verdict = is_distinguishing_arc(tournament, labeling)
    if not verdict:
        raise ConstructionError(f"H_{k} arc labeling is not distinguishing", verdict.witness)
    return labeling


def _hk_arcs(k: int) -> ArcLabeling:
    if k == 1:
        return ArcLabeling(frozenset({(0, 1)}))
    inner = _hk_arcs(k - 1)
    repeated = ArcLabeling(inner.black_arcs - {(0, 1)})
    b = 3 ** (k - 1)
    black = inner.black_arcs | repeated.shifted(b).black_arcs | repeated.shifted(2 * b).black_arcs
    return ArcLabeling(black | {(b, 2 * b)})


def primitive_arcs(k: int, black_arcs: Iterable[Arc]) -> List[Arc]:
    """Black arcs inside a single basic module."""
    if k < 1:
        raise TournamentError("H_0 has no basic modules (k must be >= 1)")
    return sorted((u, v) for u, v in black_arcs if u // 3 == v // 3)


def uncovered_module_rotation(k: int, black_arcs: Iterable[Arc]) -> Optional[Permutation]:
    """Rotation of the first basic module with no black endpoint, identity elsewhere."""
    if k < 1:
        raise TournamentError("H_0 has no basic modules (k must be >= 1)")
    touched = {v // 3 for v in ArcLabeling(frozenset(black_arcs)).endpoints()}
    for m in range(3 ** (k - 1)):
        if m not in touched:
            image = list(range(3 ** k))
            image[3 * m], image[3 * m + 1], image[3 * m + 2] = 3 * m + 1, 3 * m + 2, 3 * m
            return Permutation(tuple(image))
    return None
