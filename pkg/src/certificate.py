"""Certificate records: a computed value, its witness and the verifier's verdict, as key/value text."""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from labeling import ArcLabeling, LabelingError, VertexLabeling, is_distinguishing_arc, is_distinguishing_vertex
from symmetry import SearchConstraints, find_automorphism
from tournament import Tournament

Witness = Union[List[int], List[Tuple[int, int]]]


class Verdict(str, Enum):
    VERIFIED = "verified"
    REJECTED = "rejected"
    UNVERIFIED = "unverified"


class Certificate(BaseModel):
    quantity: str
    input_hash: str
    order: int
    value: Optional[int] = None
    exact: bool = True
    lower_bound: Optional[int] = None
    witness_kind: str = "vertices"
    witness: Optional[Witness] = None
    verdict: Verdict = Verdict.UNVERIFIED
    statistics: Dict[str, float] = Field(default_factory=dict)
    trace: Dict[str, str] = Field(default_factory=dict)

    def render(self) -> str:
        lines = [
            f"quantity: {self.quantity}",
            f"input_hash: {self.input_hash}",
            f"order: {self.order}",
            f"value: {'none' if self.value is None else self.value}",
            f"exact: {'true' if self.exact else 'false'}",
            f"lower_bound: {'none' if self.lower_bound is None else self.lower_bound}",
            f"witness_kind: {self.witness_kind}",
            f"witness: {self._render_witness()}",
            f"verdict: {self.verdict.value}",
        ]
        lines += [f"stat.{key}: {_number(value)}" for key, value in sorted(self.statistics.items())]
        lines += [f"trace.{key}: {value}" for key, value in self.trace.items()]
        return "\n".join(lines) + "\n"

    def _render_witness(self) -> str:
        if self.witness is None:
            return "none"
        if self.witness_kind == "arcs":
            return " ".join(f"{u},{v}" for u, v in self.witness)
        return " ".join(str(v) for v in self.witness)

    @classmethod
    def parse(cls, text: str) -> "Certificate":
        fields: Dict[str, str] = {}
        statistics: Dict[str, float] = {}
        trace: Dict[str, str] = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, value = line.partition(": ")
            if not sep:
                key, value = line.rstrip(":"), ""
            if key.startswith("stat."):
                statistics[key[5:]] = float(value)
            elif key.startswith("trace."):
                trace[key[6:]] = value
            else:
                fields[key] = value

        kind = fields.get("witness_kind", "vertices")
        raw_witness = fields.get("witness", "none")
        witness: Optional[Witness]
        if raw_witness == "none":
            witness = None
        elif kind == "arcs":
            witness = [tuple(int(x) for x in tok.split(",")) for tok in raw_witness.split()]  # type: ignore[misc]
        else:
            witness = [int(tok) for tok in raw_witness.split()]

        def optional_int(key: str) -> Optional[int]:
            value = fields.get(key, "none")
            return None if value == "none" else int(value)

        return cls(
            quantity=fields["quantity"],
            input_hash=fields["input_hash"],
            order=int(fields["order"]),
            value=optional_int("value"),
            exact=fields.get("exact", "true") == "true",
            lower_bound=optional_int("lower_bound"),
            witness_kind=kind,
            witness=witness,
            verdict=Verdict(fields.get("verdict", "unverified")),
            statistics=statistics,
            trace=trace,
        )

    def recheck(self, tournament: Tournament) -> bool:
        """Re-verify the witness against its tournament; False on any mismatch."""
        if tournament.digest() != self.input_hash or self.witness is None:
            return False
        if self.witness_kind == "arcs":
            arcs = ArcLabeling(frozenset(tuple(a) for a in self.witness))  # type: ignore[misc]
            try:
                arcs.check(tournament)
            except LabelingError:
                return False
            return bool(is_distinguishing_arc(tournament, arcs))
        members = [int(v) for v in self.witness]  # type: ignore[arg-type]
        if any(not 0 <= v < tournament.n for v in members):
            return False
        if self.quantity == "det":
            constraints = SearchConstraints(fixed_pointwise=frozenset(members), exclude_identity=True)
            return find_automorphism(tournament, constraints) is None
        return bool(is_distinguishing_vertex(tournament, VertexLabeling.from_black(tournament.n, members)))


def _number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.3f}"
