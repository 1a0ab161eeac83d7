"""
Command-line front end.

Exit status: 0 success, 1 a verification came out negative, 2 usage or
input errors, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from certificate import Certificate, Verdict
from constructions import ConstructionError, construct_hk_arc_labeling, construct_thm4_labeling, thm4_bound
from exact_search import (
    BoundViolation,
    BudgetExhausted,
    SearchBudget,
    SearchResult,
    det_exact,
    rho_exact,
    rho_prime_exact,
)
from labeling import ArcLabeling, LabelingError, VertexLabeling, is_distinguishing_arc, is_distinguishing_vertex
from report import build_report, render_report
from search_config import use_config
from symmetry import EnumerationGuardError, Permutation, PermutationError
from tournament import TournamentError, generate_hk, generate_random, hk_depth, read_trn, render_trn

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "out", None):
        write_atomic(Path(args.out), text)
        logger.info("Wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8", errors="replace")


def _budget(args: argparse.Namespace) -> SearchBudget:
    budget = SearchBudget.from_settings()
    update = {}
    if args.budget_size is not None:
        update["max_subset_size"] = args.budget_size
    if args.budget_candidates is not None:
        update["max_candidates"] = args.budget_candidates
    return SearchBudget(**{**budget.model_dump(), **update}) if update else budget


def _render_perm(perm: Permutation, args: argparse.Namespace) -> str:
    return perm.render(cycles=args.cycles)


# ---------------------------------------------------------------- verbs


def cmd_gen_hk(args: argparse.Namespace) -> int:
    _emit(args, render_trn(generate_hk(args.k)))
    return EXIT_OK


def cmd_gen_random(args: argparse.Namespace) -> int:
    _emit(args, render_trn(generate_random(args.n, args.seed)))
    return EXIT_OK


def _cmd_search(args: argparse.Namespace, search: Callable[..., SearchResult]) -> int:
    tournament = read_trn(args.input)
    result = search(tournament, _budget(args))
    cert = result.to_certificate(tournament)
    _emit(args, cert.render())
    return EXIT_NEGATIVE if cert.verdict is Verdict.REJECTED else EXIT_OK


def cmd_rho(args: argparse.Namespace) -> int:
    return _cmd_search(args, rho_exact)


def cmd_det(args: argparse.Namespace) -> int:
    return _cmd_search(args, det_exact)


def cmd_rho_prime(args: argparse.Namespace) -> int:
    return _cmd_search(
        args, lambda t, budget: rho_prime_exact(t, budget, module_filter=args.optimize_module_filter)
    )


def cmd_verify_vertex(args: argparse.Namespace) -> int:
    tournament = read_trn(args.input)
    labeling = VertexLabeling.parse(_read_text(args.labeling))
    verdict = is_distinguishing_vertex(tournament, labeling)
    if verdict:
        print("distinguishing")
        return EXIT_OK
    print(f"not distinguishing; preserved by {_render_perm(verdict.witness, args)}")
    return EXIT_NEGATIVE


def cmd_verify_arc(args: argparse.Namespace) -> int:
    tournament = read_trn(args.input)
    labeling = ArcLabeling.parse(_read_text(args.labeling))
    verdict = is_distinguishing_arc(tournament, labeling)
    if verdict:
        print("distinguishing")
        return EXIT_OK
    print(f"not distinguishing; preserved by {_render_perm(verdict.witness, args)}")
    return EXIT_NEGATIVE


def cmd_construct_thm4(args: argparse.Namespace) -> int:
    tournament = read_trn(args.input)
    try:
        labeling, trace = construct_thm4_labeling(tournament, _budget(args))
    except ConstructionError as exc:
        print(f"construction failed: {exc}")
        if exc.trace is not None:
            for key, value in exc.trace.as_dict().items():
                print(f"trace.{key}: {value}")
        return EXIT_NEGATIVE
    cert = Certificate(
        quantity="thm4_arc_labeling",
        input_hash=tournament.digest(),
        order=tournament.n,
        value=len(labeling),
        exact=False,
        lower_bound=None,
        witness_kind="arcs",
        witness=sorted(labeling.black_arcs),
        statistics={"bound": thm4_bound(tournament.n)},
        trace=trace.as_dict(),
    )
    cert.verdict = Verdict.VERIFIED if cert.recheck(tournament) else Verdict.REJECTED
    if args.out:
        write_atomic(Path(args.out), labeling.render())
    sys.stdout.write(cert.render())
    return EXIT_OK if cert.verdict is Verdict.VERIFIED else EXIT_NEGATIVE


def cmd_construct_hk_arcs(args: argparse.Namespace) -> int:
    k = args.k
    if args.input is not None:
        k = hk_depth(read_trn(args.input))
        if k is None:
            raise TournamentError(f"{args.input} is not an H_k tournament")
    if k is None:
        raise TournamentError("construct-hk-arcs needs an input file or --k")
    _emit(args, construct_hk_arc_labeling(k).render())
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    frame = build_report(
        max_k=args.max_k,
        random_count=args.random,
        seed=args.seed,
        max_n=args.max_n,
        budget=_budget(args),
        module_filter=args.optimize_module_filter,
        workers=args.workers,
    )
    _emit(args, render_report(frame, csv=args.csv))
    return EXIT_OK if bool(frame["verified"].all()) else EXIT_NEGATIVE


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tourney", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--config", default=None, help="JSON settings file (default config/search_defaults.json)")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--cycles", action="store_true", help="print witness permutations in cycle notation")

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget-size", type=int, default=None, help="largest subset size to examine")
    budget.add_argument("--budget-candidates", type=int, default=None, help="most subsets to examine")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", default=None, help="output path (default stdout)")

    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-hk", parents=[out], help="write H_k as .trn")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_gen_hk)

    p = sub.add_parser("gen-random", parents=[out], help="write a seeded random tournament as .trn")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_gen_random)

    for verb, func, help_text in (
        ("rho", cmd_rho, "least distinguishing vertex class"),
        ("det", cmd_det, "least determining set"),
        ("rho-prime", cmd_rho_prime, "least distinguishing arc class"),
    ):
        p = sub.add_parser(verb, parents=[budget, out], help=help_text)
        p.add_argument("input")
        if verb == "rho-prime":
            p.add_argument("--optimize-module-filter", action="store_true",
                           help="skip arc sets missing a basic module (H_k inputs only)")
        p.set_defaults(func=func)

    p = sub.add_parser("verify-vertex", help="check a .vlab labeling")
    p.add_argument("input")
    p.add_argument("labeling")
    p.set_defaults(func=cmd_verify_vertex)

    p = sub.add_parser("verify-arc", help="check a .alab labeling")
    p.add_argument("input")
    p.add_argument("labeling")
    p.set_defaults(func=cmd_verify_arc)

    p = sub.add_parser("construct-thm4", parents=[budget, out], help="arc labeling from a determining set")
    p.add_argument("input")
    p.set_defaults(func=cmd_construct_thm4)

    p = sub.add_parser("construct-hk-arcs", parents=[out], help="recursive arc labeling of H_k")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_construct_hk_arcs)

    p = sub.add_parser("report", parents=[budget, out], help="bound table over H_k and random tournaments")
    p.add_argument("--max-k", type=int, default=2)
    p.add_argument("--random", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--optimize-module-filter", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    settings = use_config(args.config)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    if getattr(args, "workers", 0) is None:
        args.workers = settings.workers

    try:
        return args.func(args)
    except BudgetExhausted as exc:
        logger.error("%s", exc)
        return EXIT_BUDGET
    except (BoundViolation, ConstructionError) as exc:
        logger.error("%s", exc)
        return EXIT_NEGATIVE
    except (TournamentError, LabelingError, PermutationError, EnumerationGuardError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
