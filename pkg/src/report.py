"""Bound table over H_k and a seeded random corpus: exact rho, Det and rho' next to their upper bounds."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from certificate import Verdict
from constructions import thm4_bound
from exact_search import SearchBudget, det_exact, rho_exact, rho_prime_exact
from tournament import Tournament, generate_hk, generate_random, random_corpus

logger = logging.getLogger(__name__)

COLUMNS = ["n", "source", "rho", "rho_bound", "det", "det_bound", "rho_prime", "rho_prime_bound", "verified"]

# (source label, "hk" or "random", k or seed, n)
Task = Tuple[str, str, int, int]


def report_tasks(max_k: int, random_count: int, seed: int, max_n: int = 7) -> List[Task]:
    tasks: List[Task] = [(f"H_{k}", "hk", k, 3 ** k) for k in range(1, max_k + 1)]
    for n, subseed, _ in random_corpus(random_count, seed, min_n=1, max_n=max_n):
        tasks.append((f"random:{subseed}", "random", subseed, n))
    return tasks


def _tournament(task: Task) -> Tournament:
    _, kind, param, n = task
    return generate_hk(param) if kind == "hk" else generate_random(n, param)


def report_row(task: Task, budget: SearchBudget, module_filter: bool = False) -> Dict[str, Any]:
    tournament = _tournament(task)
    n = tournament.n
    results = [
        rho_exact(tournament, budget),
        det_exact(tournament, budget),
        rho_prime_exact(tournament, budget, module_filter=module_filter and task[1] == "hk"),
    ]
    rho, det, rho_prime = (r.value for r in results)
    bounds = (n // 2, n // 3, thm4_bound(n))
    verified = all(
        r.exact and r.to_certificate(tournament).verdict is Verdict.VERIFIED and r.value <= bound
        for r, bound in zip(results, bounds)
    )
    if not verified:
        logger.warning("Row %s (n=%d) failed verification", task[0], n)
    return {
        "n": n,
        "source": task[0],
        "rho": rho,
        "rho_bound": bounds[0],
        "det": det,
        "det_bound": bounds[1],
        "rho_prime": rho_prime,
        "rho_prime_bound": bounds[2],
        "verified": verified,
    }


def _row_star(args: Tuple[Task, SearchBudget, bool]) -> Dict[str, Any]:
    return report_row(*args)


def build_report(
    max_k: int = 2,
    random_count: int = 50,
    seed: int = 1,
    max_n: int = 7,
    budget: Optional[SearchBudget] = None,
    module_filter: bool = False,
    workers: int = 1,
) -> pd.DataFrame:
    """One row per tournament, in task order whatever the worker count."""
    budget = budget or SearchBudget.from_settings()
    tasks = report_tasks(max_k, random_count, seed, max_n)
    jobs = [(task, budget, module_filter) for task in tasks]
    logger.info("Building report over %d tournaments with %d worker(s)", len(tasks), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_star, jobs))
    else:
        rows = [_row_star(job) for job in jobs]
    return pd.DataFrame(rows, columns=COLUMNS)


def render_report(frame: pd.DataFrame, csv: bool = False) -> str:
    if csv:
        return frame.to_csv(index=False)
    return frame.to_string(index=False) + "\n"
