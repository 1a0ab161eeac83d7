import logging

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from certificate import Certificate, Verdict
from constructions import thm4_bound
from exact_search import (
    BoundViolation,
    BudgetExhausted,
    ExhaustionPolicy,
    SearchBudget,
    det_exact,
    distinguishing_classes,
    is_determining_set,
    is_distinguishing_class,
    min_distinguishing_class_within,
    rho_exact,
    rho_prime_exact,
)
from labeling import ArcLabeling, classify_hk_labeling, is_distinguishing_arc
from search_config import SearchSettings
from tournament import (
    TournamentError,
    generate_hk,
    generate_random,
    induced_subtournament,
    make_tournament,
    random_corpus,
    transitive_tournament,
)


# ---------------------------------------------------------------- predicates


def test_is_determining_set_examples(c3):
    assert is_determining_set(transitive_tournament(4), [])
    assert not is_determining_set(c3, [])
    assert is_determining_set(c3, [0])
    with pytest.raises(TournamentError):
        is_determining_set(c3, [3])


def test_is_distinguishing_class_examples(h1):
    assert is_distinguishing_class(transitive_tournament(4), [1, 3])
    assert not is_distinguishing_class(h1, [])
    assert is_distinguishing_class(h1, [0])


# ---------------------------------------------------------------- det


def test_det_exact_values(h1, h2):
    assert det_exact(transitive_tournament(6)).value == 0
    one = det_exact(h1)
    assert (one.value, one.witness, one.exact) == (1, (0,), True)
    assert one.statistics.failed_sizes == {0: 1}
    three = det_exact(h2)
    assert three.value == 3
    assert is_determining_set(h2, three.witness)


def test_det_size_cap_fails_loudly(h2):
    with pytest.raises(BudgetExhausted) as info:
        det_exact(h2, SearchBudget(max_subset_size=2))
    assert info.value.lower_bound == 3
    assert info.value.reason == "size cap"


def test_det_return_best_found(h2):
    budget = SearchBudget(max_subset_size=1, on_exhaustion=ExhaustionPolicy.RETURN_BEST)
    result = det_exact(h2, budget)
    assert not result.exact
    assert result.lower_bound == 2
    assert result.witness == tuple(range(8))
    assert is_determining_set(h2, result.witness)


def test_candidate_cap(h2):
    with pytest.raises(BudgetExhausted) as info:
        rho_exact(h2, SearchBudget(max_candidates=3, orbit_pruning=False))
    assert info.value.reason == "candidate cap"
    assert info.value.statistics.candidates == 3


def test_search_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_candidates=0)
    with pytest.raises(ValueError):
        SearchBudget(max_subset_size=-1)


def test_budget_from_settings():
    settings_ = SearchSettings(max_subset_size=3, on_exhaustion="return-best-found", orbit_pruning=False)
    budget = SearchBudget.from_settings(settings_)
    assert budget.max_subset_size == 3
    assert budget.max_candidates is None
    assert budget.on_exhaustion is ExhaustionPolicy.RETURN_BEST
    assert budget.orbit_pruning is False


# ---------------------------------------------------------------- rho


@pytest.mark.parametrize("k, expected", [(0, 0), (1, 1), (2, 4)])
def test_rho_exact_on_hk(k, expected):
    result = rho_exact(generate_hk(k))
    assert result.value == expected == 3 ** k // 2
    assert result.exact


def test_rho_witness_of_h2_is_white_labeling(h2):
    result = rho_exact(h2)
    assert result.witness == (0, 1, 3, 6)
    assert classify_hk_labeling(2, result.witness) in {"white", "black"}


def test_orbit_pruning_does_not_change_answer(h2):
    pruned = rho_exact(h2, SearchBudget(orbit_pruning=True))
    plain = rho_exact(h2, SearchBudget(orbit_pruning=False))
    assert (pruned.value, pruned.witness) == (plain.value, plain.witness)
    assert pruned.statistics.skipped_by_orbit > 0
    assert pruned.statistics.group_order == 81
    assert pruned.statistics.candidates < plain.statistics.candidates


def test_every_minimum_class_of_h2_is_white_or_black(h2):
    classes = distinguishing_classes(h2, 4)
    assert classes
    assert len(classes) <= 126
    for members in classes:
        assert classify_hk_labeling(2, members) in {"white", "black"}
    assert distinguishing_classes(h2, 3) == []


def test_distinguishing_classes_rejects_bad_size(c3):
    with pytest.raises(TournamentError):
        distinguishing_classes(c3, 4)


def test_failed_sizes_are_logged(h2, caplog):
    with caplog.at_level(logging.INFO, logger="exact_search"):
        result = rho_exact(h2)
    failed = [r.getMessage() for r in caplog.records if "candidates failed" in r.getMessage()]
    assert len(failed) == result.value
    assert failed[0] == "rho: size 0: all 1 candidates failed"
    assert sorted(result.statistics.failed_sizes) == list(range(result.value))


# ---------------------------------------------------------------- rho prime


def test_rho_prime_small_values(h1):
    assert rho_prime_exact(transitive_tournament(5)).value == 0
    result = rho_prime_exact(h1)
    assert result.value == 1
    assert result.witness == ((0, 1),)


@pytest.mark.slow
def test_rho_prime_of_h2(h2):
    for arc in h2.arcs():
        assert not is_distinguishing_arc(h2, ArcLabeling(frozenset({arc})))
    result = rho_prime_exact(h2, SearchBudget(orbit_pruning=False))
    assert result.value == 2 == -(-9 // 6)
    assert is_distinguishing_arc(h2, ArcLabeling(frozenset(result.witness)))
    assert result.statistics.failed_sizes[1] == 36


def test_rho_prime_module_filter_agrees(h2):
    filtered = rho_prime_exact(h2, module_filter=True)
    plain = rho_prime_exact(h2)
    assert filtered.value == plain.value == 2
    assert filtered.witness == plain.witness
    assert filtered.statistics.skipped_by_filter > 0


def test_module_filter_needs_hk(transitive5):
    with pytest.raises(TournamentError):
        rho_prime_exact(transitive5, module_filter=True)


def test_rho_prime_return_best_found_uses_a_path(h2):
    budget = SearchBudget(max_subset_size=1, on_exhaustion=ExhaustionPolicy.RETURN_BEST)
    result = rho_prime_exact(h2, budget)
    assert not result.exact
    assert result.value == 8
    assert is_distinguishing_arc(h2, ArcLabeling(frozenset(result.witness)))


def test_rho_return_best_found_has_no_witness(h2):
    budget = SearchBudget(max_subset_size=2, on_exhaustion=ExhaustionPolicy.RETURN_BEST)
    result = rho_exact(h2, budget)
    assert (result.value, result.witness, result.exact, result.lower_bound) == (None, None, False, 3)


# ---------------------------------------------------------------- within a subset


def test_min_distinguishing_class_within_examples(h2):
    t = transitive_tournament(6)
    assert min_distinguishing_class_within(t, [1, 3, 5], 1) == frozenset()

    c3_inside = min_distinguishing_class_within(h2, [0, 3, 6], 1)
    assert c3_inside == frozenset({0})

    four = min_distinguishing_class_within(h2, list(range(9)), 4)
    assert len(four) == 4
    assert classify_hk_labeling(2, four) in {"white", "black"}


def test_min_distinguishing_class_within_maps_ids_back(h3):
    chosen = list(range(0, 27, 3))
    found = min_distinguishing_class_within(h3, chosen, 4)
    assert found == frozenset({0, 3, 9, 18})
    sub, mapping = induced_subtournament(h3, chosen)
    assert is_distinguishing_class(sub, [mapping[v] for v in found])


def test_min_distinguishing_class_within_bound_violation(h2):
    with pytest.raises(BoundViolation):
        min_distinguishing_class_within(h2, list(range(9)), 3)
    with pytest.raises(TournamentError):
        min_distinguishing_class_within(h2, [], 1)


# ---------------------------------------------------------------- certificates


def test_certificate_round_trip_and_recheck(h2):
    cert = rho_exact(h2).to_certificate(h2)
    assert cert.verdict is Verdict.VERIFIED
    text = cert.render()
    assert text.startswith("quantity: rho\n")
    assert "witness: 0 1 3 6\n" in text
    parsed = Certificate.parse(text)
    assert parsed.witness == [0, 1, 3, 6]
    assert parsed.value == 4
    assert parsed.recheck(h2)
    assert not parsed.recheck(generate_hk(1))


def test_arc_certificate_round_trip(h1):
    cert = rho_prime_exact(h1).to_certificate(h1)
    parsed = Certificate.parse(cert.render())
    assert parsed.witness_kind == "arcs"
    assert parsed.witness == [(0, 1)]
    assert parsed.verdict is Verdict.VERIFIED
    assert parsed.recheck(h1)


def test_det_certificate_of_rigid_input():
    t = transitive_tournament(4)
    cert = det_exact(t).to_certificate(t)
    assert cert.witness == []
    assert Certificate.parse(cert.render()).recheck(t)


def test_tampered_certificate_is_rejected(c3):
    cert = det_exact(c3).to_certificate(c3)
    cert.witness = []
    assert not cert.recheck(c3)


# ---------------------------------------------------------------- corpus properties


@pytest.mark.slow
def test_upper_bounds_on_small_corpus(small_corpus):
    for n, _, t in small_corpus:
        rho = rho_exact(t)
        det = det_exact(t)
        rho_prime = rho_prime_exact(t)
        assert rho.value <= n // 2
        assert det.value <= n // 3
        assert rho_prime.value <= thm4_bound(n)
        for result in (rho, det, rho_prime):
            assert result.to_certificate(t).verdict is Verdict.VERIFIED


def test_det_bound_on_small_corpus(small_corpus):
    for n, _, t in small_corpus:
        assert det_exact(t).value <= n // 3


@pytest.mark.property_based
@given(n=st.integers(1, 7), seed=st.integers(0, 2 ** 63 - 1))
@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_complement_of_distinguishing_class_distinguishes(n, seed):
    t = generate_random(n, seed)
    everyone = set(range(n))
    for mask in range(1 << n):
        members = [v for v in range(n) if mask >> v & 1]
        rest = sorted(everyone - set(members))
        assert is_distinguishing_class(t, members) == is_distinguishing_class(t, rest)


@pytest.mark.property_based
@given(n=st.integers(1, 9), seed=st.integers(0, 2 ** 63 - 1))
@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_distinguishing_implies_determining(n, seed):
    t = generate_random(n, seed)
    witness = rho_exact(t).witness
    assert is_determining_set(t, witness)
    for members in distinguishing_classes(t, len(witness)):
        assert is_determining_set(t, members)


def test_distinguishing_implies_determining_on_hk(h2):
    for members in distinguishing_classes(h2, 4):
        assert is_determining_set(h2, members)


def test_make_tournament_corpus_member_is_searchable():
    t = make_tournament(4, [(0, 1), (1, 2), (2, 0), (3, 0), (3, 1), (3, 2)])
    assert rho_exact(t).value == 1
    assert det_exact(t).value == 1
    assert random_corpus(1, 0)[0][2].n >= 1
