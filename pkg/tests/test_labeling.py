import numpy as np
import pytest

from labeling import (
    ArcLabeling,
    Color,
    LabelingError,
    LabelingFormatError,
    VertexLabeling,
    black_labeling,
    class_to_labeling,
    classify_hk_labeling,
    is_distinguishing_arc,
    is_distinguishing_vertex,
    preserves_arc_labeling,
    restrict_labeling,
    white_labeling,
)
from symmetry import Permutation, is_automorphism
from tournament import HkIndex, TournamentError, generate_hk, transitive_tournament


# ---------------------------------------------------------------- formats


def test_vlab_round_trip_and_render():
    lab = VertexLabeling.from_black(5, [1, 4])
    assert lab.render() == "WBWWB\n"
    assert VertexLabeling.parse("WBWWB\n") == lab
    assert lab.black == frozenset({1, 4})
    assert lab.count(Color.WHITE) == 3


@pytest.mark.parametrize("text, line, column", [("WBX\n", 1, 3), ("WB\nBW\n", 2, 0)])
def test_vlab_parse_errors(text, line, column):
    with pytest.raises(LabelingFormatError) as info:
        VertexLabeling.parse(text)
    assert info.value.line == line
    assert info.value.column == column


def test_alab_render_is_sorted():
    lab = ArcLabeling(frozenset({(3, 6), (0, 1)}))
    assert lab.render() == "0 1\n3 6\n"
    assert ArcLabeling.parse("3 6\n\n0 1\n") == lab
    assert ArcLabeling.parse("") == ArcLabeling()
    assert lab.endpoints() == frozenset({0, 1, 3, 6})
    assert lab.shifted(9).black_arcs == frozenset({(9, 10), (12, 15)})


@pytest.mark.parametrize("text, line", [("0 1\n0 1\n", 2), ("0 1\n2\n", 2), ("a b\n", 1)])
def test_alab_parse_errors(text, line):
    with pytest.raises(LabelingFormatError) as info:
        ArcLabeling.parse(text)
    assert info.value.line == line


def test_labelings_checked_against_tournament(c3, fixtures_dir):
    with pytest.raises(LabelingError, match="not an arc"):
        ArcLabeling(frozenset({(1, 0)})).check(c3)
    with pytest.raises(LabelingError):
        ArcLabeling(frozenset({(0, 7)})).check(c3)
    with pytest.raises(LabelingError, match="entries"):
        is_distinguishing_vertex(c3, VertexLabeling.from_black(4, []))
    lab = VertexLabeling.parse((fixtures_dir / "h2_white.vlab").read_text())
    lab.check(generate_hk(2))


# ---------------------------------------------------------------- H_k labelings


def test_small_hk_labelings():
    assert white_labeling(0).render() == "W\n"
    assert black_labeling(0).render() == "B\n"
    assert white_labeling(1).render() == "WWB\n"
    assert black_labeling(1).render() == "BBW\n"
    assert white_labeling(2).render() == "WWBWWBBBW\n"


def test_hk_labeling_black_counts():
    # white labeling of H_k has floor(3^k / 2) black vertices, the black one the rest
    for k in range(0, 7):
        n = 3 ** k
        assert white_labeling(k).count(Color.BLACK) == n // 2
        assert black_labeling(k).count(Color.BLACK) == n - n // 2


def test_hk_labeling_depth_guard():
    with pytest.raises(TournamentError):
        white_labeling(11)
    with pytest.raises(TournamentError):
        black_labeling(-1)


def test_classify_hk_labeling_any_minority_tertian():
    assert classify_hk_labeling(2, white_labeling(2).black) == "white"
    assert classify_hk_labeling(2, black_labeling(2).black) == "black"
    # minority copy in the first tertian, first basic vertex black
    assert classify_hk_labeling(2, {0, 1, 5, 8}) == "white"
    assert classify_hk_labeling(2, {0, 1, 2, 3}) is None
    assert classify_hk_labeling(1, set()) is None


def test_restrict_and_class_to_labeling(c3):
    lab = white_labeling(2)
    assert restrict_labeling(lab, [6, 7, 8]).render() == "BBW\n"
    assert class_to_labeling(c3, [2]).render() == "WWB\n"
    with pytest.raises(TournamentError):
        class_to_labeling(c3, [3])


# ---------------------------------------------------------------- verification


def test_uniform_labeling_of_c3_is_not_distinguishing(h1):
    verdict = is_distinguishing_vertex(h1, VertexLabeling.from_black(3, []))
    assert not verdict
    assert verdict.witness.image == (1, 2, 0)


def test_rigid_tournament_needs_no_labels():
    t = transitive_tournament(6)
    assert is_distinguishing_vertex(t, VertexLabeling.from_black(6, []))
    assert is_distinguishing_arc(t, ArcLabeling())


def _assert_tertians_distinguish(k, black):
    lab = VertexLabeling.from_black(3 ** k, black)
    smaller = generate_hk(k - 1)
    for block in HkIndex(k).tertian_blocks():
        assert is_distinguishing_vertex(smaller, restrict_labeling(lab, block)), (sorted(black), list(block))


def test_distinguishing_labelings_of_h2_restrict_to_distinguishing_tertians(h2):
    found = 0
    for mask in range(1 << 9):
        black = [v for v in range(9) if mask >> v & 1]
        if is_distinguishing_vertex(h2, VertexLabeling.from_black(9, black)):
            found += 1
            _assert_tertians_distinguish(2, black)
    # every tertian non-uniform, and the three not all in one rotation class
    assert found == 6 ** 3 - 2 * 3 ** 3


@pytest.mark.slow
def test_distinguishing_labelings_of_h3_restrict_to_distinguishing_tertians(h3):
    rng = np.random.default_rng(7)
    found = 0
    for _ in range(60000):
        black = np.flatnonzero(rng.integers(0, 2, size=27)).tolist()
        if is_distinguishing_vertex(h3, VertexLabeling.from_black(27, black)):
            found += 1
            _assert_tertians_distinguish(3, black)
            if found == 500:
                break
    assert found == 500


@pytest.mark.parametrize("k", [1, 2, 3])
def test_hk_white_and_black_labelings_distinguish(k):
    t = generate_hk(k)
    assert is_distinguishing_vertex(t, white_labeling(k))
    assert is_distinguishing_vertex(t, black_labeling(k))


@pytest.mark.slow
def test_white_labeling_of_h4_distinguishes_without_enumeration():
    t = generate_hk(4)
    verdict = is_distinguishing_vertex(t, white_labeling(4))
    assert verdict.distinguishing
    assert verdict.witness is None


def test_arc_verification_reports_witness(h2, fixtures_dir):
    empty = ArcLabeling.parse((fixtures_dir / "empty.alab").read_text())
    verdict = is_distinguishing_arc(h2, empty)
    assert not verdict
    assert is_automorphism(h2, verdict.witness)
    assert not verdict.witness.is_identity()

    fig = ArcLabeling.parse((fixtures_dir / "h2_fig.alab").read_text())
    assert is_distinguishing_arc(h2, fig)


def test_preserves_arc_labeling():
    lab = ArcLabeling(frozenset({(0, 1), (3, 6)}))
    rotate_last_module = Permutation((0, 1, 2, 3, 4, 5, 7, 8, 6))
    assert not preserves_arc_labeling(lab, rotate_last_module)
    assert preserves_arc_labeling(ArcLabeling(frozenset({(0, 1)})), Permutation((0, 1, 2, 4, 5, 3, 6, 7, 8)))
