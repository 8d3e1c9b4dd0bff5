import math
import random

import numpy as np
import pytest

import fractalc as fc
from fractalc.errors import (
    InvalidAngle,
    RatiosExceedUnit,
    ScheduleSemanticError,
    SegmentBudgetExceeded,
)
from helpers import feasible_stage, histogram_of_lengths, random_schedule


def koch():
    return fc.schedule_from_text("K[pi/3]")


def binary_koch():
    return fc.schedule_from_text("C[1/2,1/3] K[pi/3]")


# --- builtin generators --------------------------------------------------------


def test_koch_generator_closes_with_one_third_ratio():
    gen = fc.builtin_generator("K", math.pi / 3)
    assert gen.copies == 4
    assert all(r == pytest.approx(1 / 3, rel=1e-14) for r in gen.draw_ratios)
    assert [p.angle for p in gen.pieces] == [0.0, math.pi / 3, -math.pi / 3, 0.0]
    assert gen.connected


def test_koch_pi_quarter_ratio():
    gen = fc.builtin_generator("K", math.pi / 4)
    assert gen.draw_ratios[0] == pytest.approx(1 / (2 + math.sqrt(2)), rel=1e-14)


def test_koch_scale_law_is_the_unique_closure():
    for theta in (0.4, math.pi / 4, math.pi / 3, 1.3):
        rho = fc.koch_scale(theta)
        end = rho * (2 + 2 * math.cos(theta))
        assert end == pytest.approx(1.0, rel=1e-14)


def test_quadratic_koch_generator():
    gen = fc.builtin_generator("Q", math.pi / 2)
    assert gen.copies == 5
    assert all(r == 1 / 3 for r in gen.draw_ratios)
    assert [p.angle for p in gen.pieces] == [0.0, math.pi / 2, 0.0, -math.pi / 2, 0.0]


def test_cantor_middle_thirds():
    gen = fc.builtin_generator("C", [1 / 3, 1 / 3])
    flags = [(p.draw, p.ratio) for p in gen.pieces]
    assert [f for f, _ in flags] == [True, False, True]
    assert flags[1][1] == pytest.approx(1 / 3, rel=1e-14)  # equal-gap rule
    assert not gen.connected


def test_cantor_unequal_pieces_gap():
    gen = fc.builtin_generator("C", [1 / 2, 1 / 3])
    gaps = [p.ratio for p in gen.pieces if not p.draw]
    assert gaps == [pytest.approx(1 / 6, rel=1e-12)]


def test_cantor_single_piece():
    gen = fc.builtin_generator("C", [0.4])
    assert len(gen.pieces) == 1 and gen.pieces[0].draw


def test_generator_validation():
    with pytest.raises(InvalidAngle):
        fc.builtin_generator("K", 1.6)
    with pytest.raises(InvalidAngle):
        fc.builtin_generator("K", 0.0)
    with pytest.raises(InvalidAngle):
        fc.builtin_generator("Q", 1.0)
    with pytest.raises(RatiosExceedUnit):
        fc.builtin_generator("C", [0.6, 0.6])
    with pytest.raises(ScheduleSemanticError):
        fc.builtin_generator("G", [(0.3, 0.0, False)])
    with pytest.raises(ValueError):
        fc.builtin_generator("Z", None)


def test_custom_generator_connectivity():
    # closed all-draw chain: connected, like a hand-rolled Koch
    rho = fc.koch_scale(0.9)
    pieces = [(rho, a, True) for a in (0.0, 0.9, -0.9, 0.0)]
    assert fc.builtin_generator("G", pieces).connected
    assert not fc.builtin_generator("G", [(0.3, 0.5, True), (0.3, -0.5, True)]).connected


# --- iterate ---------------------------------------------------------------------


def test_koch_stage_one():
    s = fc.iterate(koch(), 1, L0=2.5)
    assert len(s) == 4
    assert s.lengths() == pytest.approx(np.full(4, 2.5 / 3), rel=1e-14)


def test_binary_koch_stage_one():
    s = fc.iterate(binary_koch(), 1)
    assert len(s) == 8
    lengths = sorted(s.lengths())
    assert lengths[:4] == pytest.approx([1 / 9] * 4, rel=1e-12)
    assert lengths[4:] == pytest.approx([1 / 6] * 4, rel=1e-12)


def test_stage_zero_is_initiator():
    s = fc.iterate(binary_koch(), 0, L0=3.0)
    assert len(s) == 1
    assert s.coords.tolist() == [[0.0, 0.0, 3.0, 0.0]]


def test_budget_exceeded():
    with pytest.raises(SegmentBudgetExceeded) as err:
        fc.iterate(koch(), 9, budget=10_000)
    assert err.value.predicted == 4**9


def test_stage_count_law():
    rng = random.Random(61)
    for _ in range(20):
        sched = random_schedule(rng)
        k = feasible_stage(sched, 20_000, max_stage=3)
        assert len(fc.iterate(sched, k)) == sched.predicted_count(k)


def test_endpoint_preservation_connected_schedules():
    sched = fc.schedule_from_text("K[pi/4] Q[pi/2] K[pi/3]")
    for k in (1, 2):
        s = fc.iterate(sched, k, L0=2.0)
        assert (s.coords[0, 0], s.coords[0, 1]) == (0.0, 0.0)
        assert (s.coords[-1, 2], s.coords[-1, 3]) == (2.0, 0.0)


# --- census ------------------------------------------------------------------------


def test_census_against_enumeration_oracle():
    sched = binary_koch()
    census = fc.segment_census(sched, 2)
    expected_lengths = [(1 / 2) ** 2 / 9, (1 / 2) * (1 / 3) / 9, (1 / 3) ** 2 / 9]
    expected_counts = [16, 32, 16]
    assert [c for _, c in census] == expected_counts
    for (value, _), want in zip(census, expected_lengths):
        assert value == pytest.approx(want, rel=1e-12)
    # oracle: enumerate the stage-2 geometry and histogram its lengths
    measured = histogram_of_lengths(fc.iterate(sched, 2).lengths())
    assert [c for _, c in measured] == expected_counts
    for (value, _), (got, _) in zip(census, measured):
        assert got == pytest.approx(value, rel=1e-12)


def test_census_uniform_single_bucket():
    census = fc.segment_census(koch(), 5, L0=2.0)
    assert len(census) == 1
    value, count = census[0]
    assert count == 4**5
    assert value == pytest.approx(2.0 / 3**5, rel=1e-12)


def test_census_stage_zero():
    assert fc.segment_census(binary_koch(), 0, L0=1.5) == [(1.5, 1)]


def test_census_total_matches_geometry_fuzz():
    rng = random.Random(67)
    for _ in range(30):
        sched = random_schedule(rng)
        k = feasible_stage(sched, 10_000, max_stage=3)
        census = fc.segment_census(sched, k)
        segs = fc.iterate(sched, k)
        assert sum(c for _, c in census) == len(segs)
        measured = histogram_of_lengths(segs.lengths())
        assert [c for _, c in measured] == [c for _, c in census]
        for (value, _), (got, _) in zip(census, measured):
            assert got == pytest.approx(value, rel=1e-12)


# --- lengths and content --------------------------------------------------------------


def test_predicted_length_koch():
    assert fc.predicted_length(koch(), 3, L0=2.0) == pytest.approx(2.0 * (4 / 3) ** 3, rel=1e-12)


def test_length_law_binary_koch():
    sched = binary_koch()
    s = fc.iterate(sched, 1)
    assert fc.total_length(s) == pytest.approx(10 / 9, rel=1e-12)
    assert fc.total_length(s) == pytest.approx(fc.predicted_length(sched, 1), rel=1e-9)


def test_length_stage_zero():
    assert fc.predicted_length(binary_koch(), 0, L0=7.0) == 7.0


def test_content_constant_at_dimension():
    alpha = math.log(4) / math.log(3)
    values = [fc.content(koch(), k, alpha, L0=2.0) for k in range(1, 11)]
    for v in values:
        assert v == pytest.approx(2.0**alpha, rel=1e-9)


def test_content_at_beta_one_is_length():
    for k in (1, 3, 5):
        assert fc.content(koch(), k, 1.0) == pytest.approx(fc.predicted_length(koch(), k), rel=1e-12)


def test_content_constancy_at_solved_alpha():
    sched = binary_koch()
    alpha = fc.solve_moran(sched.spectrum()).alpha
    values = [fc.content(sched, k, alpha) for k in range(1, 11)]
    for v in values:
        assert v == pytest.approx(values[0], rel=1e-9)


# --- svg / csv export --------------------------------------------------------------------


def test_svg_deterministic_and_styled(tmp_path):
    s = fc.iterate(koch(), 3)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    fc.export_svg(s, a)
    fc.export_svg(s, b)
    data = a.read_bytes()
    assert data == b.read_bytes()
    text = data.decode()
    assert text.startswith("<?xml")
    assert 'stroke="black"' in text and 'fill="white"' in text
    assert 'stroke-width="1"' in text
    assert "viewBox=" in text


def test_svg_chains_follow_connectivity(tmp_path):
    path = tmp_path / "out.svg"
    fc.export_svg(fc.iterate(koch(), 2), path)
    assert path.read_text().count("<polyline") == 1
    fc.export_svg(fc.iterate(fc.schedule_from_text("C[1/3,1/3]"), 1), path)
    assert path.read_text().count("<polyline") == 2


def test_svg_respects_render_limit(tmp_path):
    s = fc.iterate(koch(), 3)
    big = fc.SegmentSet(np.tile(s.coords, (300000, 1)), stage=3, initiator_length=1.0)
    with pytest.raises(SegmentBudgetExceeded):
        fc.export_svg(big, tmp_path / "too_big.svg")


def test_csv_dump(tmp_path):
    path = tmp_path / "segments.csv"
    fc.export_csv(fc.iterate(binary_koch(), 1), path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 8
    first = lines[0].split(",")
    assert len(first) == 4
    assert first[2] == f"{1/6:.12g}"


# --- overlap detection -------------------------------------------------------------------


def seg_set(rows):
    return fc.SegmentSet(np.asarray(rows, dtype=float), stage=0, initiator_length=1.0)


def test_koch_does_not_overlap():
    assert fc.detect_overlap(fc.iterate(koch(), 4)) is False


def test_superposed_segments_overlap():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 0], [0, 0, 1, 0]])) is True


def test_shared_endpoint_is_not_overlap():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 0], [1, 0, 2, 1]])) is False


def test_collinear_touch_is_not_overlap():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 0], [1, 0, 2, 0]])) is False


def test_collinear_overlap_detected():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 0], [0.5, 0, 1.5, 0]])) is True


def test_t_junction_detected():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 0], [0.5, 0, 0.5, 1]])) is True


def test_proper_crossing_detected():
    assert fc.detect_overlap(seg_set([[0, 0, 1, 1], [0, 1, 1, 0]])) is True


def test_wide_angle_koch_flags_without_failing():
    result = fc.detect_overlap(fc.iterate(fc.schedule_from_text("K[1.4]"), 3))
    assert isinstance(result, bool)


def test_self_crossing_custom_generator_detected():
    sched = fc.schedule_from_text("G[(0.9,0,draw);(0.5,3.1,gap);(0.5,-0.05,draw)]")
    assert fc.detect_overlap(fc.iterate(sched, 1)) is True


def test_cantor_dust_never_overlaps():
    assert fc.detect_overlap(fc.iterate(fc.schedule_from_text("C[1/2,1/3]"), 4)) is False
