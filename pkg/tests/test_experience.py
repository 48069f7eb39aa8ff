import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpdesign.errors import DegenerateLeg
from fpdesign.geodesy import GeoPoint, PolarStep, forward_point
from fpdesign.experience import (
    ExperienceEntry,
    MetaAction,
    SimilarityScore,
    TraceElement,
    azimuth_bucket_for,
    build_memory,
    distance_bucket_for,
    encode_experience,
    format_trace_for_prompt,
    ordinal,
    similar_same_destination,
    similar_same_runway,
)
from fpdesign.navdata import ReferenceProcedure, load_database

DATASET = Path(__file__).parent.parent / "src" / "fpdesign" / "data" / "airports.json"

IDBOR_TRACE = (
    "(1st waypoint,dis to destination:162529.8,meta action:(0-45°,0-10km)),"
    "(2nd waypoint,dis to destination:164619.6,meta action:(0-45°,0-10km)),"
    "(3rd waypoint,dis to destination:170508.1,meta action:(45-90°,10-20km)),"
    "(4th waypoint,dis to destination:172247.2,meta action:(135-180°,20-30km)),"
    "(5th waypoint,dis to destination:144245.9,meta action:(180-225°,10-20km)),"
    "(6th waypoint,dis to destination:132674.0,meta action:(135-180°,50+km)),"
    "(7th waypoint:arrival destination!)"
)

GURET_20L_TRACE = (
    "(1st waypoint,dis to destination:153776.5,meta action:(180-225°,0-10km)),"
    "(2nd waypoint,dis to destination:156593.7,meta action:(180-225°,20-30km)),"
    "(3rd waypoint,dis to destination:172027.2,meta action:(90-135°,10-20km)),"
    "(4th waypoint,dis to destination:164116.8,meta action:(0-45°,20-30km)),"
    "(5th waypoint,dis to destination:140993.8,meta action:(0-45°,30-50km)),"
    "(6th waypoint,dis to destination:100634.1,meta action:(45-90°,50+km)),"
    "(7th waypoint:arrival destination!)"
)


@pytest.fixture(scope="module")
def db():
    return load_database(DATASET)


class TestBucketing:
    def test_reference_step(self):
        meta = MetaAction.for_step(PolarStep(27.4, 25_700.7))
        assert meta.azimuth_bucket == (0.0, 45.0)
        assert meta.distance_bucket_km == (20.0, 30.0)
        assert meta.label() == "(0-45°,20-30km)"

    def test_wraparound_boundary(self):
        meta = MetaAction.for_step(PolarStep(359.9, 9_999.0))
        assert meta.azimuth_bucket == (315.0, 360.0)
        assert meta.distance_bucket_km == (0.0, 10.0)

    @pytest.mark.parametrize("bearing,expected", [
        (0.0, (0.0, 45.0)),
        (45.0, (45.0, 90.0)),      # boundary goes to upper bucket
        (44.999, (0.0, 45.0)),
        (315.0, (315.0, 360.0)),
        (360.0, (0.0, 45.0)),
    ])
    def test_azimuth_boundaries(self, bearing, expected):
        assert azimuth_bucket_for(bearing) == expected

    @pytest.mark.parametrize("meters,expected", [
        (1.0, (0.0, 10.0)),
        (10_000.0, (10.0, 20.0)),  # boundary goes to upper bucket
        (50_000.0, (50.0, math.inf)),
        (49_999.9, (30.0, 50.0)),
        (500_000.0, (50.0, math.inf)),
    ])
    def test_distance_boundaries(self, meters, expected):
        assert distance_bucket_for(meters) == expected

    @settings(max_examples=300, deadline=None)
    @given(bearing=st.floats(0.0, 359.999), meters=st.floats(0.1, 1_000_000.0))
    def test_total_and_unique(self, bearing, meters):
        az = azimuth_bucket_for(bearing)
        dist = distance_bucket_for(meters)
        assert az[0] <= bearing % 360.0 < az[1]
        assert dist[0] <= meters / 1000.0 and (math.isinf(dist[1]) or meters / 1000.0 < dist[1])

    def test_meta_action_exclusivity(self):
        with pytest.raises(ValueError):
            MetaAction((0.0, 45.0), (0.0, 10.0), arrival=True)
        with pytest.raises(ValueError):
            MetaAction(None, None, arrival=False)


class TestEncode:
    def test_trace_length_is_steps_plus_arrival(self, db):
        proc = db.airport("ZUUU").procedures["LUVEN-9W"]
        entry = encode_experience(proc, db)
        assert len(entry.trace) == len(proc.waypoints) + 1
        assert entry.trace[-1].action.arrival
        assert entry.trace[-1].dist_to_destination == pytest.approx(0.0, abs=1.0)

    def test_indices_sequential(self, db):
        entry = encode_experience(db.airport("ZUUU").procedures["GURET-9W"], db)
        assert [el.index for el in entry.trace] == list(range(1, len(entry.trace) + 1))

    def test_degenerate_leg(self, db):
        proc = ReferenceProcedure(
            "DUP-1", "02L", "GURET",
            (GeoPoint(30.62, 103.97), GeoPoint(30.62, 103.97),
             db.airport("ZUUU").fixes["GURET"].position))
        with pytest.raises(DegenerateLeg):
            encode_experience(proc, db, icao="ZUUU")

    def test_bundled_idbor_trace_matches_frozen_string(self, db):
        entry = encode_experience(db.airport("ZUUU").procedures["IDBOR-9Z"], db)
        assert format_trace_for_prompt(entry) == IDBOR_TRACE

    def test_bundled_guret_20l_trace_matches_frozen_string(self, db):
        entry = encode_experience(db.airport("ZUUU").procedures["GURET-2X"], db)
        assert format_trace_for_prompt(entry) == GURET_20L_TRACE


class TestSimilarity:
    def _entry(self, runway, destination, heading, terminal):
        return ExperienceEntry(
            destination=destination, runway=runway, runway_heading=heading,
            terminal_point=terminal,
            trace=(TraceElement(1, 0.0, MetaAction.arrival_marker()),))

    def test_same_runway_nearest_terminal_wins(self):
        target = GeoPoint(30.0, 104.0)
        near = self._entry("02L", "AAA", 21.8, forward_point(target, PolarStep(90.0, 10_000.0)))
        far = self._entry("02L", "BBB", 21.8, forward_point(target, PolarStep(90.0, 20_000.0)))
        entry, score = similar_same_runway([far, near], "02L", target)
        assert entry is near
        assert score.value == pytest.approx(1e-4, rel=1e-6)

    def test_same_runway_none(self):
        target = GeoPoint(30.0, 104.0)
        other = self._entry("20R", "AAA", 201.8, target)
        assert similar_same_runway([other], "02L", target) is None

    def test_same_runway_zero_distance_clamped(self):
        target = GeoPoint(30.0, 104.0)
        exact = self._entry("02L", "AAA", 21.8, target)
        rival = self._entry("02L", "BBB", 21.8, forward_point(target, PolarStep(0.0, 5_000.0)))
        entry, score = similar_same_runway([rival, exact], "02L", target)
        assert entry is exact
        assert score.value == pytest.approx(1.0)

    def test_same_destination_smaller_angle_wins(self):
        t = GeoPoint(30.0, 104.0)
        cand_180 = self._entry("20R", "GURET", 201.8, t)
        cand_90 = self._entry("12", "GURET", 111.8, t)
        entry, score = similar_same_destination([cand_180, cand_90], "GURET", 21.8)
        assert entry is cand_90
        assert score.value == pytest.approx(1.0 / 90.0)

    def test_same_destination_none(self):
        t = GeoPoint(30.0, 104.0)
        assert similar_same_destination([self._entry("02L", "OTHER", 21.8, t)], "GURET", 21.8) is None

    def test_same_destination_zero_angle_clamped(self):
        t = GeoPoint(30.0, 104.0)
        same = self._entry("02R", "GURET", 21.8, t)
        entry, score = similar_same_destination([same], "GURET", 21.8)
        assert entry is same
        assert score.value == pytest.approx(10.0)

    def test_first_entry_wins_ties(self):
        t = GeoPoint(30.0, 104.0)
        a = self._entry("02L", "AAA", 21.8, t)
        b = self._entry("02L", "BBB", 21.8, t)
        entry, _ = similar_same_runway([a, b], "02L", t)
        assert entry is a

    @settings(max_examples=100, deadline=None)
    @given(distances=st.lists(st.floats(100.0, 300_000.0), min_size=1, max_size=8))
    def test_returned_entry_maximizes_score(self, distances):
        target = GeoPoint(30.0, 104.0)
        memory = [
            self._entry("02L", f"FIX{i}", 21.8, forward_point(target, PolarStep(45.0, d)))
            for i, d in enumerate(distances)
        ]
        entry, score = similar_same_runway(memory, "02L", target)
        assert score.value == pytest.approx(1.0 / max(min(distances), 1.0), rel=1e-4)

    def test_build_memory_excludes_design_pair(self, db):
        full = build_memory(db, "ZUUU")
        held_out = build_memory(db, "ZUUU", exclude=("02L", "GURET"))
        assert len(full) == len(db.airport("ZUUU").procedures)
        assert len(held_out) == len(full) - 1
        assert all(not (e.runway == "02L" and e.destination == "GURET") for e in held_out)


class TestFormatting:
    def test_arrival_only(self):
        entry = ExperienceEntry(
            destination="GURET", runway="02L", runway_heading=21.8,
            terminal_point=GeoPoint(30.0, 104.0),
            trace=(TraceElement(1, 0.0, MetaAction.arrival_marker()),))
        assert format_trace_for_prompt(entry) == "(1st waypoint:arrival destination!)"

    def test_ordinals(self):
        assert [ordinal(n) for n in (1, 2, 3, 4, 11, 12, 13, 21, 22, 23, 101)] == [
            "1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd", "23rd", "101st"]

    def test_distances_have_one_decimal(self):
        entry = ExperienceEntry(
            destination="X", runway="02L", runway_heading=21.8,
            terminal_point=GeoPoint(30.0, 104.0),
            trace=(
                TraceElement(1, 162529.84, MetaAction((0.0, 45.0), (0.0, 10.0))),
                TraceElement(2, 0.0, MetaAction.arrival_marker()),
            ))
        assert "dis to destination:162529.8," in format_trace_for_prompt(entry)

    def test_similarity_score_positive(self):
        with pytest.raises(ValueError):
            SimilarityScore(0.0)
        with pytest.raises(ValueError):
            SimilarityScore(float("inf"))
