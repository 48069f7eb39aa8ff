import json
from pathlib import Path

import pytest

from fpdesign.errors import CrossReferenceError, NotFound, ParseError, SchemaError
from fpdesign.geodesy import distance_between
from fpdesign.navdata import (
    TERMINAL_COINCIDENCE_M,
    load_database,
    load_database_obj,
    lookup_fix,
    lookup_runway,
)

DATASET = Path(__file__).parent.parent / "src" / "fpdesign" / "data" / "airports.json"


@pytest.fixture(scope="module")
def db():
    return load_database(DATASET)


def _minimal_airport(**overrides):
    airport = {
        "icao": "ZZZZ",
        "runways": [{"name": "09", "lat": 10.0, "lon": 20.0, "heading_deg": 92.0, "der_elev_m": 100.0}],
        "fixes": [{"name": "ALPHA", "lat": 10.0, "lon": 21.0}],
        "obstacles": [],
        "procedures": [],
    }
    airport.update(overrides)
    return {"airports": [airport]}


class TestLoad:
    def test_bundled_two_airports(self, db):
        assert set(db.airports) == {"ZUUU", "ZUCK"}

    def test_empty_airport_list(self):
        assert load_database_obj({"airports": []}).airports == {}

    def test_deterministic(self, db):
        assert load_database(DATASET) == db

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_database(bad)

    def test_missing_field_reports_path(self):
        doc = _minimal_airport()
        del doc["airports"][0]["runways"][0]["heading_deg"]
        with pytest.raises(SchemaError) as err:
            load_database_obj(doc)
        assert "heading_deg" in str(err.value)
        assert "runways[0]" in str(err.value)

    def test_unknown_runway_reference(self):
        doc = _minimal_airport(procedures=[
            {"name": "ALPHA-1", "runway": "99X", "destination": "ALPHA",
             "waypoints": [[10.0, 21.0]]}
        ])
        with pytest.raises(CrossReferenceError) as err:
            load_database_obj(doc)
        assert "99X" in str(err.value)

    def test_unknown_fix_reference(self):
        doc = _minimal_airport(procedures=[
            {"name": "NOPE-1", "runway": "09", "destination": "NOPE",
             "waypoints": [[10.0, 21.0]]}
        ])
        with pytest.raises(CrossReferenceError):
            load_database_obj(doc)

    def test_terminal_gap_rejected(self):
        doc = _minimal_airport(procedures=[
            {"name": "ALPHA-1", "runway": "09", "destination": "ALPHA",
             "waypoints": [[10.0, 20.5], [10.02, 21.0]]}  # ends ~2.2 km from ALPHA
        ])
        with pytest.raises(CrossReferenceError) as err:
            load_database_obj(doc)
        assert "ALPHA" in str(err.value)

    def test_duplicate_names_rejected(self):
        doc = _minimal_airport(fixes=[
            {"name": "ALPHA", "lat": 10.0, "lon": 21.0},
            {"name": "alpha ", "lat": 11.0, "lon": 21.0},
        ])
        with pytest.raises(SchemaError):
            load_database_obj(doc)

    def test_bad_obstacle_elevation(self):
        doc = _minimal_airport(obstacles=[{"name": "PIT", "lat": 10.0, "lon": 20.2, "elev_m": -3.0}])
        with pytest.raises(SchemaError):
            load_database_obj(doc)

    def test_runway_name_pattern(self):
        doc = _minimal_airport(runways=[
            {"name": "XYZ", "lat": 10.0, "lon": 20.0, "heading_deg": 0.0, "der_elev_m": 1.0}
        ])
        with pytest.raises(SchemaError):
            load_database_obj(doc)

    def test_all_bundled_procedures_terminate_on_fix(self, db):
        for airport in db.airports.values():
            for proc in airport.procedures.values():
                fix = airport.fixes[proc.destination]
                gap = distance_between(proc.waypoints[-1], fix.position)
                assert gap <= TERMINAL_COINCIDENCE_M


class TestLookups:
    def test_runway_heading(self, db):
        assert lookup_runway(db, "ZUUU", "02L").heading == pytest.approx(21.8)

    def test_case_insensitive(self, db):
        assert lookup_runway(db, "zuuu", " 02l ") == lookup_runway(db, "ZUUU", "02L")
        assert lookup_fix(db, "ZUUU", "guret") == lookup_fix(db, "ZUUU", "GURET")

    def test_missing_runway(self, db):
        with pytest.raises(NotFound) as err:
            lookup_runway(db, "ZUUU", "36R")
        assert "36R" in str(err.value)

    def test_fix_roundtrip(self, db):
        fix = lookup_fix(db, "ZUUU", "GURET")
        assert lookup_fix(db, "ZUUU", fix.name).position == fix.position

    def test_missing_fix(self, db):
        with pytest.raises(NotFound):
            lookup_fix(db, "ZUUU", "XXXXX")

    def test_missing_airport(self, db):
        with pytest.raises(NotFound):
            db.airport("KLAX")


class TestDatasetAnchors:
    """Values the rest of the suite leans on."""

    def test_02l_threshold(self, db):
        rwy = lookup_runway(db, "ZUUU", "02L")
        assert rwy.threshold.lat == pytest.approx(30.593333)
        assert rwy.threshold.lon == pytest.approx(103.954167)
        assert rwy.der_elevation == pytest.approx(495.0)

    def test_schema_numbers_keep_six_decimals(self):
        raw = json.loads(DATASET.read_text("utf-8"))
        runway = raw["airports"][0]["runways"][0]
        assert runway["lat"] == 30.593333
