import io

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kintrends.core import ALPHA_O, ALPHA_SOCIAL, Location
from kintrends.estimators import city_estimates
from kintrends.io import (
    SchemaError,
    filter_min_respondents,
    ingest_respondents,
    read_crosswalk,
    read_locations,
    read_sampling_units,
    write_crosswalk,
    write_locations,
    write_respondents,
    write_sampling_units,
)

HEADER = "respondent_id,location_id,weight,day_type,c_sex,a_12,t_12,a_11,t_11,availability_bin\n"
ROWS = [
    "r1,10000,1.5,weekday,f,1,2.0,0,0,1-5",
    "r2,10000,2.0,weekend,m,0,0,1,1.5,0",
    "r3,10010,1.0,weekday,f,1,0.5,1,0.25,21+",
    "r4,10010,3.0,weekday,m,0,0,0,0,6-10",
    "r5,10020,0.5,weekend,f,1,3,0,,11-15",
]


def _csv(rows, header=HEADER, schema=None):
    text = (f"#schema={schema}\n" if schema else "") + header + "\n".join(rows) + "\n"
    return io.StringIO(text)


def test_five_row_fixture():
    res = ingest_respondents(_csv(ROWS))
    assert res.n_accepted == 5 and res.n_rejected == 0
    assert res.frame["a_12"].dtype == np.int64
    assert res.frame.loc[4, "t_11"] == 0.0
    assert res.summary == {"rows": 5, "accepted": 5, "rejected": 0, "locations": 3, "unidentified_cbsa": 0}


def test_negative_weight_rejected_with_line():
    rows = list(ROWS)
    rows[2] = rows[2].replace(",1.0,", ",-1,")
    res = ingest_respondents(_csv(rows))
    assert res.n_rejected == 1
    rej = res.rejects.iloc[0]
    assert rej["reason"] == "negative weight"
    assert rej["line"] == 4 and rej["respondent_id"] == "r3"
    # a schema line shifts the reported line number
    res = ingest_respondents(_csv(rows, schema="respondents/1"))
    assert res.rejects.iloc[0]["line"] == 5


@pytest.mark.parametrize("edit,reason", [
    (("1-5", "7-9"), "unknown availability bin"),
    (("weekday", "holiday"), "bad day type"),
    ((",1,2.0,", ",2,2.0,"), "a_12 not 0/1"),
    ((",1,2.0,", ",0,2.0,"), "duration without interaction for 12"),
    ((",1.5,", ",abc,"), "non-numeric weight"),
    ((",f,", ",,"), "missing c_sex"),
    (("r1,10000", "r1,"), "missing location"),
])
def test_row_reasons(edit, reason):
    rows = list(ROWS)
    rows[0] = rows[0].replace(*edit, 1)
    res = ingest_respondents(_csv(rows))
    assert res.rejects["reason"].tolist() == [reason]


def test_duplicate_and_unknown_location():
    rows = ROWS + ["r1,99999,1,weekday,f,0,0,0,0,0"]
    locations = {g: Location(g, 10**6) for g in ("10000", "10010", "10020")}
    res = ingest_respondents(_csv(rows), locations=locations)
    assert res.rejects["reason"].tolist() == ["unknown location; duplicate respondent_id"]


@given(st.lists(st.sampled_from(["1.0", "-1", "x", ""]), min_size=1, max_size=12),
       st.lists(st.sampled_from(["0", "1", "2"]), min_size=12, max_size=12))
def test_ingestion_is_total(weights, flags):
    rows = [f"r{i},10000,{w},weekday,f,{flags[i]},0,0,0,0" for i, w in enumerate(weights)]
    res = ingest_respondents(_csv(rows))
    assert res.n_accepted + res.n_rejected == res.n_rows == len(rows)
    assert res.rejects["line"].is_unique
    assert res.rejects["line"].between(2, len(rows) + 1).all()
    accepted = set(res.frame["respondent_id"])
    assert accepted.isdisjoint(res.rejects["respondent_id"])


def test_crosswalk_and_unidentified_cbsa(tmp_path):
    path = tmp_path / "xw.csv"
    write_crosswalk({"01001": "10000", "01003": "10000", "01005": ""}, path)
    xw = read_crosswalk(path)
    header = "respondent_id,county_fips,weight,day_type,a_12\n"
    rows = ["r1,01001,1,weekday,1", "r2,01005,1,weekday,0", "r3,02000,1,weekday,0", "r4,01003,1,weekend,0"]
    res = ingest_respondents(_csv(rows, header), crosswalk=xw)
    assert res.frame["location_id"].tolist() == ["10000", "10000"]
    assert res.rejects["reason"].tolist() == ["unidentified CBSA", "unmapped FIPS"]
    assert res.summary["unidentified_cbsa"] == 1
    with pytest.raises(SchemaError):
        ingest_respondents(_csv(rows, header))


def test_minutes_are_converted():
    res = ingest_respondents(_csv(ROWS), duration_unit="minutes")
    assert res.frame.loc[0, "t_12"] == pytest.approx(2.0 / 60)
    with pytest.raises(ValueError):
        ingest_respondents(_csv(ROWS), duration_unit="days")


def test_diary_date_gives_day_type():
    header = "respondent_id,location_id,weight,diary_date,a_12\n"
    res = ingest_respondents(_csv(["r1,1,1,2024-03-09,1", "r2,1,1,2024-03-11,0", "r3,1,1,notadate,0"], header))
    assert res.frame["day_type"].tolist() == ["weekend", "weekday"]
    assert res.rejects["reason"].tolist() == ["bad day type"]


def test_schema_errors():
    with pytest.raises(SchemaError):
        ingest_respondents(_csv(ROWS, schema="locations/1"))
    with pytest.raises(SchemaError):
        ingest_respondents(_csv(ROWS, header=HEADER.replace("weight", "wt")))
    with pytest.raises(SchemaError):
        ingest_respondents(io.StringIO("#hello\n" + HEADER + ROWS[0] + "\n"))
    with pytest.raises(SchemaError):
        ingest_respondents(_csv(["r1,1,1,weekday"], "respondent_id,location_id,weight,day_type\n"))


def test_small_tables_round_trip(tmp_path):
    locs = {"10000": Location("10000", 250_000, "Alpha"), "10010": Location("10010", 3_000_000, "Beta, City")}
    write_locations(locs, tmp_path / "l.csv")
    assert read_locations(tmp_path / "l.csv") == locs
    units = pd.DataFrame({"location_id": ["10000"], "characteristic": ["f"], "responded": [1]})
    write_sampling_units(units, tmp_path / "u.csv")
    pd.testing.assert_frame_equal(read_sampling_units(tmp_path / "u.csv"), units)
    (tmp_path / "bad.csv").write_text("location_id,characteristic,responded\n1,f,2\n")
    with pytest.raises(SchemaError):
        read_sampling_units(tmp_path / "bad.csv")
    (tmp_path / "badpop.csv").write_text("location_id,population\n1,0\n")
    with pytest.raises(SchemaError):
        read_locations(tmp_path / "badpop.csv")


def test_generated_survey_round_trip(tmp_path, small_survey, small_params):
    from kintrends.availability import fit_binned_nb

    path = tmp_path / "s.csv"
    write_respondents(small_survey, path)
    res = ingest_respondents(path, locations=small_params.locations)
    assert res.n_rejected == 0 and res.n_accepted == len(small_survey)
    fit = fit_binned_nb([0.30, 0.35, 0.15, 0.10, 0.05, 0.05])
    a = city_estimates(small_survey, small_survey, [ALPHA_O, ALPHA_SOCIAL], (1, 2), fit)
    b = city_estimates(res.frame, res.frame, [ALPHA_O, ALPHA_SOCIAL], (1, 2), fit)
    pd.testing.assert_frame_equal(a, b, check_exact=True)


def test_filter_min_respondents():
    frame = pd.DataFrame({"location_id": ["a", "a", "a", "b"]})
    assert filter_min_respondents(frame, 2)["location_id"].tolist() == ["a"] * 3
    assert len(filter_min_respondents(frame, 0)) == 4
