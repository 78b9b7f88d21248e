"""Panel CSV loading, sample construction with the exclusion ledger,
sector aggregation, and rank-size points."""

import pytest

from prodstat import ingest
from prodstat.errors import EmptyYear, SchemaError, TooManyBadRows
from prodstat.ingest import FilterConfig, build_samples, load_csv
from prodstat.superstat import SectorClass

HEADER = "firm_id,year,sector_code,sector_class,value_added,workers_eoy\n"


def _write(tmp_path, body, name="panel.csv"):
    path = tmp_path / name
    path.write_text(HEADER + body)
    return path


def test_load_basic(tmp_path):
    path = _write(tmp_path,
                  "A,2000,3,M,120.0,10\n"
                  "A,2001,3,M,150.0,14\n"
                  "B,2000,7,N,80.0,4\n")
    result = load_csv(path)
    assert len(result.records) == 3
    assert result.errors == ()
    assert result.exclusions == ()
    rec = result.records[0]
    assert rec.firm_id == "A"
    assert rec.sector_class is SectorClass.MANUFACTURING
    assert rec.workers_eoy == 10


def test_schema_version_rejected(tmp_path):
    path = _write(tmp_path, "")
    with pytest.raises(SchemaError):
        load_csv(path, schema_version=2)


def test_missing_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("firm_id,year,sector_code,sector_class,value_added\n")
    with pytest.raises(SchemaError, match="workers_eoy"):
        load_csv(path)


def test_reordered_header_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("year,firm_id,sector_code,sector_class,value_added,workers_eoy\n")
    with pytest.raises(SchemaError, match="out of order"):
        load_csv(path)


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        load_csv(path)


def test_zero_workers_is_exclusion_not_error(tmp_path):
    # a parseable row violating a domain rule must not count toward the
    # malformed-row fatality threshold, however small the file
    path = _write(tmp_path,
                  "A,2000,3,M,120.0,10\n"
                  "B,2000,3,M,90.0,0\n"
                  "C,2000,3,M,50.0,5\n")
    result = load_csv(path)
    assert len(result.records) == 2
    assert len(result.exclusions) == 1
    assert result.exclusions[0].reason == "zero workers"
    assert result.exclusions[0].firm_id == "B"


def test_negative_workers_and_sector_range(tmp_path):
    path = _write(tmp_path,
                  "A,2000,3,M,120.0,-2\n"
                  "B,2000,27,M,90.0,5\n"
                  "C,2000,0,N,90.0,5\n")
    result = load_csv(path)
    assert len(result.records) == 0
    reasons = sorted(e.reason for e in result.exclusions)
    assert reasons == ["negative workers", "sector_code out of range",
                       "sector_code out of range"]


def test_malformed_rows_under_threshold(tmp_path):
    good = "".join(f"F{i},2000,3,M,10.0,5\n" for i in range(199))
    path = _write(tmp_path, good + "BAD,x,y,z,q,w\n")
    result = load_csv(path)
    assert len(result.records) == 199
    assert len(result.errors) == 1
    assert result.errors[0].line_no == 201


def test_too_many_bad_rows(tmp_path):
    good = "".join(f"F{i},2000,3,M,10.0,5\n" for i in range(50))
    path = _write(tmp_path, good + "BAD,x,y,z,q,w\n")
    with pytest.raises(TooManyBadRows):
        load_csv(path)


def test_bad_class_is_malformed(tmp_path):
    good = "".join(f"F{i},2000,3,M,10.0,5\n" for i in range(199))
    path = _write(tmp_path, good + "X,2000,3,Q,10.0,5\n")
    result = load_csv(path)
    assert len(result.errors) == 1
    assert "sector_class" in result.errors[0].message


def test_build_samples_averaging(tmp_path):
    path = _write(tmp_path,
                  "A,2000,3,M,120.0,10\n"
                  "A,2001,3,M,150.0,14\n")
    build = build_samples(load_csv(path).records)
    # year 2000 lacks a prior year; 2001 uses L = (14 + 10) / 2 = 12
    assert len(build.samples) == 1
    s = build.samples[0]
    assert s.year == 2001
    assert s.c == pytest.approx(150.0 / 12.0)
    assert s.weight_workers == pytest.approx(12.0)
    assert build.counts == {"no prior-year workers": 1}


def test_build_samples_exclusion_reasons(tmp_path):
    path = _write(tmp_path,
                  "A,2000,3,M,100.0,10\n"
                  "A,2001,3,M,-5.0,10\n"       # nonpositive value added
                  "B,2000,3,M,100.0,1\n"
                  "B,2001,3,M,10.0,1\n"        # L = 1 < min_workers = 2
                  "C,2000,3,M,100.0,10\n"
                  "C,2001,3,M,1e9,10\n")       # above cap
    build = build_samples(load_csv(path).records,
                          FilterConfig(min_workers=2.0, max_productivity=1e6))
    assert build.samples == ()
    assert build.counts["nonpositive value added"] == 1
    assert build.counts["below minimum workers"] == 1
    assert build.counts["above productivity cap"] == 1
    assert build.counts["no prior-year workers"] == 3


def test_build_samples_duplicate_first_wins(tmp_path):
    path = _write(tmp_path,
                  "A,2000,3,M,100.0,10\n"
                  "A,2001,3,M,110.0,10\n"
                  "A,2001,3,M,999.0,10\n")
    build = build_samples(load_csv(path).records)
    assert len(build.samples) == 1
    assert build.samples[0].c == pytest.approx(11.0)
    assert build.counts["duplicate firm-year"] == 1


def test_count_conservation(tmp_path):
    rows = []
    for i in range(40):
        rows.append(f"F{i},2000,{i % 26 + 1},M,{50.0 + i},{5 + i}\n")
        rows.append(f"F{i},2001,{i % 26 + 1},M,{60.0 + i},{6 + i}\n")
    path = _write(tmp_path, "".join(rows))
    load = load_csv(path)
    build = build_samples(load.records)
    assert len(build.samples) + len(build.exclusions) == len(load.records)


def test_top_productivities_reported_without_cap(tmp_path):
    rows = []
    for i in range(12):
        rows.append(f"F{i},2000,1,M,{10.0 * (i + 1)},2\n")
        rows.append(f"F{i},2001,1,M,{10.0 * (i + 1)},2\n")
    path = _write(tmp_path, "".join(rows))
    build = build_samples(load_csv(path).records)
    assert len(build.top_productivities) == 10
    assert build.top_productivities[0] == max(s.c for s in build.samples)
    capped = build_samples(load_csv(path).records,
                           FilterConfig(max_productivity=1e9))
    assert capped.top_productivities == ()


def test_sector_aggregate(tmp_path):
    path = _write(tmp_path,
                  "A,2000,1,M,100.0,10\n"
                  "A,2001,1,M,120.0,10\n"      # c = 12, w = 10
                  "B,2000,1,M,100.0,30\n"
                  "B,2001,1,M,180.0,30\n"      # c = 6, w = 30
                  "C,2000,2,N,100.0,5\n"
                  "C,2001,2,N,40.0,5\n")       # c = 8, w = 5
    build = build_samples(load_csv(path).records)
    agg = ingest.sector_aggregate(build.samples, 2001)
    assert agg == [(1, pytest.approx((12 * 10 + 6 * 30) / 40)),
                   (2, pytest.approx(8.0))]
    with pytest.raises(EmptyYear):
        ingest.sector_aggregate(build.samples, 1990)


def test_ranksize_plain():
    points = ingest.ranksize([1.0, 2.0, 3.0])
    assert points == [(3.0, pytest.approx(1 / 3)),
                      (2.0, pytest.approx(2 / 3)),
                      (1.0, pytest.approx(1.0))]


def test_ranksize_weighted():
    samples = [
        ingest.ProductivitySample("A", 2000, 1, SectorClass.MANUFACTURING,
                                  c=5.0, weight_workers=1.0),
        ingest.ProductivitySample("B", 2000, 1, SectorClass.MANUFACTURING,
                                  c=2.0, weight_workers=3.0),
    ]
    points = ingest.ranksize(samples, weighted=True)
    assert points == [(5.0, pytest.approx(0.25)), (2.0, pytest.approx(1.0))]


def test_ranksize_unweighted_samples():
    samples = [
        ingest.ProductivitySample("A", 2000, 1, SectorClass.MANUFACTURING,
                                  c=5.0, weight_workers=1.0),
        ingest.ProductivitySample("B", 2000, 1, SectorClass.MANUFACTURING,
                                  c=2.0, weight_workers=3.0),
    ]
    points = ingest.ranksize(samples)
    assert points == [(5.0, pytest.approx(0.5)), (2.0, pytest.approx(1.0))]
