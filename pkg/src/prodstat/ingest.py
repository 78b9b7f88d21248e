"""Panel ingestion: firm-year records in, productivity samples out.

Input is a UTF-8 CSV with header
firm_id,year,sector_code,sector_class,value_added,workers_eoy
(sector_class is M or N, sector_code 1..26).  Productivity is
c = Y / L where L averages the year's and the prior year's workforce,
so a firm's first panel year never yields a sample.  Every record that
does not become a sample lands in an exclusion ledger with a reason;
nothing is dropped silently, and |records| = |samples| + |exclusions|
on every build.

Two kinds of problems are kept apart on load: rows the parser cannot
read (wrong field count, non-numeric tokens, unknown sector class) are
errors and become fatal past 1% of data rows; rows that parse but
violate a domain rule (zero workers, sector code out of range) are
reported as load-stage exclusions and never fatal.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyYear, SchemaError, TooManyBadRows
from .superstat import SectorClass

SCHEMA_V1 = ("firm_id", "year", "sector_code", "sector_class",
             "value_added", "workers_eoy")
_BAD_ROW_FRACTION = 0.01
_N_SECTORS = 26

# exclusion reason codes
R_ZERO_WORKERS = "zero workers"
R_NEGATIVE_WORKERS = "negative workers"
R_SECTOR_RANGE = "sector_code out of range"
R_NONPOSITIVE = "nonpositive value added"
R_NO_PRIOR = "no prior-year workers"
R_MIN_WORKERS = "below minimum workers"
R_CAP = "above productivity cap"
R_DUPLICATE = "duplicate firm-year"

_CLASS_BY_CODE = {"M": SectorClass.MANUFACTURING,
                  "N": SectorClass.NONMANUFACTURING}


@dataclass(frozen=True)
class FirmRecord:
    firm_id: str
    year: int
    sector_code: int
    sector_class: SectorClass
    value_added: float          # may be negative in raw data
    workers_eoy: int


@dataclass(frozen=True)
class ProductivitySample:
    firm_id: str
    year: int
    sector_code: int
    sector_class: SectorClass
    c: float                    # value added per averaged worker
    weight_workers: float       # the averaged workforce, used as fit weight


@dataclass(frozen=True)
class FilterConfig:
    min_workers: float = 1.0
    max_productivity: float | None = None


@dataclass(frozen=True)
class RowError:
    line_no: int
    message: str


@dataclass(frozen=True)
class Exclusion:
    firm_id: str
    year: int
    reason: str


@dataclass(frozen=True)
class LoadResult:
    records: tuple[FirmRecord, ...]
    errors: tuple[RowError, ...]          # malformed rows (1% fatality rule)
    exclusions: tuple[Exclusion, ...]     # parseable rows violating domain rules


@dataclass(frozen=True)
class BuildResult:
    samples: tuple[ProductivitySample, ...]
    exclusions: tuple[Exclusion, ...]
    counts: dict = field(default_factory=dict)    # reason -> count
    top_productivities: tuple[float, ...] = ()    # warn list when no cap set


def load_csv(path, schema_version: int = 1) -> LoadResult:
    """Parse the panel CSV.  Raises SchemaError on a wrong header or
    unsupported schema_version, TooManyBadRows past the 1% threshold."""
    if schema_version != 1:
        raise SchemaError(f"unsupported schema_version {schema_version!r}")
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise SchemaError("empty file: missing header") from None
        if header != SCHEMA_V1:
            missing = [col for col in SCHEMA_V1 if col not in header]
            extra = [col for col in header if col not in SCHEMA_V1]
            parts = []
            if missing:
                parts.append(f"missing columns: {', '.join(missing)}")
            if extra:
                parts.append(f"unexpected columns: {', '.join(extra)}")
            if not parts:
                parts.append("columns out of order")
            raise SchemaError("header mismatch; " + "; ".join(parts))

        records: list[FirmRecord] = []
        errors: list[RowError] = []
        exclusions: list[Exclusion] = []
        n_rows = 0
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            n_rows += 1
            problem = _parse_row(row, records, exclusions)
            if problem is not None:
                errors.append(RowError(line_no, problem))
    if errors and len(errors) > _BAD_ROW_FRACTION * n_rows:
        raise TooManyBadRows(
            f"{len(errors)} malformed rows out of {n_rows} "
            f"(threshold {_BAD_ROW_FRACTION:.0%}); first: "
            f"line {errors[0].line_no}: {errors[0].message}")
    return LoadResult(records=tuple(records), errors=tuple(errors),
                      exclusions=tuple(exclusions))


def _parse_row(row, records, exclusions) -> str | None:
    """Append to records or exclusions; return a message if malformed."""
    if len(row) != len(SCHEMA_V1):
        return f"expected {len(SCHEMA_V1)} fields, got {len(row)}"
    firm_id, year_s, code_s, class_s, value_s, workers_s = (x.strip() for x in row)
    if not firm_id:
        return "empty firm_id"
    try:
        year = int(year_s)
        code = int(code_s)
        workers = int(workers_s)
    except ValueError:
        return "non-integer year, sector_code, or workers_eoy"
    try:
        value = float(value_s)
    except ValueError:
        return f"bad value_added {value_s!r}"
    if value != value:
        return "value_added is NaN"
    sclass = _CLASS_BY_CODE.get(class_s)
    if sclass is None:
        return f"unknown sector_class {class_s!r} (want M or N)"
    if workers == 0:
        exclusions.append(Exclusion(firm_id, year, R_ZERO_WORKERS))
        return None
    if workers < 0:
        exclusions.append(Exclusion(firm_id, year, R_NEGATIVE_WORKERS))
        return None
    if not 1 <= code <= _N_SECTORS:
        exclusions.append(Exclusion(firm_id, year, R_SECTOR_RANGE))
        return None
    records.append(FirmRecord(firm_id=firm_id, year=year, sector_code=code,
                              sector_class=sclass, value_added=value,
                              workers_eoy=workers))
    return None


def build_samples(records, filters: FilterConfig = FilterConfig()) -> BuildResult:
    """Compute c = Y / mean(L_y, L_{y-1}) per record and apply filters.

    Every input record becomes exactly one sample or one ledgered
    exclusion.  With no max_productivity cap, the ten largest sample
    productivities are reported for inspection instead of being cut.
    """
    by_key: dict[tuple[str, int], FirmRecord] = {}
    samples: list[ProductivitySample] = []
    exclusions: list[Exclusion] = []
    deduped: list[FirmRecord] = []
    for rec in records:
        key = (rec.firm_id, rec.year)
        if key in by_key:
            exclusions.append(Exclusion(rec.firm_id, rec.year, R_DUPLICATE))
            continue
        by_key[key] = rec
        deduped.append(rec)

    for rec in deduped:
        prior = by_key.get((rec.firm_id, rec.year - 1))
        if prior is None:
            exclusions.append(Exclusion(rec.firm_id, rec.year, R_NO_PRIOR))
            continue
        l_bar = 0.5 * (rec.workers_eoy + prior.workers_eoy)
        c = rec.value_added / l_bar
        if c <= 0.0:
            exclusions.append(Exclusion(rec.firm_id, rec.year, R_NONPOSITIVE))
            continue
        if l_bar < filters.min_workers:
            exclusions.append(Exclusion(rec.firm_id, rec.year, R_MIN_WORKERS))
            continue
        if filters.max_productivity is not None and c > filters.max_productivity:
            exclusions.append(Exclusion(rec.firm_id, rec.year, R_CAP))
            continue
        samples.append(ProductivitySample(
            firm_id=rec.firm_id, year=rec.year, sector_code=rec.sector_code,
            sector_class=rec.sector_class, c=c, weight_workers=l_bar))

    counts = dict(Counter(e.reason for e in exclusions))
    top = ()
    if filters.max_productivity is None and samples:
        top = tuple(sorted((s.c for s in samples), reverse=True)[:10])
    return BuildResult(samples=tuple(samples), exclusions=tuple(exclusions),
                       counts=counts, top_productivities=top)


def sector_aggregate(samples, year: int) -> list[tuple[int, float]]:
    """Worker-weighted mean productivity per sector for one year.

    The weighting makes each sector value equal to the sector's total
    value added per averaged worker, sum(Y) / sum(L).
    """
    num: dict[int, float] = {}
    den: dict[int, float] = {}
    for s in samples:
        if s.year != year:
            continue
        num[s.sector_code] = num.get(s.sector_code, 0.0) + s.c * s.weight_workers
        den[s.sector_code] = den.get(s.sector_code, 0.0) + s.weight_workers
    if not num:
        raise EmptyYear(f"no samples for year {year}")
    return [(code, num[code] / den[code]) for code in sorted(num)]


def ranksize(values, weighted: bool = False) -> list[tuple[float, float]]:
    """Descending (c, rank fraction) pairs ready for log-log plotting.

    Accepts ProductivitySample objects or plain numbers.  Unweighted,
    the fraction is rank/n (firm plots); weighted, it is the cumulative
    weight fraction (worker plots).
    """
    items = list(values)
    if not items:
        raise ValueError("ranksize needs at least one value")
    if isinstance(items[0], ProductivitySample):
        pairs = [(s.c, s.weight_workers if weighted else 1.0) for s in items]
    else:
        pairs = [(float(v), 1.0) for v in items]
    pairs.sort(key=lambda cw: cw[0], reverse=True)
    total = sum(w for _, w in pairs)
    out = []
    cum = 0.0
    for c, w in pairs:
        cum += w
        out.append((c, cum / total))
    return out
