"""Exposure analytics: aggregation tables, per-capita rates, emission.

Every table is a fold over exposure records -- one record per
(id, document, source URL) co-occurrence -- so row counts stay consistent
across dimensions.  Percent arithmetic is decimal with round-half-up at a
fixed number of places, which keeps emission byte-deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .domains import ClassificationError, DomainInfo, PublicSuffixList, classify_url
from .geo import GeoRegistry
from .store import ExposureOccurrence
from .thai_id import pseudonymize

DIMENSIONS = ("file_type", "tld", "registered_domain", "owner_tag", "query", "category_digit")

BASE_COLUMNS = ("key", "urls", "files", "fqdns", "registered_domains", "unique_ids")
GEO_COLUMNS = ("key", "name", "unique_ids", "population", "percent")
REPEAT_COLUMNS = ("key", "unique_ids", "percent")


@dataclass(frozen=True)
class ExposureRecord:
    """One (id, document, URL) co-occurrence with its source classified."""

    digits: str
    sha256: str
    url: str
    query: str
    engine: str
    file_type: str
    domain: DomainInfo


@dataclass(frozen=True)
class AggregateRow:
    key: str
    urls: int = 0
    files: int = 0
    fqdns: int = 0
    registered_domains: int = 0
    unique_ids: int = 0
    name: Optional[str] = None
    population: Optional[int] = None
    percent: Optional[Decimal] = None


@dataclass(frozen=True)
class AggregateTable:
    dimension: str
    rows: tuple[AggregateRow, ...]
    columns: tuple[str, ...] = BASE_COLUMNS


def percent_of(part: int, whole: int, places: int) -> Decimal:
    """100*part/whole, round-half-up to ``places`` decimal places."""
    if whole <= 0:
        raise ValueError("whole must be positive")
    with localcontext() as ctx:
        ctx.prec = 50
        value = Decimal(part) * 100 / Decimal(whole)
        return value.quantize(Decimal(10) ** -places, rounding=ROUND_HALF_UP)


def build_records(
    occurrences: Iterable[ExposureOccurrence],
    psl: Optional[PublicSuffixList] = None,
    owner_tags: Optional[dict[str, str]] = None,
) -> tuple[list[ExposureRecord], list[tuple[str, str]]]:
    """Classify every occurrence's URL; unusable URLs are skipped and reported."""
    records: list[ExposureRecord] = []
    skipped: list[tuple[str, str]] = []
    cache: dict[str, DomainInfo] = {}
    for occ in occurrences:
        info = cache.get(occ.url)
        if info is None:
            try:
                info = classify_url(occ.url, psl=psl, owner_tags=owner_tags)
            except ClassificationError as exc:
                skipped.append((occ.url, str(exc)))
                continue
            cache[occ.url] = info
        records.append(
            ExposureRecord(
                digits=occ.digits, sha256=occ.sha256, url=occ.url, query=occ.query,
                engine=occ.engine, file_type=occ.file_type, domain=info,
            )
        )
    return records, skipped


def _key_fn(dimension: str) -> Callable[[ExposureRecord], str]:
    if dimension == "file_type":
        return lambda r: r.file_type
    if dimension == "tld":
        return lambda r: r.domain.tld_class
    if dimension == "registered_domain":
        # IP literals have no registered domain; they rank by their literal
        return lambda r: r.domain.registered_domain or r.domain.fqdn
    if dimension == "owner_tag":
        return lambda r: r.domain.owner_tag or "(untagged)"
    if dimension == "query":
        return lambda r: r.query
    if dimension == "category_digit":
        return lambda r: r.digits[0]
    raise ValueError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")


def _distinct_counts(records: Sequence[ExposureRecord]) -> dict[str, int]:
    return {
        "urls": len({r.url for r in records}),
        "files": len({r.sha256 for r in records}),
        "fqdns": len({r.domain.fqdn for r in records}),
        "registered_domains": len(
            {r.domain.registered_domain or r.domain.fqdn for r in records}
        ),
        "unique_ids": len({r.digits for r in records}),
    }


def aggregate(records: Sequence[ExposureRecord], dimension: str) -> AggregateTable:
    """Distinct-count table grouped by the dimension, most-exposed rows first."""
    key_of = _key_fn(dimension)
    groups: dict[str, list[ExposureRecord]] = {}
    for record in records:
        groups.setdefault(key_of(record), []).append(record)
    rows = [
        AggregateRow(key=key, **_distinct_counts(group))
        for key, group in groups.items()
    ]
    rows.sort(key=lambda r: (-r.unique_ids, r.key))
    return AggregateTable(dimension=dimension, rows=tuple(rows))


def geographic_report(
    records: Sequence[ExposureRecord],
    registry: GeoRegistry,
    sort: str = "count",
) -> tuple[AggregateTable, AggregateTable]:
    """(province, district) tables with per-capita percents where known.

    The area key comes from the ID itself (digits 2-3 province, 2-5 district),
    not from where the document was hosted.  Percent = 100 x unique IDs /
    resident count, half-up at 2 decimals; areas with no exposed IDs have no
    row.  ``sort`` is "count" or "percent".
    """
    if sort not in ("count", "percent"):
        raise ValueError("sort must be 'count' or 'percent'")

    def table(code_of: Callable[[str], str], name_of: Callable[[str], Optional[str]], dim: str) -> AggregateTable:
        groups: dict[str, list[ExposureRecord]] = {}
        for record in records:
            groups.setdefault(code_of(record.digits), []).append(record)
        rows = []
        for code, group in groups.items():
            population = registry.population.get(code)
            counts = _distinct_counts(group)
            percent = (
                percent_of(counts["unique_ids"], population, 2) if population else None
            )
            rows.append(
                AggregateRow(
                    key=code, name=name_of(code), population=population, percent=percent, **counts
                )
            )
        if sort == "count":
            rows.sort(key=lambda r: (-r.unique_ids, r.key))
        else:
            rows.sort(key=lambda r: (r.percent is None, -(r.percent or 0), r.key))
        return AggregateTable(dimension=dim, rows=tuple(rows), columns=GEO_COLUMNS)

    province = table(
        lambda d: d[1:3],
        lambda c: p.name if (p := registry.lookup_province(c)) else None,
        "province",
    )
    district = table(
        lambda d: d[1:5],
        lambda c: x.name if (x := registry.lookup_district(c)) else None,
        "district",
    )
    return province, district


def repeat_exposure(records: Sequence[ExposureRecord]) -> AggregateTable:
    """IDs grouped by how many distinct URLs carry them, highest first.

    Percent is of all unique IDs, half-up at 4 decimals.
    """
    urls_per_id: dict[str, set[str]] = {}
    for record in records:
        urls_per_id.setdefault(record.digits, set()).add(record.url)
    total_ids = len(urls_per_id)
    by_multiplicity: dict[int, list[ExposureRecord]] = {}
    ids_by_multiplicity: dict[int, int] = {}
    for urls in urls_per_id.values():
        ids_by_multiplicity[len(urls)] = ids_by_multiplicity.get(len(urls), 0) + 1
    for record in records:
        by_multiplicity.setdefault(len(urls_per_id[record.digits]), []).append(record)
    rows = []
    for multiplicity in sorted(ids_by_multiplicity, reverse=True):
        counts = _distinct_counts(by_multiplicity[multiplicity])
        counts["unique_ids"] = ids_by_multiplicity[multiplicity]
        rows.append(
            AggregateRow(
                key=str(multiplicity),
                percent=percent_of(ids_by_multiplicity[multiplicity], total_ids, 4),
                **counts,
            )
        )
    return AggregateTable(dimension="source_multiplicity", rows=tuple(rows), columns=REPEAT_COLUMNS)


# --- emission -----------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    return str(value)


def render_markdown(table: AggregateTable) -> str:
    cols = table.columns
    lines = [
        "| " + " | ".join(cols) + " |",
        "| " + " | ".join("---" for _ in cols) + " |",
    ]
    for row in table.rows:
        lines.append("| " + " | ".join(_cell(getattr(row, c)) for c in cols) + " |")
    return "\n".join(lines) + "\n"


def render_csv(table: AggregateTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(getattr(row, c)) for c in table.columns])
    return buf.getvalue()


def table_to_json(table: AggregateTable) -> str:
    payload = {
        "dimension": table.dimension,
        "columns": list(table.columns),
        "rows": [
            {
                "key": r.key, "urls": r.urls, "files": r.files, "fqdns": r.fqdns,
                "registered_domains": r.registered_domains, "unique_ids": r.unique_ids,
                "name": r.name, "population": r.population,
                "percent": None if r.percent is None else str(r.percent),
            }
            for r in table.rows
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def table_from_json(text: str) -> AggregateTable:
    data = json.loads(text)
    rows = tuple(
        AggregateRow(
            key=r["key"], urls=r["urls"], files=r["files"], fqdns=r["fqdns"],
            registered_domains=r["registered_domains"], unique_ids=r["unique_ids"],
            name=r.get("name"), population=r.get("population"),
            percent=None if r.get("percent") is None else Decimal(r["percent"]),
        )
        for r in data["rows"]
    )
    return AggregateTable(dimension=data["dimension"], rows=rows, columns=tuple(data["columns"]))


LISTING_COLUMNS = ("id", "tld_class", "registered_domain", "url", "file_type", "query")


@dataclass(frozen=True)
class ExposureListing:
    """Per-occurrence detail rows; the id column is tokens unless unredacted."""

    rows: tuple[tuple[str, ...], ...]
    redacted: bool
    salt_id: Optional[str] = None


def exposure_listing(
    records: Sequence[ExposureRecord],
    salt: Optional[bytes],
    unredacted: bool = False,
) -> ExposureListing:
    """Detail listing; IDs become keyed-hash tokens unless explicitly unredacted."""
    if not unredacted and not salt:
        raise ValueError("redacted listing needs a salt")
    rows = []
    salt_id = None
    for record in sorted(records, key=lambda r: (r.digits, r.sha256, r.url, r.query)):
        if unredacted:
            shown = record.digits
        else:
            token = pseudonymize(record.digits, salt)
            shown = token.token
            salt_id = token.salt_id
        rows.append(
            (shown, record.domain.tld_class, record.domain.registered_domain or "",
             record.url, record.file_type, record.query)
        )
    return ExposureListing(rows=tuple(rows), redacted=not unredacted, salt_id=salt_id)


def render_listing_csv(listing: ExposureListing) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LISTING_COLUMNS)
    writer.writerows(listing.rows)
    return buf.getvalue()


def render_listing_markdown(listing: ExposureListing) -> str:
    lines = [
        "| " + " | ".join(LISTING_COLUMNS) + " |",
        "| " + " | ".join("---" for _ in LISTING_COLUMNS) + " |",
    ]
    for row in listing.rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def render_listing_json(listing: ExposureListing) -> str:
    payload = {
        "redacted": listing.redacted,
        "salt_id": listing.salt_id,
        "columns": list(LISTING_COLUMNS),
        "rows": [list(r) for r in listing.rows],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def emit_report(
    tables: dict[str, AggregateTable],
    out_dir: str | Path,
    fmt: str = "markdown",
    listing: Optional[ExposureListing] = None,
) -> list[Path]:
    """Write one file per table (plus optional detail listing); deterministic bytes."""
    renderers = {
        "markdown": (render_markdown, render_listing_markdown, "md"),
        "csv": (render_csv, render_listing_csv, "csv"),
        "json": (table_to_json, render_listing_json, "json"),
    }
    if fmt not in renderers:
        raise ValueError(f"format must be one of {sorted(renderers)}")
    render_table, render_listing, ext = renderers[fmt]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for name in sorted(tables):
        path = out / f"{name}.{ext}"
        path.write_text(render_table(tables[name]), encoding="utf-8")
        written.append(path)
    if listing is not None:
        path = out / f"exposures.{ext}"
        path.write_text(render_listing(listing), encoding="utf-8")
        written.append(path)
    return written
