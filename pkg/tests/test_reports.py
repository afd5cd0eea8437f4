"""Aggregation tables: distinct counts, per-capita rates, repeat exposure, emission."""

from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from idsweep import domains, reports, thai_id
from idsweep.geo import default_registry, load_registry
from idsweep.reports import AggregateRow, AggregateTable, ExposureRecord
from idsweep.store import ExposureOccurrence


def occ(digits, sha, url, query="q1", engine="google", file_type="pdf"):
    return ExposureOccurrence(
        digits=digits, sha256=sha, url=url, query=query, engine=engine, file_type=file_type
    )


def records_of(*occs):
    recs, skipped = reports.build_records(occs)
    assert skipped == []
    return recs


REG = default_registry()

ID_A = thai_id.generate_valid_id("11001", "0000001", REG)
ID_B = thai_id.generate_valid_id("32007", "0000002", REG)
ID_C = thai_id.generate_valid_id("38001", "0000003", REG)
ID_D = thai_id.generate_valid_id("19101", "0000004", REG)


# --- percent arithmetic -------------------------------------------------------

def test_percent_goldens():
    assert reports.percent_of(48057, 324390, 2) == Decimal("14.81")
    assert reports.percent_of(6983, 4231, 2) == Decimal("165.04")
    assert reports.percent_of(5, 1263268, 4) == Decimal("0.0004")
    assert reports.percent_of(774, 1263268, 4) == Decimal("0.0613")


def test_percent_half_up_not_bankers():
    assert reports.percent_of(1, 800, 2) == Decimal("0.13")   # 0.125 rounds up
    assert reports.percent_of(1, 8000, 2) == Decimal("0.01")  # 0.0125 rounds up


def test_percent_requires_positive_whole():
    with pytest.raises(ValueError):
        reports.percent_of(1, 0, 2)


# --- record building ----------------------------------------------------------

def test_build_records_classifies_and_skips():
    occs = [
        occ(ID_A, "s1", "http://www.nfe.go.th/a.pdf"),
        occ(ID_A, "s1", "not a url"),
        occ(ID_B, "s2", "http://chpao.org/b.xls", file_type="xls"),
    ]
    recs, skipped = reports.build_records(occs)
    assert [r.domain.tld_class for r in recs] == ["go.th", "org"]
    assert len(skipped) == 1 and skipped[0][0] == "not a url"


def test_build_records_caches_per_url():
    occs = [occ(ID_A, "s1", "http://x.go.th/a.pdf"), occ(ID_B, "s2", "http://x.go.th/a.pdf")]
    recs, _ = reports.build_records(occs)
    assert recs[0].domain is recs[1].domain


# --- aggregate ------------------------------------------------------------------

def test_aggregate_file_type_hand_counted():
    # two xlsx docs share one ID; one pdf doc carries another
    recs = records_of(
        occ(ID_A, "sa", "http://a.go.th/1.xlsx", file_type="xlsx"),
        occ(ID_A, "sb", "http://b.go.th/2.xlsx", file_type="xlsx"),
        occ(ID_B, "sc", "http://c.go.th/3.pdf", file_type="pdf"),
    )
    table = reports.aggregate(recs, "file_type")
    rows = {r.key: r for r in table.rows}
    assert rows["xlsx"].files == 2 and rows["xlsx"].unique_ids == 1
    assert rows["pdf"].files == 1 and rows["pdf"].unique_ids == 1
    assert rows["xlsx"].urls == 2 and rows["xlsx"].fqdns == 2


def test_aggregate_category_digit():
    a = "3" + ID_A[1:12]
    b = "3" + ID_B[1:12]
    c = "1" + ID_C[1:12]
    recs = records_of(
        occ(a + str(thai_id.compute_checksum(a)), "s1", "http://x.go.th/1.pdf"),
        occ(b + str(thai_id.compute_checksum(b)), "s2", "http://x.go.th/2.pdf"),
        occ(c + str(thai_id.compute_checksum(c)), "s3", "http://x.go.th/3.pdf"),
    )
    table = reports.aggregate(recs, "category_digit")
    assert [(r.key, r.unique_ids) for r in table.rows] == [("3", 2), ("1", 1)]


def test_aggregate_sorts_by_ids_then_key():
    recs = records_of(
        occ(ID_A, "s1", "http://a.go.th/1.pdf", file_type="pdf"),
        occ(ID_B, "s2", "http://a.go.th/2.xls", file_type="xls"),
        occ(ID_C, "s3", "http://a.go.th/3.xls", file_type="xls"),
        occ(ID_D, "s4", "http://a.go.th/4.doc", file_type="doc"),
    )
    table = reports.aggregate(recs, "file_type")
    assert [r.key for r in table.rows] == ["xls", "doc", "pdf"]


def test_aggregate_tld_and_domain_dimensions():
    recs = records_of(
        occ(ID_A, "s1", "http://www.nfe.go.th/a.pdf"),
        occ(ID_B, "s2", "http://cdd.go.th/b.pdf"),
        occ(ID_C, "s3", "http://chpao.org/c.pdf"),
        occ(ID_D, "s4", "http://122.154.253.83/d.pdf"),
    )
    tld = reports.aggregate(recs, "tld")
    assert {r.key: r.unique_ids for r in tld.rows} == {
        "go.th": 2, "org": 1, domains.IP_CLASS: 1,
    }
    reg = reports.aggregate(recs, "registered_domain")
    # the IP literal ranks by its literal since nothing was registered
    assert {r.key for r in reg.rows} == {
        "nfe.go.th", "cdd.go.th", "chpao.org", "122.154.253.83",
    }


def test_aggregate_spreadsheets_can_lead_ids_while_pdf_leads_urls():
    ids = [thai_id.generate_valid_id("11001", f"00001{i:02d}", REG) for i in range(6)]
    occs = [
        occ(i, "s-xlsx", "http://sheet.go.th/roster.xlsx", file_type="xlsx")
        for i in ids
    ]
    occs += [
        occ(ids[0], f"s-pdf{n}", f"http://pdf{n}.go.th/doc.pdf", file_type="pdf")
        for n in range(4)
    ]
    table = reports.aggregate(records_of(*occs), "file_type")
    assert table.rows[0].key == "xlsx"          # most unique IDs
    by_key = {r.key: r for r in table.rows}
    assert by_key["pdf"].urls > by_key["xlsx"].urls  # but PDFs span more URLs


def test_aggregate_unknown_dimension():
    with pytest.raises(ValueError, match="dimension"):
        reports.aggregate([], "colour")


# --- partition law ---------------------------------------------------------------

URL_POOL = (
    "http://www.nfe.go.th/a.pdf",
    "http://school.ac.th/b.xls",
    "http://pokkrongnakhon.com/c.pdf",
    "http://chpao.org/d.xlsx",
    "http://122.154.253.83/e.pdf",
    "http://thai.ac/f.doc",
)
ID_POOL = tuple(thai_id.generate_valid_id("11001", f"100000{i}", REG) for i in range(5)) + tuple(
    thai_id.generate_valid_id("32481", f"200000{i}", REG) for i in range(3)
)


@given(
    st.lists(
        st.tuples(
            st.sampled_from(ID_POOL),
            st.sampled_from(["sa", "sb", "sc", "sd"]),
            st.sampled_from(URL_POOL),
            st.sampled_from(["pdf", "xls", "xlsx"]),
        ),
        min_size=1,
        max_size=30,
    )
)
def test_partition_law(raw):
    recs = records_of(
        *[occ(d, sha, url, file_type=ft) for d, sha, url, ft in raw]
    )
    total_ids = len({r.digits for r in recs})
    for dimension, key_of in (
        ("file_type", lambda r: r.file_type),
        ("tld", lambda r: r.domain.tld_class),
        ("category_digit", lambda r: r.digits[0]),
    ):
        table = reports.aggregate(recs, dimension)
        pair_count = len({(key_of(r), r.digits) for r in recs})
        assert sum(row.unique_ids for row in table.rows) == pair_count
        # every ID appears under at least one key, so no dimension loses IDs
        assert len({r.digits for r in recs}) == total_ids
        assert max(row.unique_ids for row in table.rows) <= total_ids


# --- geography --------------------------------------------------------------------

TINY_REGISTRY = load_registry(
    [
        "P,10,Bangkok",
        "P,20,Chon Buri",
        "D,1001,Phra Nakhon",
        "D,2007,Si Racha",
        "POP,10,81",
        "POP,1001,8",
    ],
    as_of="test",
)


def geo_records():
    # 12 distinct IDs issued by district 1001, one by 2007
    occs = [
        occ(thai_id.generate_valid_id("11001", f"00000{i:02d}", REG), f"s{i}", "http://a.go.th/x.pdf")
        for i in range(12)
    ]
    occs.append(occ(thai_id.generate_valid_id("12007", "0000099", REG), "s99", "http://b.go.th/y.pdf"))
    return records_of(*occs)


def test_geographic_counts_and_percent():
    province, district = reports.geographic_report(geo_records(), TINY_REGISTRY)
    prow = {r.key: r for r in province.rows}
    assert prow["10"].unique_ids == 12
    assert prow["10"].population == 81
    assert prow["10"].percent == Decimal("14.81")  # 12/81, half-up at 2 places
    assert prow["10"].name == "Bangkok"
    assert prow["20"].percent is None and prow["20"].population is None
    drow = {r.key: r for r in district.rows}
    assert drow["1001"].percent == Decimal("150.00")  # above 100 is legal
    assert drow["2007"].percent is None
    # provinces with no exposed IDs get no row
    assert set(prow) == {"10", "20"}


def test_geographic_sort_orders():
    province_c, _ = reports.geographic_report(geo_records(), TINY_REGISTRY, sort="count")
    assert [r.key for r in province_c.rows] == ["10", "20"]
    province_p, _ = reports.geographic_report(geo_records(), TINY_REGISTRY, sort="percent")
    # percent-less rows sink to the bottom
    assert [r.key for r in province_p.rows] == ["10", "20"]
    with pytest.raises(ValueError):
        reports.geographic_report([], TINY_REGISTRY, sort="alphabetical")


def test_geographic_unknown_area_has_no_name():
    recs = records_of(occ(thai_id.generate_valid_id("19395", "0000001", REG), "s1", "http://a.go.th/x.pdf"))
    province, district = reports.geographic_report(recs, TINY_REGISTRY)
    assert province.rows[0].key == "93" and province.rows[0].name is None
    assert district.rows[0].key == "9395" and district.rows[0].name is None


# --- repeat exposure -----------------------------------------------------------------

def test_repeat_exposure_two_ids():
    recs = records_of(
        occ(ID_A, "s1", "http://a.go.th/1.pdf"),
        occ(ID_A, "s2", "http://b.go.th/2.pdf"),
        occ(ID_A, "s3", "http://c.go.th/3.pdf"),
        occ(ID_B, "s4", "http://d.go.th/4.pdf"),
    )
    table = reports.repeat_exposure(recs)
    assert [(r.key, r.unique_ids, r.percent) for r in table.rows] == [
        ("3", 1, Decimal("50.0000")),
        ("1", 1, Decimal("50.0000")),
    ]


def test_repeat_exposure_single_document():
    recs = records_of(
        occ(ID_A, "s1", "http://a.go.th/1.pdf"),
        occ(ID_B, "s1", "http://a.go.th/1.pdf"),
    )
    table = reports.repeat_exposure(recs)
    assert [(r.key, r.unique_ids, r.percent) for r in table.rows] == [
        ("1", 2, Decimal("100.0000"))
    ]


def test_repeat_exposure_four_decimal_places():
    recs = records_of(
        occ(ID_A, "s1", "http://a.go.th/1.pdf"),
        occ(ID_A, "s2", "http://b.go.th/2.pdf"),
        occ(ID_B, "s3", "http://c.go.th/3.pdf"),
        occ(ID_C, "s4", "http://d.go.th/4.pdf"),
    )
    table = reports.repeat_exposure(recs)
    by_key = {r.key: r.percent for r in table.rows}
    assert by_key == {"2": Decimal("33.3333"), "1": Decimal("66.6667")}


# --- emission --------------------------------------------------------------------------

def test_render_markdown_repeat_golden():
    table = AggregateTable(
        dimension="source_multiplicity",
        rows=(
            AggregateRow(key="3", unique_ids=1, percent=Decimal("50.0000")),
            AggregateRow(key="1", unique_ids=1, percent=Decimal("50.0000")),
        ),
        columns=reports.REPEAT_COLUMNS,
    )
    assert reports.render_markdown(table) == (
        "| key | unique_ids | percent |\n"
        "| --- | --- | --- |\n"
        "| 3 | 1 | 50.0000 |\n"
        "| 1 | 1 | 50.0000 |\n"
    )


def test_render_csv_parses_back():
    import csv as _csv
    import io as _io

    table = reports.aggregate(
        records_of(occ(ID_A, "s1", "http://a.go.th/1.pdf")), "file_type"
    )
    rows = list(_csv.reader(_io.StringIO(reports.render_csv(table))))
    assert rows[0] == list(reports.BASE_COLUMNS)
    assert rows[1][0] == "pdf"


def test_json_round_trip():
    province, district = reports.geographic_report(geo_records(), TINY_REGISTRY)
    for table in (province, district, reports.repeat_exposure(geo_records())):
        assert reports.table_from_json(reports.table_to_json(table)) == table


def test_emit_report_deterministic(tmp_path):
    tables = {"filetype": reports.aggregate(geo_records(), "file_type")}
    first = reports.emit_report(tables, tmp_path / "a", fmt="csv")
    second = reports.emit_report(tables, tmp_path / "b", fmt="csv")
    assert [p.name for p in first] == [p.name for p in second] == ["filetype.csv"]
    assert first[0].read_bytes() == second[0].read_bytes()
    with pytest.raises(ValueError):
        reports.emit_report(tables, tmp_path / "c", fmt="xml")


# --- detail listing / redaction -----------------------------------------------------

def test_listing_redacts_by_default():
    recs = records_of(occ(ID_A, "s1", "http://a.go.th/1.pdf"))
    listing = reports.exposure_listing(recs, salt=b"pepper")
    assert listing.redacted and listing.salt_id
    shown = listing.rows[0][0]
    assert shown != ID_A and len(shown) == 64
    for fmt in (
        reports.render_listing_csv,
        reports.render_listing_markdown,
        reports.render_listing_json,
    ):
        assert ID_A not in fmt(listing)


def test_listing_unredacted_needs_explicit_flag():
    recs = records_of(occ(ID_A, "s1", "http://a.go.th/1.pdf"))
    with pytest.raises(ValueError):
        reports.exposure_listing(recs, salt=None)
    listing = reports.exposure_listing(recs, salt=None, unredacted=True)
    assert not listing.redacted
    assert listing.rows[0][0] == ID_A


def test_listing_order_is_stable():
    recs = records_of(
        occ(ID_B, "s2", "http://b.go.th/2.pdf"),
        occ(ID_A, "s1", "http://a.go.th/1.pdf"),
    )
    listing = reports.exposure_listing(recs, salt=b"pepper")
    again = reports.exposure_listing(list(reversed(recs)), salt=b"pepper")
    assert listing.rows == again.rows
