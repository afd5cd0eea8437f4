"""Command surface: exit codes, flag/env/config precedence, goldens, redaction."""

import json
from pathlib import Path

import pytest

from idsweep import cli, thai_id
from idsweep.geo import default_registry
from idsweep.queries import plan_from_json
from idsweep.store import ResultStore

REPO = Path(__file__).resolve().parent.parent
DEMO = REPO / "data" / "demo"
SALT_FILE = Path(__file__).resolve().parent / "data" / "demo_salt.txt"
GOLDENS = Path(__file__).resolve().parent / "data" / "goldens"

REG = default_registry()


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in (
        "IDSWEEP_SEARCH_DELAY", "IDSWEEP_DOWNLOAD_TIMEOUT", "IDSWEEP_DOWNLOAD_MAX_RETRY",
        "IDSWEEP_MAX_PAGES", "IDSWEEP_DOWNLOAD_WORKERS", "IDSWEEP_MAX_OBJECT_BYTES",
        "IDSWEEP_ACCEPTED_TYPES", "IDSWEEP_SALT", "IDSWEEP_HTTP_KEY",
    ):
        monkeypatch.delenv(key, raising=False)


def run_cli(*argv):
    return cli.entry(list(argv))


def scan_args(store_dir, *extra):
    return (
        "scan", "run",
        "--plan", str(DEMO / "plan.json"),
        "--fixture", str(DEMO),
        "--store", str(store_dir),
        "--extractors", str(DEMO / "extractors.json"),
        "--search-delay", "0",
        "--download-workers", "1",
        *extra,
    )


@pytest.fixture(scope="module")
def demo_store(tmp_path_factory):
    store_dir = tmp_path_factory.mktemp("demo") / "store"
    assert run_cli(*scan_args(store_dir)) == 0
    return store_dir


# --- id validate -----------------------------------------------------------------

def test_validate_accepted_prints_area(capsys):
    digits = thai_id.generate_valid_id("11001", "2345678", REG)
    assert run_cli("id", "validate", digits) == 0
    out = capsys.readouterr().out
    assert "format   pass" in out and "checksum pass" in out and "prefix   pass" in out
    assert "Phra Nakhon / Bangkok" in out


def test_validate_accepts_grouped_and_thai_forms(capsys):
    digits = thai_id.generate_valid_id("11001", "2345678", REG)
    grouped = f"{digits[0]}-{digits[1:5]}-{digits[5:10]}-{digits[10:12]}-{digits[12]}"
    assert run_cli("id", "validate", grouped) == 0
    assert run_cli("id", "validate", digits.translate(
        str.maketrans("0123456789", thai_id.THAI_DIGITS))) == 0


def test_validate_checksum_pass_prefix_fail(capsys):
    assert run_cli("id", "validate", "1234567891011") == 1
    out = capsys.readouterr().out
    assert "checksum pass" in out and "prefix   fail" in out


def test_validate_format_fail_skips_later_stages(capsys):
    assert run_cli("id", "validate", "12345") == 1
    out = capsys.readouterr().out
    assert "format   fail" in out and "checksum skipped" in out


def test_validate_registry_error_is_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert run_cli("id", "validate", "1100123456786", "--registry", str(missing)) == 2


# --- plan build ------------------------------------------------------------------

def test_plan_build_queries_to_stdout(capsys):
    assert run_cli("plan", "build", "--queries", "site:go.th \"x\"", "--max-pages", "3") == 0
    plan = plan_from_json(capsys.readouterr().out)
    assert plan.queries == ('site:go.th "x"',) and plan.max_pages == 3


def test_plan_build_templates_and_bindings(tmp_path, capsys):
    templates = tmp_path / "t.txt"
    templates.write_text('filetype:pdf {prefix} "x"\n', "utf-8")
    bindings = tmp_path / "b.csv"
    bindings.write_text('prefix\n"1-1001-"\n"3-3501-"\n', "utf-8")
    out = tmp_path / "plan.json"
    assert run_cli(
        "plan", "build", "--templates", str(templates), "--bindings", str(bindings),
        "--out", str(out),
    ) == 0
    plan = plan_from_json(out.read_text("utf-8"))
    assert plan.queries == (
        'filetype:pdf "1-1001-" "x"',
        'filetype:pdf "3-3501-" "x"',
    )


def test_plan_build_requires_a_source(capsys):
    assert run_cli("plan", "build") == 2


# --- scan run ---------------------------------------------------------------------

def test_scan_demo_summary(tmp_path, capsys):
    store_dir = tmp_path / "store"
    assert run_cli(*scan_args(store_dir)) == 0
    out = capsys.readouterr().out
    assert "40 distinct IDs" in out and "3 queries" in out
    with ResultStore(store_dir) as store:
        assert store.unique_id_count() == 40


def test_scan_rerun_identical_and_lock_released(tmp_path, capsys):
    store_dir = tmp_path / "store"
    assert run_cli(*scan_args(store_dir)) == 0
    first = capsys.readouterr().out
    assert not (store_dir / ".lock").exists()
    assert run_cli(*scan_args(store_dir)) == 0
    assert capsys.readouterr().out == first


def test_scan_respects_existing_lock(tmp_path, capsys):
    store_dir = tmp_path / "store"
    store_dir.mkdir()
    (store_dir / ".lock").write_text("1234")
    assert run_cli(*scan_args(store_dir)) == 2
    assert "locked" in capsys.readouterr().err


def test_scan_empty_plan_is_usage_error(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text('{"queries": []}', "utf-8")
    assert run_cli(
        "scan", "run", "--plan", str(plan), "--fixture", str(DEMO),
        "--store", str(tmp_path / "s"),
    ) == 2


def test_scan_no_results_is_domain_negative(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text('{"queries": ["no such query"]}', "utf-8")
    assert run_cli(
        "scan", "run", "--plan", str(plan), "--fixture", str(DEMO),
        "--store", str(tmp_path / "s"), "--search-delay", "0",
    ) == 1


def test_scan_http_provider_refused_without_arming(tmp_path, capsys):
    assert run_cli(
        "scan", "run", "--plan", str(DEMO / "plan.json"), "--provider", "http",
        "--http-endpoint", "http://localhost:1", "--store", str(tmp_path / "s"),
    ) == 2
    assert "acknowledge" in capsys.readouterr().err


def test_flag_beats_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("IDSWEEP_ACCEPTED_TYPES", "txt")
    assert run_cli(*scan_args(tmp_path / "s", "--accepted-types",
                              "txt,csv,html,pdf,xlsx,xls")) == 0
    assert "40 distinct IDs" in capsys.readouterr().out


def test_env_beats_config_beats_default(tmp_path, monkeypatch, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"accepted_types": ["txt"]}), "utf-8")
    # config only: txt docs alone carry 7 of the 40
    assert run_cli(*scan_args(tmp_path / "a", "--config", str(config))) == 0
    assert "7 distinct IDs" in capsys.readouterr().out
    # env overrides the file
    monkeypatch.setenv("IDSWEEP_ACCEPTED_TYPES", "txt,csv,html,pdf,xlsx,xls")
    assert run_cli(*scan_args(tmp_path / "b", "--config", str(config))) == 0
    assert "40 distinct IDs" in capsys.readouterr().out


def test_env_alone_overrides_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("IDSWEEP_ACCEPTED_TYPES", "txt")
    assert run_cli(*scan_args(tmp_path / "s")) == 0
    assert "7 distinct IDs" in capsys.readouterr().out


# --- report --------------------------------------------------------------------------

def test_report_matches_goldens(demo_store, tmp_path, capsys):
    out_dir = tmp_path / "report"
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "filetype,tld,geo,repeat",
        "--format", "markdown", "--out", str(out_dir), "--salt-file", str(SALT_FILE),
    ) == 0
    produced = sorted(p.name for p in out_dir.iterdir())
    assert produced == ["filetype.md", "geo_district.md", "geo_province.md", "repeat.md", "tld.md"]
    for name in produced:
        assert (out_dir / name).read_bytes() == (GOLDENS / name).read_bytes(), name


def test_report_json_round_trips(demo_store, tmp_path):
    from idsweep.reports import table_from_json

    out_dir = tmp_path / "report"
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "repeat",
        "--format", "json", "--out", str(out_dir), "--salt-file", str(SALT_FILE),
    ) == 0
    table = table_from_json((out_dir / "repeat.json").read_text("utf-8"))
    assert table.dimension == "source_multiplicity"
    assert sum(r.unique_ids for r in table.rows) == 40


def test_report_unknown_table_lists_names(demo_store, tmp_path, capsys):
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "filetype,colours",
        "--out", str(tmp_path / "r"), "--salt-file", str(SALT_FILE),
    ) == 2
    err = capsys.readouterr().err
    assert "colours" in err and "repeat" in err


def test_report_unredacted_needs_both_flags(demo_store, tmp_path, capsys):
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "exposures",
        "--out", str(tmp_path / "r"), "--salt-file", str(SALT_FILE), "--unredacted",
    ) == 2
    assert "i-accept-risk" in capsys.readouterr().err


def test_report_requires_salt_or_unsafe_pair(demo_store, tmp_path, capsys):
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "filetype",
        "--out", str(tmp_path / "r"),
    ) == 2
    assert "salt" in capsys.readouterr().err


def test_report_salt_env_accepted(demo_store, tmp_path, monkeypatch):
    monkeypatch.setenv("IDSWEEP_SALT", "pepper")
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "filetype",
        "--out", str(tmp_path / "r"),
    ) == 0


def test_report_exposures_redacted_by_default(demo_store, tmp_path):
    out_dir = tmp_path / "r"
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "exposures",
        "--format", "csv", "--out", str(out_dir), "--salt-file", str(SALT_FILE),
    ) == 0
    text = (out_dir / "exposures.csv").read_text("utf-8")
    manifest = json.loads((DEMO / "manifest.json").read_text("utf-8"))
    for digits in manifest["planted"]:
        assert digits not in text


def test_report_exposures_unredacted_with_interlock(demo_store, tmp_path):
    out_dir = tmp_path / "r"
    assert run_cli(
        "report", "--store", str(demo_store), "--tables", "exposures",
        "--format", "csv", "--out", str(out_dir),
        "--unredacted", "--i-accept-risk",
    ) == 0
    text = (out_dir / "exposures.csv").read_text("utf-8")
    manifest = json.loads((DEMO / "manifest.json").read_text("utf-8"))
    assert all(digits in text for digits in manifest["planted"])


def test_report_missing_store(tmp_path, capsys):
    assert run_cli(
        "report", "--store", str(tmp_path / "void"), "--tables", "filetype",
        "--out", str(tmp_path / "r"), "--salt-file", str(SALT_FILE),
    ) == 2


def test_committed_demo_matches_generator(tmp_path):
    from idsweep.synth import make_corpus

    regen = make_corpus(
        tmp_path / "demo", REG, n_ids=40, n_decoys=10, n_docs=12, n_queries=3,
        seed=20250601, python_command="python3",
    )
    assert (tmp_path / "demo" / "index.json").read_bytes() == (DEMO / "index.json").read_bytes()
    assert (tmp_path / "demo" / "manifest.json").read_bytes() == (DEMO / "manifest.json").read_bytes()
    for doc in sorted((tmp_path / "demo" / "docs").iterdir()):
        assert doc.read_bytes() == (DEMO / "docs" / doc.name).read_bytes(), doc.name
