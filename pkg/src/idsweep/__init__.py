"""idsweep: find and analyze exposed Thai national ID numbers in documents."""

from .domains import DomainInfo, classify_url
from .geo import GeoRegistry, RegistryError, default_registry, load_registry, load_registry_file
from .harvest import CrawlConfig, DownloadRecord, SearchHit, download_all, execute_plan
from .pipeline import ScanSummary, run_scan, scan_document
from .providers import FixtureProvider, HttpProvider, ProviderDisabled, ProviderError
from .queries import QueryPlan, build_plan_from_templates, load_plan_file, render
from .reports import (
    AggregateTable,
    ExposureRecord,
    aggregate,
    build_records,
    emit_report,
    exposure_listing,
    geographic_report,
    percent_of,
    repeat_exposure,
)
from .store import ResultStore
from .thai_id import (
    NationalId,
    PseudonymToken,
    RawCandidate,
    ValidationOutcome,
    compute_checksum,
    decode,
    find_candidates,
    generate_valid_id,
    normalize_numerals,
    pseudonymize,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateTable",
    "CrawlConfig",
    "DomainInfo",
    "DownloadRecord",
    "ExposureRecord",
    "FixtureProvider",
    "GeoRegistry",
    "HttpProvider",
    "NationalId",
    "ProviderDisabled",
    "ProviderError",
    "PseudonymToken",
    "QueryPlan",
    "RawCandidate",
    "ResultStore",
    "RegistryError",
    "ScanSummary",
    "SearchHit",
    "ValidationOutcome",
    "aggregate",
    "build_plan_from_templates",
    "build_records",
    "classify_url",
    "compute_checksum",
    "decode",
    "default_registry",
    "download_all",
    "emit_report",
    "execute_plan",
    "exposure_listing",
    "find_candidates",
    "generate_valid_id",
    "geographic_report",
    "load_plan_file",
    "load_registry",
    "load_registry_file",
    "normalize_numerals",
    "percent_of",
    "pseudonymize",
    "render",
    "repeat_exposure",
    "run_scan",
    "scan_document",
    "validate",
    "__version__",
]
