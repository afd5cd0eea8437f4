"""End-to-end scan: search, download, extract, detect, persist.

The stages are glued with at-least-once semantics everywhere the store is
idempotent, so re-running a plan over the same store changes nothing and the
summary comes out identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .extract import (
    ExtractionError,
    ExtractorSpec,
    UnsupportedTypeError,
    default_extractors,
    extract_text,
)
from .geo import GeoRegistry
from .harvest import Clock, CrawlConfig, download_all, execute_plan
from .queries import QueryPlan
from .store import ResultStore
from .thai_id import find_candidates, validate


@dataclass(frozen=True)
class ScanSummary:
    queries: int
    hits: int
    urls: int
    downloads_ok: int
    downloads_failed: int
    documents: int
    candidates: int
    unique_ids: int
    exposed_documents: int

    def line(self) -> str:
        return (
            f"{self.queries} queries yielded {self.urls} result URLs; "
            f"{self.downloads_ok} fetched ({self.downloads_failed} failed); "
            f"{self.unique_ids} distinct IDs across {self.exposed_documents} "
            f"of {self.documents} documents"
        )


def scan_document(
    data: bytes,
    declared_type: str,
    registry: GeoRegistry,
    extractors: Sequence[ExtractorSpec],
    digest: str = "",
) -> tuple[list[str], int]:
    """Extract text and return (accepted ID digits in reading order, candidate count)."""
    result = extract_text(data, declared_type, extractors, object_digest=digest)
    accepted: list[str] = []
    candidates = find_candidates(result.merged)
    for candidate in candidates:
        if validate(candidate.normalized, registry).accepted:
            accepted.append(candidate.normalized)
    return accepted, len(candidates)


def run_scan(
    plan: QueryPlan,
    provider,
    config: CrawlConfig,
    store: ResultStore,
    registry: GeoRegistry,
    extractors: Optional[Sequence[ExtractorSpec]] = None,
    clock: Optional[Clock] = None,
) -> ScanSummary:
    """Execute the plan and persist every accepted ID, once per document.

    Extraction runs once per distinct object digest no matter how many URLs
    delivered it; the exposure row keeps the first delivering URL as its
    provenance, and per-URL multiplicity is recovered from the hits table.
    Documents that cannot be extracted land in diagnostics, never silently.
    """
    clock = clock or Clock()
    extractors = list(extractors) if extractors is not None else default_extractors()

    hits = execute_plan(plan, provider, config, store, clock=clock)
    records = download_all(hits, provider, config, store, clock=clock)

    hit_by_id = {hit.hit_id: hit for hit in hits}
    seen_digests: set[str] = set()
    candidates_total = 0
    failed = 0
    for record in records:
        if record.status != "success":
            failed += 1
            continue
        assert record.sha256 is not None and record.declared_type is not None
        if record.sha256 in seen_digests:
            continue
        seen_digests.add(record.sha256)
        data = store.read_object(record.sha256)
        hit = hit_by_id.get(record.hit_id)
        first_seen = hit.retrieved_at if hit else ""
        try:
            ids, n_candidates = scan_document(
                data, record.declared_type, registry, extractors, digest=record.sha256
            )
        except UnsupportedTypeError as exc:
            store.add_diagnostic("unsupported_type", record.url, str(exc), first_seen)
            continue
        except ExtractionError as exc:
            store.add_diagnostic("extraction_failed", record.sha256, str(exc), first_seen)
            continue
        candidates_total += n_candidates
        for digits in ids:
            store.add_exposure(
                digits=digits,
                sha256=record.sha256,
                url=record.url,
                query=hit.query if hit else "",
                engine=hit.engine if hit else "",
                file_type=record.declared_type,
                first_seen=first_seen,
            )

    return ScanSummary(
        queries=len(plan.queries),
        hits=len(hits),
        urls=len({h.url for h in hits}),
        downloads_ok=len(records) - failed,
        downloads_failed=failed,
        documents=len(seen_digests),
        candidates=candidates_total,
        unique_ids=store.unique_id_count(),
        exposed_documents=store.exposed_document_count(),
    )
