"""Crawl persistence: a sqlite file plus a content-addressed blob directory.

Layout under the store directory::

    store.db           relational state (hits, downloads, objects, exposures,
                       diagnostics)
    objects/<sha256>   raw document bytes, filename = digest

Writes are serialized with a process-local lock so the bounded download pool
can share one store; cross-process exclusivity is the CLI's lock file.
"""

from __future__ import annotations

import hashlib
import os
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

_SCHEMA = """
CREATE TABLE IF NOT EXISTS hits (
    id          INTEGER PRIMARY KEY,
    query       TEXT NOT NULL,
    engine      TEXT NOT NULL,
    page        INTEGER NOT NULL,
    rank        INTEGER NOT NULL,
    url         TEXT NOT NULL,
    retrieved_at TEXT NOT NULL,
    is_repeat   INTEGER NOT NULL DEFAULT 0,
    UNIQUE (query, engine, page, rank, url)
);
CREATE TABLE IF NOT EXISTS downloads (
    id           INTEGER PRIMARY KEY,
    hit_id       INTEGER NOT NULL UNIQUE REFERENCES hits(id),
    status       TEXT NOT NULL,          -- success | failed | type_mismatch
    reason       TEXT,                   -- timeout | network | too_large | <ext>
    sha256       TEXT,
    declared_type TEXT,
    stored_path  TEXT,
    size_bytes   INTEGER,
    completed_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS objects (
    sha256      TEXT PRIMARY KEY,
    size_bytes  INTEGER NOT NULL,
    stored_path TEXT NOT NULL,
    first_seen  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS exposures (
    digits     TEXT NOT NULL,
    sha256     TEXT NOT NULL,
    url        TEXT NOT NULL,
    query      TEXT NOT NULL,
    engine     TEXT NOT NULL,
    file_type  TEXT NOT NULL,
    first_seen TEXT NOT NULL,
    PRIMARY KEY (digits, sha256)
);
CREATE TABLE IF NOT EXISTS diagnostics (
    id         INTEGER PRIMARY KEY,
    kind       TEXT NOT NULL,
    subject    TEXT NOT NULL,
    detail     TEXT NOT NULL,
    created_at TEXT NOT NULL
);
"""


@dataclass(frozen=True)
class StoredExposure:
    digits: str
    sha256: str
    url: str
    query: str
    engine: str
    file_type: str
    first_seen: str


@dataclass(frozen=True)
class ExposureOccurrence:
    """One (id, document, url) co-occurrence, expanded across mirrors.

    An ID is recorded once per document (digest), but a document reachable
    from several URLs yields one occurrence per URL/query so that source
    multiplicity and per-query effectiveness can be counted.
    """

    digits: str
    sha256: str
    url: str
    query: str
    engine: str
    file_type: str


class ResultStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.objects_dir = self.root / "objects"
        self.objects_dir.mkdir(exist_ok=True)
        self.db_path = self.root / "store.db"
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.Lock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "ResultStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # --- hits ---------------------------------------------------------------

    def add_hit(
        self, query: str, engine: str, page: int, rank: int, url: str,
        retrieved_at: str, is_repeat: bool,
    ) -> int:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO hits (query, engine, page, rank, url, retrieved_at, is_repeat)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                (query, engine, page, rank, url, retrieved_at, int(is_repeat)),
            )
            row = self._conn.execute(
                "SELECT id FROM hits WHERE query=? AND engine=? AND page=? AND rank=? AND url=?",
                (query, engine, page, rank, url),
            ).fetchone()
        return int(row[0])

    def hit_count(self) -> int:
        return int(self._conn.execute("SELECT COUNT(*) FROM hits").fetchone()[0])

    def distinct_urls(self) -> int:
        return int(self._conn.execute("SELECT COUNT(DISTINCT url) FROM hits").fetchone()[0])

    # --- objects --------------------------------------------------------------

    def put_object(self, data: bytes, first_seen: str) -> tuple[str, str]:
        """Content-address the bytes; returns (sha256, stored_path)."""
        digest = hashlib.sha256(data).hexdigest()
        path = self.objects_dir / digest
        if not path.exists():
            tmp = path.with_name(f"{digest}.tmp{threading.get_ident()}")
            tmp.write_bytes(data)
            os.replace(tmp, path)  # atomic; concurrent writers race benignly
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO objects (sha256, size_bytes, stored_path, first_seen)"
                " VALUES (?, ?, ?, ?)",
                (digest, len(data), str(path), first_seen),
            )
        return digest, str(path)

    def read_object(self, sha256: str) -> bytes:
        return (self.objects_dir / sha256).read_bytes()

    def object_count(self) -> int:
        return int(self._conn.execute("SELECT COUNT(*) FROM objects").fetchone()[0])

    # --- downloads --------------------------------------------------------------

    def record_download(
        self, hit_id: int, status: str, completed_at: str,
        reason: Optional[str] = None, sha256: Optional[str] = None,
        declared_type: Optional[str] = None, stored_path: Optional[str] = None,
        size_bytes: Optional[int] = None,
    ) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO downloads"
                " (hit_id, status, reason, sha256, declared_type, stored_path, size_bytes, completed_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (hit_id, status, reason, sha256, declared_type, stored_path, size_bytes, completed_at),
            )

    def download_counts(self) -> dict[str, int]:
        rows = self._conn.execute("SELECT status, COUNT(*) FROM downloads GROUP BY status").fetchall()
        return {status: int(n) for status, n in rows}

    # --- exposures ---------------------------------------------------------------

    def add_exposure(
        self, digits: str, sha256: str, url: str, query: str, engine: str,
        file_type: str, first_seen: str,
    ) -> bool:
        """Record an (id, document) pair; returns False if already present."""
        with self._lock, self._conn:
            cur = self._conn.execute(
                "INSERT OR IGNORE INTO exposures (digits, sha256, url, query, engine, file_type, first_seen)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                (digits, sha256, url, query, engine, file_type, first_seen),
            )
        return cur.rowcount > 0

    def unique_id_count(self) -> int:
        return int(self._conn.execute("SELECT COUNT(DISTINCT digits) FROM exposures").fetchone()[0])

    def exposed_document_count(self) -> int:
        return int(self._conn.execute("SELECT COUNT(DISTINCT sha256) FROM exposures").fetchone()[0])

    def load_exposures(self) -> list[StoredExposure]:
        rows = self._conn.execute(
            "SELECT digits, sha256, url, query, engine, file_type, first_seen"
            " FROM exposures ORDER BY digits, sha256"
        ).fetchall()
        return [StoredExposure(*row) for row in rows]

    def load_occurrences(self) -> list[ExposureOccurrence]:
        """Expand (id, document) pairs across every URL the document came from."""
        rows = self._conn.execute(
            """
            SELECT DISTINCT e.digits, e.sha256, h.url, h.query, h.engine, d.declared_type
            FROM exposures e
            JOIN downloads d ON d.sha256 = e.sha256 AND d.status = 'success'
            JOIN hits h ON h.id = d.hit_id
            ORDER BY e.digits, e.sha256, h.url, h.query
            """
        ).fetchall()
        return [ExposureOccurrence(*row) for row in rows]

    # --- diagnostics ---------------------------------------------------------------

    def add_diagnostic(self, kind: str, subject: str, detail: str, created_at: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO diagnostics (kind, subject, detail, created_at) VALUES (?, ?, ?, ?)",
                (kind, subject, detail, created_at),
            )

    def diagnostics(self) -> list[tuple[str, str, str]]:
        rows = self._conn.execute("SELECT kind, subject, detail FROM diagnostics ORDER BY id").fetchall()
        return [tuple(r) for r in rows]
