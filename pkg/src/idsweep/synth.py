"""Synthetic fixture corpora with known ground truth.

A generated corpus is a directory the fixture provider can serve end to end:
``docs/`` holds the document bytes, ``index.json`` maps rendered queries to
paged hits and URLs to files, ``plan.json`` and ``extractors.json`` configure
a scan, and ``manifest.json`` records exactly which IDs were planted (and in
what written form) plus every near-miss sown as a false-positive trap.

Documents with spreadsheet or PDF extensions are plain-text stand-ins routed
through the external-extractor path, so the subprocess plumbing gets exercised
without binary format dependencies.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .geo import GeoRegistry
from .queries import And, FileType, Group, Or, Phrase, QueryPlan, Site, plan_to_json, render
from .thai_id import THAI_DIGITS, compute_checksum, generate_valid_id

FORMS = ("contiguous", "hyphen", "space", "thai", "mixed")
DECOY_KINDS = ("bad_checksum", "bad_prefix", "wrong_length", "embedded", "wrong_grouping")

DOC_TYPES = ("txt", "csv", "html", "pdf", "xlsx", "xls")

HOSTS = (
    "www.nfe.go.th",
    "cdd.go.th",
    "school.ac.th",
    "rta.mi.th",
    "baac.or.th",
    "pokkrongnakhon.com",
    "chpao.org",
    "thai.ac",
    "122.154.253.83",
    "edudev.in.th",
)

GIVEN_NAMES = ("สมชาย", "สมหญิง", "วิชัย", "ดวงใจ", "ประเสริฐ", "อรุณี", "กิตติ", "มาลี")
SURNAMES = ("ใจดี", "สุขสันต์", "รุ่งเรือง", "ทองดี", "ศรีสุข")
HONORIFICS = ("นาย", "นาง", "น.ส.")

_TO_THAI = str.maketrans("0123456789", THAI_DIGITS)


def render_id(digits: str, form: str) -> str:
    """Write a 13-digit ID the way documents in the wild do."""
    groups = (digits[0], digits[1:5], digits[5:10], digits[10:12], digits[12])
    if form == "contiguous":
        return digits
    if form == "hyphen":
        return "-".join(groups)
    if form == "space":
        return " ".join(groups)
    if form == "thai":
        return digits.translate(_TO_THAI)
    if form == "mixed":
        seps = ("-", " ", "-", " ")
        return "".join(g + s for g, s in zip(groups, seps)) + groups[-1]
    raise ValueError(f"unknown form {form!r}")


def _decoy_text(kind: str, registry: GeoRegistry, rng: random.Random) -> str:
    """A near-miss that discovery or validation must reject."""
    district = rng.choice(sorted(registry.districts))
    seq = f"{rng.randrange(10**6, 10**7):07d}"
    valid = generate_valid_id(f"{rng.randint(1, 8)}{district}", seq, registry)
    if kind == "bad_checksum":
        flipped = str((int(valid[12]) + 1) % 10)
        return render_id(valid[:12] + flipped, rng.choice(("contiguous", "hyphen")))
    if kind == "bad_prefix":
        body = rng.choice(("0", "9")) + valid[1:12]
        return body + str(compute_checksum(body))
    if kind == "wrong_length":
        return valid[:12] if rng.random() < 0.5 else valid + str(rng.randint(0, 9))
    if kind == "embedded":
        return str(rng.randint(1, 9)) + valid + str(rng.randint(0, 9))
    if kind == "wrong_grouping":
        return f"{valid[0:4]}-{valid[4:8]}-{valid[8:13]}"
    raise ValueError(f"unknown decoy kind {kind!r}")


def _query_pool() -> list:
    kw_citizen_id = Phrase("เลขบัตรประชาชน", quoted=True)
    kw_national_id = Phrase("เลขประจำตัวประชาชน", quoted=True)
    kw_certificate = Phrase("หนังสือรับรอง", quoted=True)
    kw_roster = Phrase("รายชื่อ", quoted=True)
    kw_students = Phrase("รายชื่อนักเรียน", quoted=True)
    return [
        And((Site("go.th"), FileType("xlsx"), kw_citizen_id)),
        And((FileType("pdf"), kw_certificate, kw_national_id)),
        And((Site("ac.th"), Group(Or((FileType("xls"), FileType("xlsx")))), kw_roster)),
        And((Site("ac.th"), kw_students)),
        And((Group(Or((kw_citizen_id, kw_national_id))), Phrase("ลำดับ", quoted=True))),
    ]


def _doc_lines(doc_type: str, numbers: list[str], rng: random.Random) -> str:
    """Render ID-bearing lines in a document-type-appropriate shape."""
    names = [
        f"{rng.choice(HONORIFICS)}{rng.choice(GIVEN_NAMES)} {rng.choice(SURNAMES)}"
        for _ in numbers
    ]
    if doc_type == "csv":
        rows = ["ลำดับ,ชื่อ-สกุล,เลขประจำตัวประชาชน,หมายเหตุ"]
        rows += [
            f"{i + 1},{name},{num},-"
            for i, (name, num) in enumerate(zip(names, numbers))
        ]
        return "\n".join(rows) + "\n"
    if doc_type == "html":
        rows = "".join(
            f"<tr><td>{i + 1}</td><td>{name}</td><td>{num}</td></tr>"
            for i, (name, num) in enumerate(zip(names, numbers))
        )
        return (
            "<html><head><title>รายชื่อ</title><script>var x=1234567890123;</script></head>"
            f"<body><h1>รายชื่อผู้มีสิทธิ์</h1><table>{rows}</table></body></html>\n"
        )
    if doc_type in ("xlsx", "xls"):
        rows = ["ลำดับ\tชื่อ-สกุล\tเลขบัตรประชาชน"]
        rows += [
            f"{i + 1}\t{name}\t{num}"
            for i, (name, num) in enumerate(zip(names, numbers))
        ]
        return "\n".join(rows) + "\n"
    if doc_type == "pdf":
        lines = ["หนังสือรับรองการหักภาษี ณ ที่จ่าย"]
        for name, num in zip(names, numbers):
            lines.append(f"ขอรับรองว่า {name} เลขประจำตัวผู้เสียภาษี {num} ได้ชำระภาษีแล้ว")
        return "\n".join(lines) + "\n"
    lines = ["ประกาศรายชื่อ"]
    for name, num in zip(names, numbers):
        lines.append(f"{name} เลขบัตรประชาชน {num} สถานะ ปกติ")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorpusManifest:
    root: Path
    index_path: Path
    plan_path: Path
    extractor_config_path: Path
    planted: tuple[str, ...]
    decoys: tuple[tuple[str, str], ...]
    queries: tuple[str, ...]


def make_corpus(
    out_dir: str | Path,
    registry: GeoRegistry,
    n_ids: int = 40,
    n_decoys: int = 10,
    n_docs: int = 12,
    n_queries: int = 3,
    seed: int = 20250601,
    python_command: Optional[str] = None,
) -> CorpusManifest:
    """Generate a scan-ready corpus; deterministic for a fixed seed.

    ``python_command`` names the interpreter used by the external-extractor
    stubs (defaults to the running one; pass "python3" for a corpus meant to
    be committed and replayed elsewhere).
    """
    if n_docs < 2 or n_ids < 2 or n_queries < 1:
        raise ValueError("need at least 2 docs, 2 ids and 1 query")
    if n_queries > len(_query_pool()):
        raise ValueError(f"at most {len(_query_pool())} queries available")
    rng = random.Random(seed)
    root = Path(out_dir)
    docs_dir = root / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)

    districts = sorted(registry.districts)
    categories = (1, 2, 3, 5, 8)
    planted = []
    for i in range(n_ids):
        district = districts[i % len(districts)]
        category = categories[i % len(categories)]
        planted.append(generate_valid_id(f"{category}{district}", f"{1000000 + i:07d}", registry))

    doc_names = [f"doc{i:02d}.{DOC_TYPES[i % len(DOC_TYPES)]}" for i in range(n_docs)]
    entries: dict[str, list[str]] = {name: [] for name in doc_names}
    doc_ids: dict[str, list[str]] = {name: [] for name in doc_names}
    for i, digits in enumerate(planted):
        name = doc_names[i % n_docs]
        entries[name].append(render_id(digits, FORMS[i % len(FORMS)]))
        doc_ids[name].append(digits)
    # one ID also appears in a second document, so multiplicity exceeds one
    extra_home = doc_names[n_docs // 2]
    if planted[0] not in doc_ids[extra_home]:
        entries[extra_home].append(planted[0])
        doc_ids[extra_home].append(planted[0])

    decoys = []
    for i in range(n_decoys):
        kind = DECOY_KINDS[i % len(DECOY_KINDS)]
        rendered = _decoy_text(kind, registry, rng)
        decoys.append((kind, rendered))
        entries[doc_names[i % n_docs]].append(rendered)

    for name in doc_names:
        doc_type = name.rsplit(".", 1)[1]
        (docs_dir / name).write_text(_doc_lines(doc_type, entries[name], rng), "utf-8")

    queries = [render(q) for q in _query_pool()[:n_queries]]
    urls = {
        name: f"http://{HOSTS[i % len(HOSTS)]}/files/{name}" for i, name in enumerate(doc_names)
    }
    objects = {url: {"path": f"docs/{name}"} for name, url in urls.items()}
    # the first document is mirrored at a second URL with no usable extension,
    # so type detection has to come from the disposition header
    mirror_url = f"http://{HOSTS[1]}/download?file=0"
    objects[mirror_url] = {
        "path": f"docs/{doc_names[0]}",
        "content_disposition": f'attachment; filename="{doc_names[0]}"',
    }

    query_hits: dict[str, list[dict]] = {q: [] for q in queries}
    for i, name in enumerate(doc_names):
        query_hits[queries[i % n_queries]].append({"url": urls[name]})
    query_hits[queries[1 % n_queries]].append({"url": mirror_url})
    # the same URL surfaces under two different queries: a cross-query repeat
    query_hits[queries[(n_queries - 1) % n_queries]].append({"url": urls[doc_names[1]]})
    for q, hits in query_hits.items():
        for i, hit in enumerate(hits):
            hit["page"] = i // 10 + 1
            hit["rank"] = i % 10 + 1

    index_path = root / "index.json"
    index_path.write_text(
        json.dumps({"queries": query_hits, "objects": objects}, ensure_ascii=False, indent=2),
        "utf-8",
    )

    plan_path = root / "plan.json"
    plan_path.write_text(plan_to_json(QueryPlan(queries=tuple(queries))), "utf-8")

    python_command = python_command or sys.executable
    extractor_config_path = root / "extractors.json"
    extractor_config_path.write_text(
        json.dumps(
            {
                "extractors": [
                    {"name": "plain", "kind": "plain", "types": ["txt"]},
                    {"name": "cells", "kind": "csv", "types": ["csv"]},
                    {"name": "markup", "kind": "html", "types": ["html"]},
                    {
                        "name": "textcat",
                        "kind": "external",
                        "types": ["pdf", "xls", "xlsx", "doc"],
                        "command": f'"{python_command}" -m idsweep.textcat {{input}}',
                        "timeout": 20,
                    },
                ]
            },
            ensure_ascii=False,
            indent=2,
        ),
        "utf-8",
    )

    manifest = CorpusManifest(
        root=root,
        index_path=index_path,
        plan_path=plan_path,
        extractor_config_path=extractor_config_path,
        planted=tuple(planted),
        decoys=tuple(decoys),
        queries=tuple(queries),
    )
    (root / "manifest.json").write_text(
        json.dumps(
            {
                "seed": seed,
                "planted": list(manifest.planted),
                "decoys": [list(d) for d in manifest.decoys],
                "queries": list(manifest.queries),
                "docs": {name: doc_ids[name] for name in doc_names},
            },
            ensure_ascii=False,
            indent=2,
        ),
        "utf-8",
    )
    return manifest
