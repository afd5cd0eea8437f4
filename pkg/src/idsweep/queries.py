"""Search-query construction: expression algebra, dorks, plans, templates.

Queries are built as small expression trees and rendered to the operator
syntax the big engines share: ``site:``/``filetype:`` prefixes, quoted
phrases, ``-`` exclusion, ``OR``/``AND`` tokens and parenthesized groups.
Adjacent terms are an implicit conjunction and render with a plain space;
an explicit ``And`` renders the token.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence, Union

if TYPE_CHECKING:  # pragma: no cover
    from .geo import GeoRegistry

ALLOWED_FILETYPES = ("pdf", "xls", "xlsx", "doc", "docx")
KNOWN_ENGINES = ("google", "bing")

QueryExpr = Union[
    "Phrase", "Exclude", "FileType", "Site", "Raw", "Placeholder", "And", "Or", "Group"
]


class QueryError(ValueError):
    """Bad query construction, rendering, or plan input."""


@dataclass(frozen=True)
class Phrase:
    """A search term; quoted on request, or always when it contains spaces."""

    text: str
    quoted: bool = False

    def __post_init__(self):
        if not self.text:
            raise QueryError("empty phrase")


@dataclass(frozen=True)
class Exclude:
    term: str

    def __post_init__(self):
        if not self.term or " " in self.term:
            raise QueryError(f"bad exclusion term {self.term!r}")


@dataclass(frozen=True)
class FileType:
    ext: str

    def __post_init__(self):
        if self.ext not in ALLOWED_FILETYPES:
            raise QueryError(f"filetype {self.ext!r} not in {ALLOWED_FILETYPES}")


@dataclass(frozen=True)
class Site:
    suffix: str

    def __post_init__(self):
        if not self.suffix or " " in self.suffix:
            raise QueryError(f"bad site suffix {self.suffix!r}")


@dataclass(frozen=True)
class Raw:
    """A pre-rendered fragment, inserted verbatim (bound placeholder values)."""

    text: str

    def __post_init__(self):
        if not self.text:
            raise QueryError("empty raw fragment")


@dataclass(frozen=True)
class Placeholder:
    """A named slot filled at plan-build time."""

    name: str

    def __post_init__(self):
        if not self.name.isidentifier():
            raise QueryError(f"bad placeholder name {self.name!r}")


def _tuple_children(children: Iterable[QueryExpr]) -> tuple[QueryExpr, ...]:
    out = tuple(children)
    if not out:
        raise QueryError("connective needs at least one child")
    return out


@dataclass(frozen=True)
class And:
    children: tuple[QueryExpr, ...]
    explicit: bool = False  # True renders the AND token, False a plain space

    def __post_init__(self):
        object.__setattr__(self, "children", _tuple_children(self.children))


@dataclass(frozen=True)
class Or:
    children: tuple[QueryExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", _tuple_children(self.children))


@dataclass(frozen=True)
class Group:
    child: QueryExpr


def render(expr: QueryExpr) -> str:
    """Rendered operator-syntax string for an expression tree."""
    if isinstance(expr, Phrase):
        if expr.quoted or any(ch.isspace() for ch in expr.text):
            return f'"{expr.text}"'
        return expr.text
    if isinstance(expr, Exclude):
        return f"-{expr.term}"
    if isinstance(expr, FileType):
        return f"filetype:{expr.ext}"
    if isinstance(expr, Site):
        return f"site:{expr.suffix}"
    if isinstance(expr, Raw):
        return expr.text
    if isinstance(expr, Placeholder):
        raise QueryError(f"unbound placeholder {expr.name!r}")
    if isinstance(expr, And):
        joiner = " AND " if expr.explicit else " "
        return joiner.join(render(c) for c in expr.children)
    if isinstance(expr, Or):
        return " OR ".join(render(c) for c in expr.children)
    if isinstance(expr, Group):
        return f"({render(expr.child)})"
    raise QueryError(f"not a query expression: {expr!r}")


def substitute(expr: QueryExpr, binding: Mapping[str, str]) -> QueryExpr:
    """Replace placeholders with Raw fragments; unbound names are an error."""
    if isinstance(expr, Placeholder):
        if expr.name not in binding:
            raise QueryError(f"unbound placeholder {expr.name!r}")
        return Raw(binding[expr.name])
    if isinstance(expr, And):
        return And(tuple(substitute(c, binding) for c in expr.children), expr.explicit)
    if isinstance(expr, Or):
        return Or(tuple(substitute(c, binding) for c in expr.children))
    if isinstance(expr, Group):
        return Group(substitute(expr.child, binding))
    return expr


def placeholder_names(expr: QueryExpr) -> set[str]:
    if isinstance(expr, Placeholder):
        return {expr.name}
    if isinstance(expr, (And, Or)):
        out: set[str] = set()
        for child in expr.children:
            out |= placeholder_names(child)
        return out
    if isinstance(expr, Group):
        return placeholder_names(expr.child)
    return set()


def prefix_dorks(registry: "GeoRegistry", categories: Iterable[int]) -> list[str]:
    """Quoted leading-fragment dorks, one per (category, district).

    A written ID starts ``c-dddd-`` in the grouped layout, so the quoted
    fragment is a high-precision probe for pages carrying IDs from one
    district.  Output is sorted by category then district code and has
    exactly |categories| x |districts| entries.
    """
    cats = sorted(set(categories))
    for c in cats:
        if c not in range(1, 9):
            raise QueryError(f"category {c} is not issued (1-8)")
    return [
        f'"{c}-{district.code}-"'
        for c in cats
        for district in registry.iter_districts()
    ]


@dataclass(frozen=True)
class QueryPlan:
    """An executable batch of rendered queries plus crawl intent."""

    queries: tuple[str, ...]
    engines: tuple[str, ...] = ("google",)
    max_pages: int = 10
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))
        object.__setattr__(self, "engines", tuple(self.engines))
        object.__setattr__(self, "tags", tuple(self.tags))
        if not self.queries or any(not q.strip() for q in self.queries):
            raise QueryError("plan needs at least one non-empty query")
        if self.max_pages < 1:
            raise QueryError("max_pages must be >= 1")
        bad = [e for e in self.engines if e not in KNOWN_ENGINES]
        if bad or not self.engines:
            raise QueryError(f"engines must be a non-empty subset of {KNOWN_ENGINES}, got {self.engines}")


def build_plan(
    template: QueryExpr,
    bindings: Sequence[Mapping[str, str]],
    engines: Iterable[str] = ("google",),
    max_pages: int = 10,
    tags: Iterable[str] = (),
) -> QueryPlan:
    """One rendered query per binding map, in binding order."""
    if not bindings:
        raise QueryError("no bindings given")
    queries = [render(substitute(template, b)) for b in bindings]
    return QueryPlan(tuple(queries), tuple(engines), max_pages, tuple(tags))


# --- text-file interfaces ----------------------------------------------------

_formatter = string.Formatter()


def expand_template(template: str, binding: Mapping[str, str]) -> str:
    """Fill ``{name}`` slots in a one-line textual template."""
    out: list[str] = []
    for literal, name, spec, conv in _formatter.parse(template):
        out.append(literal)
        if name is None:
            continue
        if spec or conv or not name:
            raise QueryError(f"bad placeholder in template: {template!r}")
        if name not in binding:
            raise QueryError(f"unbound placeholder {name!r}")
        out.append(binding[name])
    return "".join(out)


def load_templates(path: str | Path) -> list[str]:
    """Templates, one per line; blank lines and # comments skipped."""
    out = []
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def load_bindings(path: str | Path) -> list[dict[str, str]]:
    """Binding maps from delimited text: header row names placeholders.

    Values are taken verbatim (no CSV quoting), so a row like ``"1-1001-"``
    binds the quotes too -- handy because dorks are quoted fragments.
    """
    import csv

    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle, quoting=csv.QUOTE_NONE))
    if any(None in row or None in row.values() for row in rows):
        raise QueryError(f"ragged binding file {path}")
    return [dict(row) for row in rows]


def build_plan_from_templates(
    templates: Sequence[str],
    bindings: Sequence[Mapping[str, str]] | None = None,
    engines: Iterable[str] = ("google",),
    max_pages: int = 10,
    tags: Iterable[str] = (),
) -> QueryPlan:
    """Cross every textual template with every binding map (template-major)."""
    if not templates:
        raise QueryError("no templates given")
    maps = list(bindings) if bindings else [{}]
    queries = [expand_template(t, b) for t in templates for b in maps]
    return QueryPlan(tuple(queries), tuple(engines), max_pages, tuple(tags))


def plan_to_json(plan: QueryPlan) -> str:
    return json.dumps(
        {
            "queries": list(plan.queries),
            "engines": list(plan.engines),
            "max_pages": plan.max_pages,
            "tags": list(plan.tags),
        },
        ensure_ascii=False,
        indent=2,
    )


def plan_from_json(text: str) -> QueryPlan:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryError(f"plan is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "queries" not in data:
        raise QueryError("plan JSON must be an object with a 'queries' list")
    return QueryPlan(
        queries=tuple(data["queries"]),
        engines=tuple(data.get("engines", ("google",))),
        max_pages=int(data.get("max_pages", 10)),
        tags=tuple(data.get("tags", ())),
    )


def load_plan_file(path: str | Path) -> QueryPlan:
    return plan_from_json(Path(path).read_text("utf-8"))


# --- bundled Thai keyword list ------------------------------------------------

def load_keywords(path: str | Path | None = None) -> list[tuple[str, str]]:
    """(thai, english gloss) pairs from the bundled or a user keyword file."""
    if path is None:
        from importlib import resources

        text = resources.files("idsweep.data").joinpath("keywords_th.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    pairs: list[tuple[str, str]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        thai, _, gloss = line.partition("#")
        pairs.append((thai.strip(), gloss.strip()))
    return pairs
