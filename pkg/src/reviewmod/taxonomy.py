"""Taxonomy registry: the category vocabulary used by the coach stage.

The taxonomy ships as a data file rather than code so deployments can swap
category sets without touching the package. A valid taxonomy has at least
one toxic category and exactly one non-toxic marker; every category needs
a definition and at least one exemplar comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .errors import TaxonomyError

_SLUG_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def slugify(name: str) -> str:
    """Normalize a category name to a lowercase slug (stable metric keys)."""
    slug = re.sub(r"[^a-z0-9]+", "_", name.strip().lower()).strip("_")
    return slug


@dataclass(frozen=True)
class CategoryDef:
    id: str
    display_name: str
    definition: str
    exemplars: tuple[str, ...]
    is_non_toxic_marker: bool = False

    def __post_init__(self) -> None:
        if not _SLUG_RE.match(self.id):
            raise TaxonomyError(f"category id {self.id!r} is not a lowercase slug")
        if not self.definition.strip():
            raise TaxonomyError(f"category {self.id!r}: definition is empty")
        if len(self.exemplars) < 1:
            raise TaxonomyError(f"category {self.id!r}: at least one exemplar required")


@dataclass(frozen=True)
class Taxonomy:
    version: str
    categories: tuple[CategoryDef, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ids = [c.id for c in self.categories]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise TaxonomyError(f"duplicate category ids: {sorted(dupes)}")
        markers = [c for c in self.categories if c.is_non_toxic_marker]
        if len(markers) != 1:
            raise TaxonomyError(
                f"exactly one non-toxic marker required, found {len(markers)}"
            )
        if len(self.categories) - 1 < 1:
            raise TaxonomyError("at least one toxic category required")

    @property
    def marker(self) -> CategoryDef:
        return next(c for c in self.categories if c.is_non_toxic_marker)

    @property
    def toxic_categories(self) -> tuple[CategoryDef, ...]:
        return tuple(c for c in self.categories if not c.is_non_toxic_marker)

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.categories)

    @property
    def toxic_ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.toxic_categories)

    def get(self, category_id: str) -> CategoryDef:
        for c in self.categories:
            if c.id == category_id:
                return c
        raise KeyError(category_id)


def load_taxonomy(config_source: str) -> Taxonomy:
    """Parse and validate a taxonomy from YAML/JSON text."""
    try:
        doc = yaml.safe_load(config_source)
    except yaml.YAMLError as exc:
        raise TaxonomyError(f"malformed taxonomy config: {exc}") from exc
    if not isinstance(doc, dict):
        raise TaxonomyError("taxonomy config must be a mapping")
    raw_categories = doc.get("categories")
    if not isinstance(raw_categories, list) or not raw_categories:
        raise TaxonomyError("taxonomy config needs a non-empty 'categories' list")
    categories = []
    for i, entry in enumerate(raw_categories):
        if not isinstance(entry, dict) or "id" not in entry:
            raise TaxonomyError(f"categories[{i}]: expected a mapping with an 'id'")
        exemplars = entry.get("exemplars") or []
        if not isinstance(exemplars, list):
            raise TaxonomyError(f"categories[{i}]: exemplars must be a list")
        categories.append(
            CategoryDef(
                id=slugify(str(entry["id"])),
                display_name=str(entry.get("display_name") or entry["id"]),
                definition=str(entry.get("definition", "")),
                exemplars=tuple(str(e) for e in exemplars),
                is_non_toxic_marker=bool(entry.get("is_non_toxic_marker", False)),
            )
        )
    return Taxonomy(version=str(doc.get("version", "0")), categories=tuple(categories))


def load_taxonomy_file(path: str | Path) -> Taxonomy:
    return load_taxonomy(Path(path).read_text(encoding="utf-8"))


def dump_taxonomy(taxonomy: Taxonomy) -> str:
    """Serialize back to YAML; round-trips through ``load_taxonomy``."""
    doc = {
        "version": taxonomy.version,
        "categories": [
            {
                "id": c.id,
                "display_name": c.display_name,
                "definition": c.definition,
                "exemplars": list(c.exemplars),
                "is_non_toxic_marker": c.is_non_toxic_marker,
            }
            for c in taxonomy.categories
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def default_taxonomy() -> Taxonomy:
    """The bundled 11-category incivility taxonomy plus the non-toxic marker."""
    text = resources.files("reviewmod.data").joinpath("taxonomy.yaml").read_text("utf-8")
    return load_taxonomy(text)
