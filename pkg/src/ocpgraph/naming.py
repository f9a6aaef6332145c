"""Name heuristics shared by the relational and XML transforms."""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

from .model import PropertyNode

DEFAULT_NAME_ATTRIBUTES = ("name", "title", "label", "caption")


class Significance(str, enum.Enum):
    """Whether a reference's name says more than "points at the target entity"."""

    SIGNIFICANT = "significant"
    INSIGNIFICANT = "insignificant"


def normalize_attr_name(name: str) -> str:
    """Loose form of an attribute or relation name used for similarity tests.

    >>> normalize_attr_name("student_id")
    'student'
    >>> normalize_attr_name("Country")
    'country'
    """
    s = name.lower().replace("_", "").replace("-", "")
    if s.endswith("id") and len(s) > 2:
        s = s[:-2]
    return s


def choose_object_name(
    properties: Iterable[PropertyNode],
    name_attributes: Sequence[str] = DEFAULT_NAME_ATTRIBUTES,
) -> str | None:
    """Value of the best name-like top-level property, or ``None``.

    Candidates are tried in ``name_attributes`` order, so a ``name`` property
    beats an earlier ``title`` property.
    """
    by_name: dict[str, str] = {}
    for prop in properties:
        if prop.value and prop.value.strip():
            by_name.setdefault(normalize_attr_name(prop.name), prop.value)
    for candidate in name_attributes:
        value = by_name.get(normalize_attr_name(candidate))
        if value is not None:
            return value
    return None
