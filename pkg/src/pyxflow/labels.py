"""Readers/writers security labels over a finite set of principals.

A label is a triple ``(owner, readers, writers)``.  Information may flow
from ``l1`` to ``l2`` when the readers shrink and the writers grow; the
owner takes no part in the ordering and is only consulted by downgrading.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

ANONYMOUS = "-"
WILDCARD = "*"


class LabelError(ValueError):
    """Raised for malformed labels or labels from different universes."""


@dataclass(frozen=True)
class Universe:
    """Finite ordered set of principals that labels range over."""

    members: tuple

    def __init__(self, members: Iterable[str]):
        seen = []
        for name in members:
            if not isinstance(name, str) or not name:
                raise LabelError(f"principal names must be non-empty text, got {name!r}")
            if name in (WILDCARD, ANONYMOUS):
                raise LabelError(f"{name!r} is reserved and cannot name a principal")
            if name in seen:
                raise LabelError(f"duplicate principal {name!r}")
            seen.append(name)
        if not seen:
            raise LabelError("a principal universe must not be empty")
        object.__setattr__(self, "members", tuple(seen))
        object.__setattr__(self, "_set", frozenset(seen))

    def __contains__(self, name: object) -> bool:
        return name in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def all(self) -> frozenset:
        return self._set

    def resolve(self, names: Iterable[str]) -> frozenset:
        """Turn a reader/writer list into a concrete set, expanding ``*``."""
        out = set()
        for name in names:
            if name == WILDCARD:
                out |= self._set
            elif name in self._set:
                out.add(name)
            else:
                raise LabelError(f"unknown principal {name!r}")
        return frozenset(out)

    def label(self, owner: Optional[str], readers: Iterable[str], writers: Iterable[str]) -> "Label":
        if owner == ANONYMOUS:
            owner = None
        if owner is not None and owner not in self._set:
            raise LabelError(f"unknown owner {owner!r}")
        return Label(owner, self.resolve(readers), self.resolve(writers), self)

    def bottom(self) -> "Label":
        return Label(None, self._set, frozenset(), self)

    def top(self) -> "Label":
        return Label(None, frozenset(), self._set, self)


@dataclass(frozen=True)
class Label:
    owner: Optional[str]
    readers: frozenset
    writers: frozenset
    universe: Universe = field(compare=False, repr=False)

    def __post_init__(self):
        if not self.readers <= self.universe.all or not self.writers <= self.universe.all:
            raise LabelError("readers and writers must be drawn from the universe")

    def _check(self, other: "Label") -> None:
        if self.universe is not other.universe and self.universe != other.universe:
            raise LabelError("labels belong to different principal universes")

    def leq(self, other: "Label") -> bool:
        """Can-flow-to: readers may only shrink, writers may only grow."""
        self._check(other)
        return self.readers >= other.readers and self.writers <= other.writers

    __le__ = leq

    def join(self, other: "Label") -> "Label":
        self._check(other)
        return Label(None, self.readers & other.readers, self.writers | other.writers, self.universe)

    def meet(self, other: "Label") -> "Label":
        self._check(other)
        return Label(None, self.readers | other.readers, self.writers & other.writers, self.universe)

    def with_owner(self, owner: Optional[str]) -> "Label":
        if owner is not None and owner not in self.universe:
            raise LabelError(f"owner {owner!r} is not a principal of this universe")
        if owner == self.owner:
            return self
        return Label(owner, self.readers, self.writers, self.universe)

    def same_policy(self, other: "Label") -> bool:
        """Equality on readers and writers only."""
        return self.readers == other.readers and self.writers == other.writers

    def render(self, star: bool = False) -> str:
        owner = self.owner if self.owner is not None else ANONYMOUS
        if star and self.readers == self.universe.all:
            readers = WILDCARD
        else:
            readers = ",".join(sorted(self.readers))
        writers = ",".join(sorted(self.writers))
        return f"({owner},{{{readers}}},{{{writers}}})"

    def __str__(self) -> str:
        return self.render()

    def to_json(self) -> dict:
        return {
            "owner": self.owner if self.owner is not None else ANONYMOUS,
            "readers": sorted(self.readers),
            "writers": sorted(self.writers),
        }


def leq(l1: Label, l2: Label) -> bool:
    return l1.leq(l2)


def join(l1: Label, l2: Label) -> Label:
    return l1.join(l2)


def meet(l1: Label, l2: Label) -> Label:
    return l1.meet(l2)


def join_all(labels: Iterable[Label], start: Label) -> Label:
    out = start
    for lab in labels:
        out = out.join(lab)
    return out


def bottom(universe: Universe) -> Label:
    return universe.bottom()


def top(universe: Universe) -> Label:
    return universe.top()


def with_owner(label: Label, owner: str) -> Label:
    return label.with_owner(owner)


def label_from_json(universe: Universe, data) -> Label:
    """Build a label from ``{"owner": .., "readers": [..], "writers": [..]}``.

    ``readers``/``writers`` may be a list or the bare string ``"*"``.
    """
    if not isinstance(data, dict):
        raise LabelError(f"label must be an object, got {type(data).__name__}")
    missing = [k for k in ("owner", "readers", "writers") if k not in data]
    if missing:
        raise LabelError(f"label is missing {', '.join(missing)}")
    parts = []
    for key in ("readers", "writers"):
        value = data[key]
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list):
            raise LabelError(f"label {key} must be a list of principals")
        parts.append(value)
    owner = data["owner"]
    if owner is not None and not isinstance(owner, str):
        raise LabelError("label owner must be a principal name")
    return universe.label(owner, parts[0], parts[1])
