"""Channel types, usage attributes and their algebra.

A channel type ``ch(T1, ..., Tn)@a`` carries object types and an attribute
``a``: affine (usable at most once), unrestricted, or unique-after-``i``.
Environments are multisets of assumptions; they need not be partial maps.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

from pir.syntax import Name, ProcVar, Var


@dataclass(frozen=True, order=True)
class Affine:
    def __str__(self) -> str:
        return "aff"


@dataclass(frozen=True, order=True)
class Unrestricted:
    def __str__(self) -> str:
        return "unr"


@dataclass(frozen=True, order=True)
class Unique:
    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 0:
            raise ValueError(f"unique index must be a natural number, got {self.index!r}")

    def __str__(self) -> str:
        return f"unq({self.index})"


Attribute = Union[Affine, Unrestricted, Unique]

AFF = Affine()
UNR = Unrestricted()


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class Chan(Type):
    objects: tuple  # tuple of Type
    attr: Attribute

    def __str__(self) -> str:
        objs = self.objects
        inner = ", ".join(str(t) for t in objs) if isinstance(objs, tuple) else str(objs)
        return f"ch({inner})@{self.attr}"

    def with_attr(self, attr: Attribute) -> "Chan":
        return Chan(self.objects, attr)


@dataclass(frozen=True)
class ProcType(Type):
    def __str__(self) -> str:
        return "proc"


PROC = ProcType()


def ch(*objects: Type, attr: Attribute = UNR) -> Chan:
    return Chan(tuple(objects), attr)


class Usage(Enum):
    """Outcomes of ``decrement`` other than a new type."""

    CONSUMED = "consumed"
    UNDEFINED = "undefined"


CONSUMED = Usage.CONSUMED
UNDEFINED = Usage.UNDEFINED


def decrement(t: Type) -> Chan | Usage:
    """Channel usage: one communication on a channel of type ``t``."""
    if not isinstance(t, Chan):
        raise TypeError(f"decrement applies to channel types, got {t}")
    a = t.attr
    if isinstance(a, Affine):
        return CONSUMED
    if isinstance(a, Unrestricted):
        return t
    if a.index == 0:
        return UNDEFINED
    return t.with_attr(Unique(a.index - 1))


def split(t: Type) -> frozenset[tuple[Type, Type]]:
    """All ways of writing ``t`` as ``t1 ∘ t2``."""
    if isinstance(t, ProcType):
        return frozenset({(t, t)})
    a = t.attr
    if isinstance(a, Unrestricted):
        return frozenset({(t, t)})
    if isinstance(a, Unique):
        aff, nxt = t.with_attr(AFF), t.with_attr(Unique(a.index + 1))
        return frozenset({(aff, nxt), (nxt, aff)})
    return frozenset()


def attr_le(a1: Attribute, a2: Attribute) -> bool:
    """Reflexive-transitive closure of unq(i) < unq(i+1) < unr < aff."""
    if a1 == a2:
        return True
    if isinstance(a2, Affine):
        return True
    if isinstance(a1, Unique):
        return isinstance(a2, Unrestricted) or (isinstance(a2, Unique) and a1.index <= a2.index)
    return False


def subtype(t1: Type, t2: Type) -> bool:
    if isinstance(t1, ProcType) or isinstance(t2, ProcType):
        return t1 == t2
    return t1.objects == t2.objects and attr_le(t1.attr, t2.attr)


def is_unrestricted(t: Type) -> bool:
    return isinstance(t, ProcType) or (isinstance(t, Chan) and isinstance(t.attr, Unrestricted))


def unique_index(t: Type) -> int | None:
    if isinstance(t, Chan) and isinstance(t.attr, Unique):
        return t.attr.index
    return None


Key = Union[Name, Var, ProcVar]


def _sort_key(entry: tuple[Key, Type]) -> tuple:
    u, t = entry
    return (u.text, type(u).__name__, str(t))


class TypeEnv:
    """An immutable multiset of ``(identifier, type)`` assumptions."""

    __slots__ = ("_bag", "_hash")

    def __init__(self, entries: Iterable[tuple[Key, Type]] = ()) -> None:
        self._bag = Counter(entries)
        self._hash = None

    @classmethod
    def of(cls, *entries: tuple[Key, Type]) -> "TypeEnv":
        return cls(entries)

    def entries(self) -> list[tuple[Key, Type]]:
        return sorted(self._bag.elements(), key=_sort_key)

    def __iter__(self) -> Iterator[tuple[Key, Type]]:
        return iter(self.entries())

    def __len__(self) -> int:
        return sum(self._bag.values())

    def __contains__(self, entry) -> bool:
        return self._bag[entry] > 0

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeEnv) and +self._bag == +other._bag

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset((+self._bag).items()))
        return self._hash

    def __add__(self, other: "TypeEnv") -> "TypeEnv":
        return TypeEnv((self._bag + other._bag).elements())

    def add(self, u: Key, t: Type) -> "TypeEnv":
        bag = self._bag.copy()
        bag[(u, t)] += 1
        return TypeEnv(bag.elements())

    def remove(self, u: Key, t: Type) -> "TypeEnv":
        if self._bag[(u, t)] <= 0:
            raise KeyError((u, t))
        bag = self._bag.copy()
        bag[(u, t)] -= 1
        return TypeEnv(bag.elements())

    def minus(self, other: "TypeEnv") -> "TypeEnv | None":
        """Multiset difference, or None when ``other`` is not contained."""
        diff = self._bag.copy()
        diff.subtract(other._bag)
        if any(v < 0 for v in diff.values()):
            return None
        return TypeEnv(diff.elements())

    def identifiers(self) -> set[Key]:
        return {u for (u, _), n in self._bag.items() if n > 0}

    def types_of(self, u: Key) -> list[Type]:
        return sorted((t for (v, t) in self._bag.elements() if v == u), key=str)

    def restrict(self, keep) -> "TypeEnv":
        return TypeEnv((u, t) for (u, t) in self._bag.elements() if u in keep)

    def is_partial_map(self) -> bool:
        seen = set()
        for u, _ in self._bag.elements():
            if u in seen:
                return False
            seen.add(u)
        return True

    def as_map(self) -> dict[Key, Type]:
        if not self.is_partial_map():
            raise ValueError("environment is not a partial map")
        return {u: t for u, t in self._bag.elements()}

    def __str__(self) -> str:
        return ", ".join(f"{u} : {t}" for u, t in self.entries())

    def __repr__(self) -> str:
        return f"TypeEnv({{{self}}})"
