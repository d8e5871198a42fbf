"""Finite integer domains as immutable sorted interval sets."""

from __future__ import annotations

from typing import Iterable, Iterator

from . import kernels
from .errors import EmptyDomainError


class Domain:
    """An ordered finite set of integers, stored as disjoint inclusive
    intervals. Immutable and hashable; the empty domain means failure."""

    __slots__ = ("ivs",)

    def __init__(self, intervals: Iterable[tuple[int, int]] = ()):
        object.__setattr__(self, "ivs", kernels.normalize(tuple(intervals)))

    def __setattr__(self, name, value):
        raise AttributeError("Domain is immutable")

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Domain":
        return cls(((lo, hi),))

    @classmethod
    def of(cls, *values: int) -> "Domain":
        return cls((v, v) for v in values)

    @classmethod
    def boolean(cls) -> "Domain":
        return cls(((0, 1),))

    @classmethod
    def _wrap(cls, ivs: tuple) -> "Domain":
        d = cls.__new__(cls)
        object.__setattr__(d, "ivs", ivs)
        return d

    @property
    def is_empty(self) -> bool:
        return not self.ivs

    @property
    def lb(self) -> int:
        if not self.ivs:
            raise EmptyDomainError("empty domain has no bounds")
        return self.ivs[0][0]

    @property
    def ub(self) -> int:
        if not self.ivs:
            raise EmptyDomainError("empty domain has no bounds")
        return self.ivs[-1][1]

    @property
    def size(self) -> int:
        return kernels.count_values(self.ivs)

    @property
    def is_singleton(self) -> bool:
        return len(self.ivs) == 1 and self.ivs[0][0] == self.ivs[0][1]

    @property
    def value(self) -> int:
        """The single value of a singleton domain."""
        if not self.is_singleton:
            raise ValueError(f"domain {self} is not a singleton")
        return self.ivs[0][0]

    def __contains__(self, v: int) -> bool:
        return kernels.contains(self.ivs, v)

    def intersect(self, other: "Domain") -> "Domain":
        return Domain._wrap(kernels.intersect(self.ivs, other.ivs))

    def clip(self, lo: int, hi: int) -> "Domain":
        return Domain._wrap(kernels.clip(self.ivs, lo, hi))

    def remove(self, v: int) -> "Domain":
        return Domain._wrap(kernels.remove_value(self.ivs, v))

    def union(self, other: "Domain") -> "Domain":
        return Domain(self.ivs + other.ivs)

    def values(self) -> Iterator[int]:
        for lo, hi in self.ivs:
            yield from range(lo, hi + 1)

    def __iter__(self) -> Iterator[int]:
        return self.values()

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.ivs == other.ivs

    def __hash__(self) -> int:
        return hash(self.ivs)

    def __repr__(self) -> str:
        if not self.ivs:
            return "Domain(empty)"
        parts = (f"{lo}" if lo == hi else f"{lo}..{hi}" for lo, hi in self.ivs)
        return "Domain({%s})" % ", ".join(parts)
