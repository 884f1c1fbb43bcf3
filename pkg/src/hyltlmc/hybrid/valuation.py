"""Valuations: finite maps from variable names to reals."""

from __future__ import annotations

from collections.abc import Mapping
from typing import Iterable, Iterator

from ..errors import ModelError


class Valuation(Mapping):
    """Immutable map from variable names to float values.

    Supports the two structural operations the composition semantics needs:
    restriction to a name set and union of compatible valuations (union is
    defined only when the shared names carry equal values).
    """

    __slots__ = ("_data",)

    def __init__(self, data: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        object.__setattr__(self, "_data", dict(data))

    def __getitem__(self, name: str) -> float:
        return self._data[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        return hash(frozenset(self._data.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._data.items()))
        return f"Valuation({inner})"

    @property
    def names(self) -> frozenset[str]:
        return frozenset(self._data)

    def restrict(self, names: Iterable[str]) -> "Valuation":
        keep = set(names)
        return Valuation({k: v for k, v in self._data.items() if k in keep})

    def union(self, other: "Valuation") -> "Valuation":
        for k in self._data.keys() & other._data.keys():
            if self._data[k] != other._data[k]:
                raise ModelError(
                    f"incompatible valuations: '{k}' is {self._data[k]} vs {other._data[k]}"
                )
        merged = dict(self._data)
        merged.update(other._data)
        return Valuation(merged)
