"""Named parameter arrays with group tags, plus embedding initialization.

Groups partition parameters into shared embedding tables ("shared"),
generator-only ("generator"), and discriminator-only ("discriminator")
sets. Per-parameter flags mark tables that are exempt from critic weight
clipping and tables whose rows are kept at unit L2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

GROUPS = ("shared", "generator", "discriminator")

ENTITY_TABLE = "entities"
RELATION_TABLE = "relations"


@dataclass
class ParamInfo:
    group: str
    clip: bool = True
    unit_rows: bool = False


class ParamStore:
    """Dense named arrays; float32 by default, float64 for verification runs."""

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self._arrays: dict[str, np.ndarray] = {}
        self._info: dict[str, ParamInfo] = {}

    def add(self, name: str, value: np.ndarray, group: str, clip: bool = True,
            unit_rows: bool = False) -> np.ndarray:
        if group not in GROUPS:
            raise ValueError(f"unknown parameter group {group!r}")
        if name in self._arrays:
            raise ValueError(f"parameter {name!r} already registered")
        arr = np.ascontiguousarray(value, dtype=self.dtype)
        self._arrays[name] = arr
        self._info[name] = ParamInfo(group=group, clip=clip, unit_rows=unit_rows)
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, value: np.ndarray):
        cur = self._arrays[name]
        arr = np.asarray(value, dtype=self.dtype)
        if arr.shape != cur.shape:
            raise ValueError(f"shape mismatch for {name!r}: {arr.shape} vs {cur.shape}")
        cur[...] = arr

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def names(self, groups: str | Iterable[str] | None = None) -> list[str]:
        if groups is None:
            return list(self._arrays)
        if isinstance(groups, str):
            groups = (groups,)
        wanted = set(groups)
        return [n for n, info in self._info.items() if info.group in wanted]

    def info(self, name: str) -> ParamInfo:
        return self._info[name]

    def group_of(self, name: str) -> str:
        return self._info[name].group

    def clippable(self, groups: str | Iterable[str]) -> list[str]:
        if isinstance(groups, str):
            groups = (groups,)
        wanted = set(groups)
        return [n for n, info in self._info.items()
                if info.group in wanted and info.clip]

    def renorm_unit_rows(self, groups: str | Iterable[str]):
        """Rescale each row of unit-constrained tables in the groups to norm 1."""
        if isinstance(groups, str):
            groups = (groups,)
        wanted = set(groups)
        for name, info in self._info.items():
            if info.unit_rows and info.group in wanted:
                arr = self._arrays[name]
                norms = np.sqrt(np.einsum("ij,ij->i", arr.astype(np.float64),
                                          arr.astype(np.float64)))
                norms[norms == 0] = 1.0
                arr /= norms[:, None].astype(self.dtype)

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(self._arrays)


def _unit_rows(arr: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", arr.astype(np.float64), arr.astype(np.float64)))
    norms[norms == 0] = 1.0
    return (arr / norms[:, None]).astype(arr.dtype)


def init_embeddings(n: int, m: int, k: int, rng: np.random.Generator,
                    dtype=np.float32) -> ParamStore:
    """Shared entity (n, k) and relation (m, k) tables.

    Rows are drawn uniformly from [-6/sqrt(k), 6/sqrt(k)] and rescaled to
    unit L2 norm.
    """
    if n < 1 or m < 1 or k < 1:
        raise ValueError(f"n, m, k must be positive, got {n}, {m}, {k}")
    store = ParamStore(dtype=dtype)
    bound = 6.0 / np.sqrt(k)
    ents = rng.uniform(-bound, bound, size=(n, k)).astype(dtype)
    rels = rng.uniform(-bound, bound, size=(m, k)).astype(dtype)
    store.add(ENTITY_TABLE, _unit_rows(ents), group="shared")
    store.add(RELATION_TABLE, _unit_rows(rels), group="shared")
    return store
