"""Entanglement-class-preserving symmetries as index permutations.

The generators act on the phase-space indices (k, l), arithmetic mod d:

- momentum inversion  m: (k, l) -> (-k, l)
- quarter rotation    r: (k, l) -> (l, -k)
- vertical sheer      v: (k, l) -> (k+l, l)
- translations     t_pq: (k, l) -> (k+p, l+q)

The generated group has exactly 24 / 432 / 1536 elements for d = 2 / 3 / 4
(translations semidirect the GL(2, Z_d) part generated by m, r, v).  Elements
are stored as flat permutations of {0, ..., d^2-1}: exact integer arithmetic,
no float drift, O(d^2) application.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .states import BellDiagonalState

_group_cache: dict[int, list["SymmetryPermutation"]] = {}


@dataclass(frozen=True, eq=False)
class SymmetryPermutation:
    """A bijection on flat (k,l) indices; ``perm[i]`` is the image of i."""

    d: int
    perm: np.ndarray
    label: str = ""

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.d * self.d)):
            raise ValueError("not a permutation of the index range")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    def key(self) -> bytes:
        return self.perm.tobytes()

    def compose(self, other: "SymmetryPermutation") -> "SymmetryPermutation":
        """self after other: i -> self.perm[other.perm[i]]."""
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        return SymmetryPermutation(self.d, self.perm[other.perm], self.label + other.label)

    def inverse(self) -> "SymmetryPermutation":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return SymmetryPermutation(self.d, inv, f"({self.label})^-1")


def _from_index_map(d: int, fn, label: str) -> SymmetryPermutation:
    perm = np.zeros(d * d, dtype=np.int64)
    for k in range(d):
        for l in range(d):
            kk, ll = fn(k, l)
            perm[k * d + l] = (kk % d) * d + (ll % d)
    return SymmetryPermutation(d, perm, label)


def generators(d: int) -> list[SymmetryPermutation]:
    """m, r, v and all translations t_pq (t_00 is the identity)."""
    gens = [
        _from_index_map(d, lambda k, l: (-k, l), "m"),
        _from_index_map(d, lambda k, l: (l, -k), "r"),
        _from_index_map(d, lambda k, l: (k + l, l), "v"),
    ]
    for p, q in product(range(d), repeat=2):
        gens.append(_from_index_map(d, lambda k, l, p=p, q=q: (k + p, l + q), f"t{p}{q}"))
    return gens


def generate_group(d: int) -> list[SymmetryPermutation]:
    """Closure of the generators under composition, deterministically ordered.

    Breadth-first multiplication until no new elements appear; the result is
    cached per dimension (24 permutations of 4 indices for d=2 up to 1536
    permutations of 16 indices for d=4 -- trivially small).
    """
    if d in _group_cache:
        return _group_cache[d]
    gens = generators(d)
    els: dict[bytes, SymmetryPermutation] = {g.key(): g for g in gens}
    boundary = list(els.values())
    while boundary:
        fresh = []
        for a in gens:
            for b in boundary:
                c = a.compose(b)
                if c.key() not in els:
                    els[c.key()] = c
                    fresh.append(c)
        boundary = fresh
    group = sorted(els.values(), key=lambda s: tuple(s.perm))
    _group_cache[d] = group
    return group


def apply(sym: SymmetryPermutation, s: BellDiagonalState) -> BellDiagonalState:
    """Permute the coordinates: c'[perm[i]] = c[i]."""
    if sym.d != s.d:
        raise ValueError("dimension mismatch between symmetry and state")
    c = np.empty_like(s.c)
    c[sym.perm] = s.c
    return BellDiagonalState(s.d, c)


def apply_to_array(sym: SymmetryPermutation, c: np.ndarray) -> np.ndarray:
    out = np.empty_like(c)
    out[..., sym.perm] = c
    return out


def orbit_array(c: np.ndarray, group: list[SymmetryPermutation]) -> np.ndarray:
    """Deduplicated orbit of one coordinate vector, one image per row.

    Rows appear in the order group elements first produce them; duplicates are
    dropped via coordinate fingerprints rounded to 12 decimals.
    """
    seen: set[bytes] = set()
    rows = []
    for sym in group:
        img = np.empty_like(c)
        img[sym.perm] = c
        key = np.round(img, 12).tobytes()
        if key not in seen:
            seen.add(key)
            rows.append(img)
    return np.array(rows)


def orbit(s: BellDiagonalState, group: list[SymmetryPermutation]) -> list[BellDiagonalState]:
    return [BellDiagonalState(s.d, row) for row in orbit_array(s.c, group)]


def save_group(path: str | Path, d: int, group: list[SymmetryPermutation]) -> None:
    payload = {"d": d, "perms": [g.perm.tolist() for g in group]}
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_group(path: str | Path) -> list[SymmetryPermutation]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    d = int(payload["d"])
    return [SymmetryPermutation(d, np.array(p, dtype=np.int64)) for p in payload["perms"]]
