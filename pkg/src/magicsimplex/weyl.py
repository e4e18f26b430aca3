"""Weyl operators, Bell projectors, and the discrete phase-space lattice.

Index conventions (fixed project-wide):

- ``w = exp(2*pi*i/d)``; the shift-and-phase operator ``W(k, l)`` has entry
  ``w**(j*k)`` at position ``(j, (j+l) % d)`` and zeros elsewhere.
- Bipartite kron: the row index of ``A (x) B`` is ``i*d + k`` with ``i``
  indexing A and ``k`` indexing B (numpy ``kron`` order).
- Partial transpose maps entry ``[(i,k),(j,l)]`` to ``[(i,l),(j,k)]``;
  realignment maps it to ``[(i,j),(k,l)]``.

All matrices are dense complex128; algebraic identities hold to ``ATOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

ATOL = 1e-12

LINE = "LINE"
SUBLATTICE = "SUBLATTICE"


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")


def _check_index(d: int, k: int, l: int) -> None:
    if not (0 <= k < d and 0 <= l < d):
        raise ValueError(f"phase-space index ({k},{l}) out of range for d={d}")


def weyl_operator(d: int, k: int, l: int) -> np.ndarray:
    """d x d unitary with entry w^(j*k) at (j, (j+l) mod d)."""
    _check_dim(d)
    _check_index(d, k, l)
    j = np.arange(d)
    mat = np.zeros((d, d), dtype=complex)
    # reduce the exponent mod d before exponentiating to keep phases exact
    mat[j, (j + l) % d] = np.exp(2j * np.pi * ((j * k) % d) / d)
    return mat


def bell_state(d: int, k: int, l: int) -> np.ndarray:
    """Maximally entangled vector (W(k,l) (x) 1) applied to (1/sqrt d) sum_i |ii>."""
    # component at (a, b) is W[a, b]/sqrt(d); row-major flatten matches kron order
    return weyl_operator(d, k, l).reshape(-1) / math.sqrt(d)


def bell_projector(d: int, k: int, l: int) -> np.ndarray:
    """Rank-1 projector onto the (k,l) Bell state; d^2 x d^2."""
    omega = bell_state(d, k, l)
    return np.outer(omega, omega.conj())


@lru_cache(maxsize=None)
def bell_state_matrix(d: int) -> np.ndarray:
    """(d^2, d^2) array whose row k*d+l is the Bell state vector for (k,l)."""
    _check_dim(d)
    rows = [bell_state(d, k, l) for k in range(d) for l in range(d)]
    out = np.array(rows)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def projector_stack(d: int) -> np.ndarray:
    """(d^2, d^2, d^2) stack of Bell projectors, indexed by flat (k,l)."""
    omegas = bell_state_matrix(d)
    stack = np.einsum("ni,nj->nij", omegas, omegas.conj())
    stack.setflags(write=False)
    return stack


def partial_transpose(rho: np.ndarray, d: int) -> np.ndarray:
    """Partial transpose over the second subsystem."""
    return rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def realignment(rho: np.ndarray, d: int) -> np.ndarray:
    """Realigned matrix: entry [(i,j),(k,l)] = rho[(i,k),(j,l)]."""
    return rho.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def partial_trace(rho: np.ndarray, d: int, subsystem: int) -> np.ndarray:
    """Trace out one subsystem (0 = first, 1 = second) of a d^2 x d^2 matrix."""
    rho4 = rho.reshape(d, d, d, d)
    if subsystem == 0:
        return np.einsum("ikil->kl", rho4)
    if subsystem == 1:
        return np.einsum("ikjk->ij", rho4)
    raise ValueError("subsystem must be 0 or 1")


def point_order(p: tuple[int, int], d: int) -> int:
    """Additive order of (k, l) in Z_d x Z_d."""
    k, l = p
    return d // math.gcd(d, math.gcd(k, l))


@dataclass(frozen=True)
class PhaseSubgroup:
    """An order-d subgroup (or coset) of the (k,l) index lattice Z_d x Z_d."""

    d: int
    points: tuple[tuple[int, int], ...]  # sorted lexicographically
    kind: str  # LINE (cyclic) or SUBLATTICE (non-cyclic)
    is_coset: bool = False
    shift: tuple[int, int] = (0, 0)

    def flat_indices(self) -> tuple[int, ...]:
        return tuple(k * self.d + l for k, l in self.points)

    def translated(self, p: int, q: int) -> "PhaseSubgroup":
        d = self.d
        pts = tuple(sorted(((k + p) % d, (l + q) % d) for k, l in self.points))
        is_coset = (0, 0) not in pts
        return PhaseSubgroup(d, pts, self.kind, is_coset=is_coset, shift=(p % d, q % d))


def enumerate_order_d_subgroups(d: int) -> list[PhaseSubgroup]:
    """All distinct order-d subgroups of Z_d x Z_d, lexicographically ordered.

    Every subgroup of a 2-generated abelian group is generated by at most two
    elements, so scanning generator pairs is exhaustive.  O(d^6) worst case,
    fine for the target d <= 10.
    """
    _check_dim(d)
    pts = [(k, l) for k in range(d) for l in range(d)]
    seen: dict[tuple, PhaseSubgroup] = {}
    for i, g1 in enumerate(pts):
        for g2 in pts[i:]:
            group = {
                ((a * g1[0] + b * g2[0]) % d, (a * g1[1] + b * g2[1]) % d)
                for a in range(d)
                for b in range(d)
            }
            if len(group) != d:
                continue
            key = tuple(sorted(group))
            if key in seen:
                continue
            cyclic = any(point_order(p, d) == d for p in group)
            seen[key] = PhaseSubgroup(d, key, LINE if cyclic else SUBLATTICE)
    return [seen[k] for k in sorted(seen)]


def enumerate_cosets(d: int) -> list[PhaseSubgroup]:
    """All distinct cosets (subgroups included) of all order-d subgroups."""
    out: dict[tuple, PhaseSubgroup] = {}
    for sub in enumerate_order_d_subgroups(d):
        for p, q in product(range(d), repeat=2):
            coset = sub.translated(p, q)
            out.setdefault(coset.points, coset)
    return [out[k] for k in sorted(out)]
