"""Bell-diagonal states as simplex coordinates, samplers, and polytope tests.

A state is fully described by its d^2 mixing probabilities ``c``, flat-indexed
as ``k*d + l``.  The uniform mixture sits at the barycenter; the enclosure
polytope is the box-truncated simplex ``max(c) <= 1/d``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .weyl import PhaseSubgroup, bell_state_matrix, enumerate_cosets, projector_stack

EPS_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class BellDiagonalState:
    """Probability vector over the d^2 Bell projectors."""

    d: int
    c: np.ndarray
    id: str | None = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float)  # copy: value semantics, callers keep theirs
        if c.shape != (self.d * self.d,):
            raise ValueError(f"expected {self.d * self.d} coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        if c.min() < -EPS_NORM:
            raise ValueError(f"negative mixing probability {c.min()}")
        if abs(c.sum() - 1.0) > 1e-12:
            raise ValueError(f"coordinates sum to {c.sum()}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def coordinate(self, k: int, l: int) -> float:
        return float(self.c[k * self.d + l])


def uniform_state(d: int) -> BellDiagonalState:
    """The maximally mixed state, c = 1/d^2 everywhere."""
    return BellDiagonalState(d, np.full(d * d, 1.0 / (d * d)))


def indicator_state(d: int, k: int, l: int) -> BellDiagonalState:
    """The pure Bell projector at (k, l)."""
    c = np.zeros(d * d)
    c[k * d + l] = 1.0
    return BellDiagonalState(d, c)


def density_matrix(s: BellDiagonalState) -> np.ndarray:
    """Assemble the d^2 x d^2 density matrix sum_kl c_kl P_kl."""
    return np.tensordot(s.c, projector_stack(s.d), axes=1)


def bell_coordinates(rho: np.ndarray, d: int) -> np.ndarray:
    """Read back c_kl = <Omega_kl| rho |Omega_kl> from a density matrix."""
    omegas = bell_state_matrix(d)
    return np.einsum("ni,ij,nj->n", omegas.conj(), rho, omegas).real


def sample_simplex_array(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n uniform draws from the (d^2-1)-simplex, one state per row."""
    return rng.dirichlet(np.ones(d * d), size=n)


def sample_simplex(d: int, rng: np.random.Generator) -> BellDiagonalState:
    """One uniform draw from the magic simplex."""
    return BellDiagonalState(d, sample_simplex_array(d, 1, rng)[0])


def in_enclosure_array(c: np.ndarray, d: int) -> np.ndarray:
    """Boundary-inclusive membership test, vectorized over rows."""
    return np.asarray(c).max(axis=-1) <= 1.0 / d + 1e-12


def in_enclosure(s: BellDiagonalState) -> bool:
    return bool(in_enclosure_array(s.c, s.d))


def sample_enclosure_array(
    d: int, n: int, rng: np.random.Generator, chunk: int = 4096
) -> tuple[np.ndarray, int]:
    """n uniform draws from the enclosure polytope, by simplex rejection.

    Returns ``(samples, n_proposed)``; ``n / n_proposed`` estimates the
    relative volume of the enclosure polytope in the simplex.
    """
    accepted: list[np.ndarray] = []
    total = 0
    proposed = 0
    while total < n:
        batch = sample_simplex_array(d, chunk, rng)
        proposed += chunk
        keep = batch[in_enclosure_array(batch, d)]
        accepted.append(keep)
        total += len(keep)
    samples = np.concatenate(accepted)[:n]
    return samples, proposed


def sample_enclosure(d: int, rng: np.random.Generator) -> BellDiagonalState:
    """One uniform draw from the enclosure polytope."""
    while True:
        c = sample_simplex_array(d, 1, rng)[0]
        if in_enclosure_array(c, d):
            return BellDiagonalState(d, c)


@dataclass(frozen=True)
class KernelVertex:
    """Equal mixture of the d Bell states on one coset of the index lattice."""

    subgroup: PhaseSubgroup
    state: BellDiagonalState


def kernel_state(subgroup: PhaseSubgroup) -> BellDiagonalState:
    d = subgroup.d
    c = np.zeros(d * d)
    c[list(subgroup.flat_indices())] = 1.0 / d
    return BellDiagonalState(d, c)


def kernel_vertices(d: int) -> list[KernelVertex]:
    """One vertex per coset; all are separable by construction."""
    return [KernelVertex(sub, kernel_state(sub)) for sub in enumerate_cosets(d)]


def kernel_vertex_array(d: int) -> np.ndarray:
    """Coordinates of all kernel vertices, one per row."""
    return np.array([v.state.c for v in kernel_vertices(d)])


def write_states(path: str | Path, states: list[BellDiagonalState]) -> None:
    """JSON-lines, one object per state; floats use shortest round-trip repr."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in states:
            rec: dict = {"d": s.d, "c": [float(x) for x in s.c]}
            if s.id is not None:
                rec["id"] = s.id
            fh.write(json.dumps(rec) + "\n")


def read_states(path: str | Path) -> list[BellDiagonalState]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(BellDiagonalState(int(rec["d"]), np.array(rec["c"]), id=rec.get("id")))
    return out


def purity(c: np.ndarray) -> np.ndarray:
    """tr(rho^2) = sum c^2 for Bell-diagonal states; vectorized over rows."""
    c = np.asarray(c)
    return (c * c).sum(axis=-1)


def states_to_array(states: list[BellDiagonalState]) -> np.ndarray:
    if not states:
        raise ValueError("empty state list")
    d = states[0].d
    if any(s.d != d for s in states):
        raise ValueError("states have mixed dimensions")
    return np.array([s.c for s in states])
