"""Bell-diagonal entanglement witnesses with optimization-certified bounds.

A witness is a coefficient vector kappa in [-1, 1]^(d^2); its expectation on a
Bell-diagonal state is the plain scalar product c . kappa.  The separable
interval [L, U] is the range of <a (x) b| W |a (x) b> over pure product states,
estimated by multi-start alternating eigenvector ascent: for fixed b the
objective is a Hermitian quadratic form in a (and vice versa), so each half
step is solved exactly by an extremal eigenvector.  Every step is monotone,
which in practice converges in a few sweeps per start.

Numerical optimization approaches the true extrema from inside, so a missed
optimum risks a false entanglement verdict.  Mitigations: many restarts, the
safety margin widening [L, U], and the kernel-polytope soundness suite run by
the tests.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .seesaw import extremal_product_state
from .states import BellDiagonalState
from .weyl import projector_stack


class CertificationError(RuntimeError):
    """Bound optimization failed to stabilize within the restart budget."""


@dataclass
class WitnessConfig:
    restarts: int | None = None  # None -> 64 * d
    max_sweeps: int = 60
    f_tol: float = 1e-10  # per-sweep objective delta; dwarfed by the margin
    margin: float = 1e-6  # widens the certified interval on both sides
    max_draws: int = 20  # redraws allowed in random_witness


@dataclass(frozen=True, eq=False)
class EntanglementWitness:
    d: int
    kappa: np.ndarray
    lower: float
    upper: float
    id: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        kappa = np.array(self.kappa, dtype=float)
        if kappa.shape != (self.d * self.d,):
            raise ValueError("kappa must have d^2 entries")
        if np.abs(kappa).max() > 1.0 + 1e-12:
            raise ValueError("kappa entries must lie in [-1, 1]")
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)


def witness_id(d: int, kappa: np.ndarray) -> str:
    """Stable id: hash of the dimension and kappa rounded to 12 decimals."""
    payload = f"{d}:" + ",".join(f"{x:.12f}" for x in np.round(kappa, 12) + 0.0)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def witness_value(w: EntanglementWitness, s: BellDiagonalState) -> float:
    if w.d != s.d:
        raise ValueError("dimension mismatch between witness and state")
    return float(s.c @ w.kappa)


def detects(w: EntanglementWitness, value: float) -> bool:
    return value < w.lower or value > w.upper


# --- bound certification ------------------------------------------------------


def certify_bounds(
    kappa: np.ndarray,
    d: int,
    cfg: WitnessConfig | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[float, float, dict]:
    """Estimate the separable interval of the witness, widened by the margin.

    Returns ``(lower, upper, info)`` where info carries the raw optimization
    extrema, convergence flags, and the restart budget used.
    """
    cfg = cfg or WitnessConfig()
    rng = rng if rng is not None else np.random.default_rng()
    kappa = np.asarray(kappa, dtype=float)
    restarts = cfg.restarts if cfg.restarts is not None else 64 * d
    w4 = np.tensordot(kappa, projector_stack(d), axes=1).reshape(d, d, d, d)
    upper_raw, _, _, up_ok = extremal_product_state(
        w4, d, +1, restarts, rng, cfg.max_sweeps, cfg.f_tol
    )
    lower_raw, _, _, lo_ok = extremal_product_state(
        w4, d, -1, restarts, rng, cfg.max_sweeps, cfg.f_tol
    )
    info = {
        "raw_lower": lower_raw,
        "raw_upper": upper_raw,
        "converged": bool(up_ok and lo_ok),
        "restarts": restarts,
        "margin": cfg.margin,
    }
    return lower_raw - cfg.margin, upper_raw + cfg.margin, info


def random_witness(
    d: int,
    rng: np.random.Generator,
    cfg: WitnessConfig | None = None,
    seed_note: int | None = None,
) -> EntanglementWitness:
    """Draw kappa uniform on [-1, 1]^(d^2) and certify; redraw on failure."""
    cfg = cfg or WitnessConfig()
    for _ in range(cfg.max_draws):
        kappa = rng.uniform(-1.0, 1.0, size=d * d)
        lower, upper, info = certify_bounds(kappa, d, cfg, rng)
        if not info["converged"]:
            continue  # discard and redraw
        meta = {"restarts": info["restarts"], "margin": info["margin"]}
        if seed_note is not None:
            meta["seed"] = seed_note
        return EntanglementWitness(d, kappa, lower, upper, witness_id(d, kappa), meta)
    raise CertificationError(f"no certifiable witness after {cfg.max_draws} draws")


def forge_bank(
    d: int,
    count: int,
    rng: np.random.Generator,
    cfg: WitnessConfig | None = None,
    seed_note: int | None = None,
) -> list[EntanglementWitness]:
    return [random_witness(d, rng, cfg, seed_note=seed_note) for _ in range(count)]


# --- bank application ---------------------------------------------------------


def bank_arrays(bank: list[EntanglementWitness]) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    """Id-sorted views of a bank: (ids, kappa matrix, lower, upper)."""
    order = sorted(range(len(bank)), key=lambda i: bank[i].id)
    ids = [bank[i].id for i in order]
    kappas = np.array([bank[i].kappa for i in order]) if bank else np.zeros((0, 0))
    lower = np.array([bank[i].lower for i in order])
    upper = np.array([bank[i].upper for i in order])
    return ids, kappas, lower, upper


def bank_check(bank: list[EntanglementWitness], s: BellDiagonalState) -> str | None:
    """Id of the first witness (id-sorted scan) whose interval excludes c.kappa."""
    if not bank:
        return None
    if any(w.d != s.d for w in bank):
        raise ValueError("bank dimension does not match the state")
    ids, kappas, lower, upper = bank_arrays(bank)
    values = kappas @ s.c
    hits = np.nonzero((values < lower) | (values > upper))[0]
    return ids[hits[0]] if len(hits) else None


def permute_kappa(perm: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    """Image of a witness under an index permutation: kappa'[perm[i]] = kappa[i]."""
    out = np.empty_like(kappa)
    out[perm] = kappa
    return out


# --- persistence ----------------------------------------------------------------


def save_bank(path: str | Path, bank: list[EntanglementWitness]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w in bank:
            rec = {
                "id": w.id,
                "d": w.d,
                "kappa": [float(x) for x in w.kappa],
                "lower": w.lower,
                "upper": w.upper,
                "meta": w.meta,
            }
            fh.write(json.dumps(rec) + "\n")


def load_bank(path: str | Path) -> list[EntanglementWitness]:
    bank = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            bank.append(
                EntanglementWitness(
                    int(rec["d"]),
                    np.array(rec["kappa"]),
                    float(rec["lower"]),
                    float(rec["upper"]),
                    rec["id"],
                    rec.get("meta", {}),
                )
            )
    return bank
