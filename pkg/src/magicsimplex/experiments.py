"""Monte Carlo experiments: relative volumes, class shares, detector overlap,
coordinate-projection exports, and the subgroup-concentration probe.

All experiments are deterministic given (seed, config); reports embed both.
Wall-clock time is printed to the console but kept out of the serialized
reports so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .classify import BOUND, ENT_CRITERIA, ClassificationRecord, ClassifierConfig, Resources, classify_batch, summarize
from .detectors import ppt_min_eigenvalues
from .iotools import config_fingerprint
from .states import (
    BellDiagonalState,
    in_enclosure_array,
    purity,
    sample_enclosure_array,
    sample_simplex_array,
)
from .weyl import enumerate_cosets


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n else 0.0


@dataclass
class VolumeReport:
    d: int
    n_samples: int
    seed: int
    share_enclosure: float
    stderr_enclosure: float
    share_ppt: float
    stderr_ppt: float
    share_ppt_in_enclosure: float
    stderr_ppt_in_enclosure: float
    wall_time_s: float
    config_fingerprint: str

    def to_payload(self) -> dict:
        """Serialized report; wall time is intentionally excluded (determinism)."""
        return {
            "d": self.d,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "share_enclosure": self.share_enclosure,
            "stderr_enclosure": self.stderr_enclosure,
            "share_ppt": self.share_ppt,
            "stderr_ppt": self.stderr_ppt,
            "share_ppt_in_enclosure": self.share_ppt_in_enclosure,
            "stderr_ppt_in_enclosure": self.stderr_ppt_in_enclosure,
            "config_fingerprint": self.config_fingerprint,
        }


def estimate_volumes(d: int, n: int, seed: int) -> VolumeReport:
    """Sample n uniform simplex states; report enclosure and PPT shares."""
    if n < 1000:
        raise ValueError("n must be at least 10^3 for a meaningful estimate")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    in_enc = 0
    ppt = 0
    ppt_in_enc = 0
    chunk = 20_000
    remaining = n
    while remaining > 0:
        take = min(chunk, remaining)
        c = sample_simplex_array(d, take, rng)
        enc_mask = in_enclosure_array(c, d)
        ppt_mask = ppt_min_eigenvalues(c, d) >= -1e-10
        in_enc += int(enc_mask.sum())
        ppt += int(ppt_mask.sum())
        ppt_in_enc += int((enc_mask & ppt_mask).sum())
        remaining -= take
    p_enc = in_enc / n
    p_ppt = ppt / n
    p_cond = ppt_in_enc / in_enc if in_enc else 0.0
    return VolumeReport(
        d=d,
        n_samples=n,
        seed=seed,
        share_enclosure=p_enc,
        stderr_enclosure=binomial_stderr(p_enc, n),
        share_ppt=p_ppt,
        stderr_ppt=binomial_stderr(p_ppt, n),
        share_ppt_in_enclosure=p_cond,
        stderr_ppt_in_enclosure=binomial_stderr(p_cond, in_enc),
        wall_time_s=time.perf_counter() - started,
        config_fingerprint=config_fingerprint({"d": d, "n": n, "seed": seed}),
    )


def class_share_experiment(
    d: int,
    n: int,
    resources: Resources,
    seed: int,
    cfg: ClassifierConfig | None = None,
) -> tuple[list[ClassificationRecord], dict]:
    """Classify n uniform enclosure-polytope samples; PPT-conditional shares."""
    rng = np.random.default_rng(seed)
    rows, proposed = sample_enclosure_array(d, n, rng)
    states = [BellDiagonalState(d, row, id=str(i)) for i, row in enumerate(rows)]
    records = classify_batch(states, resources, cfg)
    summary = summarize(
        records,
        extra={
            "d": d,
            "seed": seed,
            "n_proposed": proposed,
            "resources": {
                "witnesses": len(resources.bank),
                "vertices": len(resources.vertex_set) if resources.vertex_set else 0,
                "group": len(resources.group) if resources.group else 0,
            },
        },
    )
    return records, summary


@dataclass
class OverlapMatrix:
    criteria: tuple[str, ...]
    exclusive: dict  # pair -> (only first, only second)
    joint: dict  # pair -> both
    detected_counts: dict  # criterion -> total detections on BOUND states
    purity_stats: dict  # criterion -> {min, mean} purity of detected states
    n_bound: int

    def to_payload(self) -> dict:
        return {
            "criteria": list(self.criteria),
            "n_bound": self.n_bound,
            "detected_counts": self.detected_counts,
            "pairs": {
                f"{a}|{b}": {
                    "only_first": self.exclusive[(a, b)][0],
                    "only_second": self.exclusive[(a, b)][1],
                    "joint": self.joint[(a, b)],
                }
                for a, b in combinations(self.criteria, 2)
            },
            "purity": self.purity_stats,
        }


def detector_overlap(records: list[ClassificationRecord]) -> OverlapMatrix:
    """Pairwise exclusive / joint detections among E2-E5 on BOUND states."""
    bound = [r for r in records if r.label == BOUND]
    fired = {crit: np.array([r.fired(crit) for r in bound], dtype=bool) for crit in ENT_CRITERIA}
    exclusive = {}
    joint = {}
    for a, b in combinations(ENT_CRITERIA, 2):
        joint[(a, b)] = int((fired[a] & fired[b]).sum())
        exclusive[(a, b)] = (
            int((fired[a] & ~fired[b]).sum()),
            int((~fired[a] & fired[b]).sum()),
        )
    purities = (
        purity(np.array([r.state.c for r in bound])) if bound else np.zeros(0)
    )
    purity_stats = {}
    for crit in ENT_CRITERIA:
        mask = fired[crit]
        if mask.any():
            purity_stats[crit] = {
                "min": float(purities[mask].min()),
                "mean": float(purities[mask].mean()),
            }
        else:
            purity_stats[crit] = {"min": None, "mean": None}
    return OverlapMatrix(
        criteria=ENT_CRITERIA,
        exclusive=exclusive,
        joint=joint,
        detected_counts={c: int(fired[c].sum()) for c in ENT_CRITERIA},
        purity_stats=purity_stats,
        n_bound=len(bound),
    )


def export_scatter(
    records: list[ClassificationRecord],
    coords: tuple[int, int, int, int],
    path: str | Path,
) -> None:
    """CSV of four selected simplex coordinates plus the class label.

    Three coordinates are meant for spatial axes and the fourth for color,
    matching the coordinate-projection visualizations; any plotting tool can
    consume the file.
    """
    if len(coords) != 4 or len(set(coords)) != 4:
        raise ValueError("need four distinct coordinate indices")
    if records:
        m = records[0].state.d ** 2
        if any(not 0 <= i < m for i in coords):
            raise ValueError(f"coordinate indices must lie in [0, {m})")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "color", "label"])
        for rec in records:
            c = rec.state.c
            writer.writerow(
                [repr(float(c[i])) for i in coords] + [rec.label]
            )


def coset_mass_matrix(d: int) -> np.ndarray:
    """(n_cosets, d^2) indicator rows used for subgroup concentration."""
    cosets = enumerate_cosets(d)
    mat = np.zeros((len(cosets), d * d))
    for i, coset in enumerate(cosets):
        mat[i, list(coset.flat_indices())] = 1.0
    return mat


def conjecture_probe(records: list[ClassificationRecord], path: str | Path) -> None:
    """Per-state scatter data for the subgroup-concentration conjecture.

    Emits the max-norm distance from the uniform mixture and the largest
    total probability carried by a single coset; together with the label
    these probe whether separability tracks closeness to the center or
    concentration on one subgroup structure.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["linf_from_center", "max_coset_mass", "label"])
        if not records:
            return
        d = records[0].state.d
        mass = coset_mass_matrix(d)
        c = np.array([r.state.c for r in records])
        dist = np.abs(c - 1.0 / (d * d)).max(axis=1)
        conc = (c @ mass.T).max(axis=1)
        for rec, x, y in zip(records, dist, conc):
            writer.writerow([repr(float(x)), repr(float(y)), rec.label])
