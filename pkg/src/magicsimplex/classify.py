"""Combined entanglement classification with an evidence trail.

Label semantics: FREE (NPT, distillable), SEP (certified separable), BOUND
(PPT yet entangled), PPT_UNKNOWN (no criterion decisive).  The pipeline is
ordered cheap to expensive: the exact partial-transpose filter first, then
the closed-form detectors, the separable-hull LP, detector sweeps over the
symmetry orbit, and finally the witness bank.  All state-level diagnostics
are kept in the record so detector shares, overlaps, and the cross-detector
soundness audit can be computed from the output alone.

Conflict policy: if a separability criterion and an entanglement criterion
both fire on one state (or its orbit), the record is labeled PPT_UNKNOWN
with a conflict flag and a warning is emitted; correctness over coverage.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detectors import (
    DEFAULT_MUB_SHIFT,
    EPS_CQP,
    EPS_MUB,
    EPS_PPT,
    EPS_REALIGN,
    EPS_WEYL,
    MubSet,
    mub_sums,
    ppt_min_eigenvalues,
    quasipure_concurrences,
    realignment_sums,
    standard_mubs,
    weyl_representation_sums,
)
from .hull import SeparableVertexSet, hull_membership
from .iotools import config_fingerprint
from .states import BellDiagonalState, states_to_array
from .symmetries import SymmetryPermutation, orbit_array
from .witnesses import EntanglementWitness, bank_arrays

FREE = "FREE"
SEP = "SEP"
BOUND = "BOUND"
PPT_UNKNOWN = "PPT_UNKNOWN"
LABELS = (FREE, SEP, BOUND, PPT_UNKNOWN)

ENT_CRITERIA = ("E2", "E3", "E4", "E5")
SEP_CRITERIA = ("S1", "S2")


@dataclass
class ClassifierConfig:
    use_orbit: bool = True
    orbit_s1_limit: int | None = 48  # hull LPs per orbit; None scans the full orbit
    hull_tol: float = 1e-9

    def fingerprint(self) -> str:
        return config_fingerprint(
            {
                "use_orbit": self.use_orbit,
                "orbit_s1_limit": self.orbit_s1_limit,
                "hull_tol": self.hull_tol,
            }
        )


@dataclass
class Resources:
    """Everything the pipeline may consult; any piece can be absent."""

    d: int
    bank: list[EntanglementWitness] = field(default_factory=list)
    vertex_set: SeparableVertexSet | None = None
    group: list[SymmetryPermutation] | None = None
    mubs: MubSet | None = None
    mub_shift: int | None = None

    def __post_init__(self):
        if self.mubs is None and self.d in DEFAULT_MUB_SHIFT:
            self.mubs = standard_mubs(self.d)
        if self.mub_shift is None and self.d in DEFAULT_MUB_SHIFT:
            self.mub_shift = DEFAULT_MUB_SHIFT[self.d]
        if any(w.d != self.d for w in self.bank):
            raise ValueError("witness bank dimension mismatch")
        if self.vertex_set is not None and self.vertex_set.d != self.d:
            raise ValueError("vertex set dimension mismatch")
        self._bank_arrays = bank_arrays(self.bank) if self.bank else None


@dataclass
class ClassificationRecord:
    state: BellDiagonalState
    label: str
    evidence: list[dict]
    orbit_used: bool = False
    conflict: bool = False
    config_fingerprint: str = ""

    def fired(self, criterion: str) -> bool:
        return any(e.get("criterion") == criterion and e.get("fired") for e in self.evidence)


def _bank_scan(arrays, c_rows: np.ndarray):
    """First (row, witness) violation in row-major, id-sorted order."""
    ids, kappas, lower, upper = arrays
    values = c_rows @ kappas.T  # (rows, witnesses)
    viol = (values < lower) | (values > upper)
    if not viol.any():
        return None
    row, col = np.unravel_index(np.argmax(viol), viol.shape)
    # argmax returns the first True in row-major flat order
    return int(row), ids[int(col)], float(values[row, col])


def classify_batch(
    states: list[BellDiagonalState],
    resources: Resources,
    cfg: ClassifierConfig | None = None,
) -> list[ClassificationRecord]:
    """Classify a homogeneous batch; vectorizes the closed-form detectors."""
    cfg = cfg or ClassifierConfig()
    if not states:
        return []
    c = states_to_array(states)
    d = states[0].d
    if d != resources.d:
        raise ValueError(f"resources are for d={resources.d}, states have d={d}")
    fingerprint = cfg.fingerprint()

    ppt_vals = ppt_min_eigenvalues(c, d)
    e2_vals = realignment_sums(c, d)
    e3_vals = quasipure_concurrences(c, d)
    s2_vals = weyl_representation_sums(c, d)
    e4_vals = (
        mub_sums(c, resources.mubs, resources.mub_shift) if resources.mubs is not None else None
    )

    records = []
    for idx, state in enumerate(states):
        records.append(
            _classify_row(
                state,
                idx,
                d,
                resources,
                cfg,
                fingerprint,
                ppt_vals[idx],
                e2_vals[idx],
                e3_vals[idx],
                s2_vals[idx],
                None if e4_vals is None else e4_vals[idx],
            )
        )
    return records


def classify(
    s: BellDiagonalState, resources: Resources, cfg: ClassifierConfig | None = None
) -> ClassificationRecord:
    return classify_batch([s], resources, cfg)[0]


def _verdict_dict(criterion, fired, value, threshold, **extra) -> dict:
    out = {"criterion": criterion, "fired": bool(fired), "value": float(value),
           "threshold": float(threshold)}
    out.update(extra)
    return out


def _classify_row(
    state, idx, d, resources, cfg, fingerprint, ppt_min, e2, e3, s2, e4
) -> ClassificationRecord:
    evidence = [_verdict_dict("E1", ppt_min < -EPS_PPT, ppt_min, -EPS_PPT)]
    if ppt_min < -EPS_PPT:
        return ClassificationRecord(state, FREE, evidence, config_fingerprint=fingerprint)

    # closed-form detectors on the state itself
    evidence.append(_verdict_dict("S2", s2 <= 2.0 + EPS_WEYL, s2, 2.0 + EPS_WEYL))
    evidence.append(_verdict_dict("E2", e2 > 1.0 + EPS_REALIGN, e2, 1.0 + EPS_REALIGN))
    evidence.append(_verdict_dict("E3", e3 > EPS_CQP, e3, EPS_CQP))
    if e4 is not None:
        evidence.append(_verdict_dict("E4", e4 > 2.0 + EPS_MUB, e4, 2.0 + EPS_MUB))

    if d == 2:
        # PPT fully characterizes separability for qubit pairs
        evidence.append({"criterion": "E1", "rule": "d2_ppt_separable", "fired": False})
        return ClassificationRecord(state, SEP, evidence, config_fingerprint=fingerprint)

    # witness bank and hull on the state
    if resources._bank_arrays is not None:
        hit = _bank_scan(resources._bank_arrays, state.c[None, :])
        evidence.append(
            {"criterion": "E5", "fired": hit is not None}
            | ({"witness_id": hit[1], "value": hit[2]} if hit else {})
        )
    if resources.vertex_set is not None:
        in_hull = hull_membership(resources.vertex_set, state, cfg.hull_tol)
        evidence.append({"criterion": "S1", "fired": bool(in_hull)})

    sep_fired = any(e.get("criterion") in SEP_CRITERIA and e.get("fired") for e in evidence)
    ent_fired = any(e.get("criterion") in ENT_CRITERIA and e.get("fired") for e in evidence)
    if sep_fired and ent_fired:
        warnings.warn(
            f"state {idx}: separability and entanglement criteria both fired; "
            "marking PPT_UNKNOWN (soundness conflict)",
            RuntimeWarning,
        )
        return ClassificationRecord(
            state, PPT_UNKNOWN, evidence, conflict=True, config_fingerprint=fingerprint
        )
    if sep_fired:
        return ClassificationRecord(state, SEP, evidence, config_fingerprint=fingerprint)
    if ent_fired:
        return ClassificationRecord(state, BOUND, evidence, config_fingerprint=fingerprint)

    # undecided: sweep the symmetry orbit
    if cfg.use_orbit and resources.group:
        label, orbit_evidence, conflict = _orbit_stage(state, d, resources, cfg)
        evidence.extend(orbit_evidence)
        if conflict:
            warnings.warn(
                f"state {idx}: conflicting verdicts across the symmetry orbit",
                RuntimeWarning,
            )
            return ClassificationRecord(
                state, PPT_UNKNOWN, evidence, orbit_used=True, conflict=True,
                config_fingerprint=fingerprint,
            )
        if label is not None:
            return ClassificationRecord(
                state, label, evidence, orbit_used=True, config_fingerprint=fingerprint
            )
        return ClassificationRecord(
            state, PPT_UNKNOWN, evidence, orbit_used=True, config_fingerprint=fingerprint
        )
    return ClassificationRecord(state, PPT_UNKNOWN, evidence, config_fingerprint=fingerprint)


def _orbit_stage(state, d, resources, cfg):
    """Closed-form detectors, hull, and witness bank across the orbit."""
    images = orbit_array(state.c, resources.group)[1:]  # the state itself is done
    if not len(images):
        return None, [], False
    evidence = []
    any_sep = False
    any_ent = False

    e2 = realignment_sums(images, d)
    e3 = quasipure_concurrences(images, d)
    s2 = weyl_representation_sums(images, d)
    e4 = (
        mub_sums(images, resources.mubs, resources.mub_shift)
        if resources.mubs is not None
        else None
    )
    ent_hit = np.nonzero(
        (e2 > 1.0 + EPS_REALIGN)
        | (e3 > EPS_CQP)
        | ((e4 > 2.0 + EPS_MUB) if e4 is not None else False)
    )[0]
    sep_hit = np.nonzero(s2 <= 2.0 + EPS_WEYL)[0]
    if len(ent_hit):
        j = int(ent_hit[0])
        any_ent = True
        for crit, vals, thr in (("E2", e2, 1.0 + EPS_REALIGN), ("E3", e3, EPS_CQP)):
            if vals[j] > thr:
                evidence.append(_verdict_dict(crit, True, vals[j], thr, orbit_index=j + 1))
        if e4 is not None and e4[j] > 2.0 + EPS_MUB:
            evidence.append(_verdict_dict("E4", True, e4[j], 2.0 + EPS_MUB, orbit_index=j + 1))
    if len(sep_hit):
        j = int(sep_hit[0])
        any_sep = True
        evidence.append(_verdict_dict("S2", True, s2[j], 2.0 + EPS_WEYL, orbit_index=j + 1))

    if resources._bank_arrays is not None and not any_ent:
        hit = _bank_scan(resources._bank_arrays, images)
        if hit is not None:
            any_ent = True
            evidence.append(
                {"criterion": "E5", "fired": True, "witness_id": hit[1],
                 "value": hit[2], "orbit_index": hit[0] + 1}
            )

    if resources.vertex_set is not None and not any_sep:
        limit = cfg.orbit_s1_limit if cfg.orbit_s1_limit is not None else len(images)
        for j, row in enumerate(images[:limit]):
            if hull_membership(resources.vertex_set, BellDiagonalState(d, row), cfg.hull_tol):
                any_sep = True
                evidence.append({"criterion": "S1", "fired": True, "orbit_index": j + 1})
                break

    if any_sep and any_ent:
        return None, evidence, True
    if any_sep:
        return SEP, evidence, False
    if any_ent:
        return BOUND, evidence, False
    return None, evidence, False


# --- summaries and persistence ---------------------------------------------------


def summarize(records: list[ClassificationRecord], extra: dict | None = None) -> dict:
    """Label counts, PPT-conditional shares, and per-criterion detection shares."""
    counts = {label: 0 for label in LABELS}
    for rec in records:
        counts[rec.label] += 1
    ppt_labels = (SEP, BOUND, PPT_UNKNOWN)
    ppt_count = sum(counts[l] for l in ppt_labels)
    shares = {
        label: (counts[label] / ppt_count if ppt_count else 0.0) for label in ppt_labels
    }
    n = len(records)
    criterion_shares = {
        SEP: {
            crit: _share([r for r in records if r.label == SEP], crit)
            for crit in SEP_CRITERIA
        },
        BOUND: {
            crit: _share([r for r in records if r.label == BOUND], crit)
            for crit in ENT_CRITERIA
        },
    }
    out = {
        "n": n,
        "counts": counts,
        "conflicts": sum(r.conflict for r in records),
        "ppt_count": ppt_count,
        "ppt_shares": shares,
        "classified_share": (counts[FREE] + counts[SEP] + counts[BOUND]) / n if n else 0.0,
        "criterion_shares": criterion_shares,
    }
    if records:
        out["config_fingerprint"] = records[0].config_fingerprint
    if extra:
        out.update(extra)
    return out


def _share(records, criterion) -> float:
    if not records:
        return 0.0
    return sum(r.fired(criterion) for r in records) / len(records)


def write_records(path: str | Path, records: list[ClassificationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, rec in enumerate(records):
            payload = {
                "id": rec.state.id if rec.state.id is not None else str(i),
                "d": rec.state.d,
                "c": [float(x) for x in rec.state.c],
                "label": rec.label,
                "conflict": rec.conflict,
                "orbit_used": rec.orbit_used,
                "evidence": rec.evidence,
                "config_fingerprint": rec.config_fingerprint,
            }
            fh.write(json.dumps(payload) + "\n")


def read_records(path: str | Path) -> list[ClassificationRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                ClassificationRecord(
                    BellDiagonalState(int(rec["d"]), np.array(rec["c"]), id=rec.get("id")),
                    rec["label"],
                    rec["evidence"],
                    orbit_used=rec.get("orbit_used", False),
                    conflict=rec.get("conflict", False),
                    config_fingerprint=rec.get("config_fingerprint", ""),
                )
            )
    return out
