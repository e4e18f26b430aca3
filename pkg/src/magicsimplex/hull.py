"""Certified separable vertex sets and hull membership by linear programming.

A state is declared separable when it is a convex combination of the stored
vertices (a linear feasibility problem).  Vertices come from three sources:
the kernel cosets (separable by construction), symmetry-orbit images of other
vertices, and line-search extensions toward the separable surface.  Every
extension vertex carries an explicit product-ensemble certificate found by
fully-corrective Frank-Wolfe: alternate between a non-negative least-squares
reweighting of the current product ensemble and a seesaw search for the
product state most aligned with the residual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.optimize import linprog, nnls

from .detectors import ppt_min_eigenvalues
from .seesaw import extremal_product_state, top_product_states
from .states import BellDiagonalState, bell_coordinates, density_matrix, sample_enclosure_array, uniform_state
from .symmetries import generate_group
from .weyl import projector_stack, weyl_operator

KERNEL_COSET = "KERNEL_COSET"
ORBIT_IMAGE = "ORBIT_IMAGE"
CERTIFIED_EXTENSION = "CERTIFIED_EXTENSION"

HULL_TOL = 1e-9
CERT_TOL = 1e-7


class HullSolverError(RuntimeError):
    """The LP backend failed; distinguished from plain infeasibility."""


@dataclass(frozen=True)
class SeparabilityCertificate:
    """Explicit product ensemble: sum_j p_j |a_j><a_j| (x) |b_j><b_j|."""

    weights: np.ndarray
    vectors_a: np.ndarray  # (m, d) complex rows
    vectors_b: np.ndarray
    residual: float

    def density_matrix(self) -> np.ndarray:
        rho = 0.0
        for p, a, b in zip(self.weights, self.vectors_a, self.vectors_b):
            psi = np.kron(a, b)
            rho = rho + p * np.outer(psi, psi.conj())
        return rho

    def to_dict(self) -> dict:
        def encode(vs):
            return [[[float(z.real), float(z.imag)] for z in row] for row in vs]

        return {
            "weights": [float(p) for p in self.weights],
            "vectors_a": encode(self.vectors_a),
            "vectors_b": encode(self.vectors_b),
            "residual": float(self.residual),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SeparabilityCertificate":
        def decode(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        return cls(
            np.array(payload["weights"], dtype=float),
            decode(payload["vectors_a"]),
            decode(payload["vectors_b"]),
            float(payload["residual"]),
        )


def certificate_residual(cert: SeparabilityCertificate, s: BellDiagonalState) -> float:
    """Independent re-verification: Frobenius distance of the rebuilt ensemble."""
    return float(np.linalg.norm(cert.density_matrix() - density_matrix(s)))


@dataclass
class VertexRecord:
    c: np.ndarray
    provenance: str
    certificate: SeparabilityCertificate | None = None


class SeparableVertexSet:
    """Append-only collection of certified-separable simplex points."""

    def __init__(self, d: int, vertices: list[VertexRecord] | None = None):
        self.d = d
        self.vertices = list(vertices or [])
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None or len(self._matrix) != len(self.vertices):
            self._matrix = np.array([v.c for v in self.vertices])
        return self._matrix

    def fingerprints(self) -> set[bytes]:
        return {np.round(v.c, 12).tobytes() for v in self.vertices}

    def copy(self) -> "SeparableVertexSet":
        return SeparableVertexSet(self.d, list(self.vertices))


def kernel_vertex_set(d: int) -> SeparableVertexSet:
    from .states import kernel_vertices

    records = [VertexRecord(v.state.c, KERNEL_COSET) for v in kernel_vertices(d)]
    return SeparableVertexSet(d, records)


# --- hull membership -----------------------------------------------------------


def hull_weights(vs: SeparableVertexSet, s: BellDiagonalState, tol: float = HULL_TOL):
    """Convex weights reproducing the state within tol, or None if outside.

    Solves  min t  s.t.  |V^T lam - c| <= t,  lam >= 0,  sum lam = 1  and
    accepts when the optimum satisfies t <= tol.
    """
    if vs.d != s.d:
        raise ValueError("dimension mismatch between vertex set and state")
    if not vs.vertices:
        return None
    v = vs.matrix
    n, m = v.shape
    c_obj = np.zeros(n + 1)
    c_obj[-1] = 1.0
    ones_col = -np.ones((m, 1))
    a_ub = np.block([[v.T, ones_col], [-v.T, ones_col]])
    b_ub = np.concatenate([s.c, -s.c])
    a_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    res = linprog(
        c_obj,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(0, None)],
        method="highs",
    )
    if res.status not in (0, 2):
        raise HullSolverError(f"linprog failed with status {res.status}: {res.message}")
    if res.status != 0 or res.fun > tol:
        return None
    return res.x[:-1]


def hull_membership(vs: SeparableVertexSet, s: BellDiagonalState, tol: float = HULL_TOL) -> bool:
    return hull_weights(vs, s, tol) is not None


# --- separability certification --------------------------------------------------


@dataclass
class SeesawConfig:
    tol: float = CERT_TOL  # accepted Frobenius residual of the stored certificate
    inner_tol: float = 2e-8  # targeted before weight normalization
    max_iters: int = 400
    max_terms: int | None = None  # ensemble cap; None -> 2 d^4 (Caratheodory scale)
    directions_per_round: int = 4
    direction_restarts: int = 10
    direction_sweeps: int = 50
    nnls_every: int = 5  # fully-corrective rounds; plain FW steps in between
    patience: int = 30  # non-improving corrective rounds before giving up
    fail_factor: float = 5.0  # early exit when the distance bound exceeds this * tol


def _computational_products(d: int) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(d, dtype=complex)
    pairs_a = []
    pairs_b = []
    for i in range(d):
        for j in range(d):
            pairs_a.append(eye[i])
            pairs_b.append(eye[j])
    return np.array(pairs_a), np.array(pairs_b)


def _joint_eigvecs(d: int, g1: tuple[int, int], g2: tuple[int, int]) -> np.ndarray:
    """Orthonormal joint eigenbasis of two commuting Weyl operators."""
    w1 = weyl_operator(d, *g1)
    w2 = weyl_operator(d, *g2)
    vals, vecs = np.linalg.eig(w1)
    order = np.argsort(np.angle(vals))
    vals, vecs = vals[order], vecs[:, order]
    blocks = []
    i = 0
    while i < d:
        j = i
        while j < d and abs(vals[j] - vals[i]) < 1e-8:
            j += 1
        q, _ = np.linalg.qr(vecs[:, i:j])
        sub = q.conj().T @ w2 @ q  # unitary on the invariant subspace
        _, svecs = np.linalg.eig(sub)
        sq, _ = np.linalg.qr(svecs)
        blocks.append(q @ sq)
        i = j
    return np.hstack(blocks)


@lru_cache(maxsize=None)
def _coset_product_seeds(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact product atoms of every kernel coset state.

    A coset state with subgroup generator g and shift s is the uniform
    mixture of |v_j> (x) conj(W_s^dagger v_j) over an eigenbasis {v_j} of
    W_g (a joint eigenbasis of two generators for sublattices); seeding the
    decomposition search with these atoms makes the whole kernel polytope,
    and the surface states near it, cheap to certify.
    """
    from .weyl import enumerate_cosets, point_order

    pairs_a = []
    pairs_b = []
    for coset in enumerate_cosets(d):
        p0, q0 = coset.shift
        base = sorted(((k - p0) % d, (l - q0) % d) for k, l in coset.points)
        gens = [p for p in base if p != (0, 0)]
        g1 = max(gens, key=lambda p: point_order(p, d))
        if point_order(g1, d) == d:
            _, vecs = np.linalg.eig(weyl_operator(d, *g1))
        else:
            g2 = next(p for p in gens if p not in {g1, (0, 0)})
            vecs = _joint_eigvecs(d, g1, g2)
        w_shift = weyl_operator(d, p0, q0)
        for j in range(d):
            v = vecs[:, j] / np.linalg.norm(vecs[:, j])
            pairs_a.append(v)
            pairs_b.append((w_shift.conj().T @ v).conj())
    a = np.array(pairs_a)
    b = np.array(pairs_b)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _seed_products(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Computational products, coset eigenbasis atoms, and MUB (u, u*) pairs."""
    comp_a, comp_b = _computational_products(d)
    coset_a, coset_b = _coset_product_seeds(d)
    vecs_a = [comp_a, coset_a]
    vecs_b = [comp_b, coset_b]
    try:
        from .detectors import standard_mubs

        bases = standard_mubs(d).bases[1:]
        extra = np.concatenate([basis.T for basis in bases])
        vecs_a.append(extra)
        vecs_b.append(extra.conj())
    except ValueError:
        pass
    return np.concatenate(vecs_a), np.concatenate(vecs_b)


def _product_column(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    psi = np.kron(a, b)
    proj = np.outer(psi, psi.conj())
    return np.concatenate([proj.real.ravel(), proj.imag.ravel()])


def certify_separable(
    s: BellDiagonalState,
    cfg: SeesawConfig | None = None,
    rng: np.random.Generator | None = None,
    init: SeparabilityCertificate | None = None,
) -> SeparabilityCertificate | None:
    """Search for an explicit separable decomposition of the state.

    Returns a certificate whose independently recomputed residual is at most
    ``cfg.tol``, or None when the search stalls (the state stays UNKNOWN; a
    failure here never asserts entanglement).
    """
    cfg = cfg or SeesawConfig()
    rng = rng if rng is not None else np.random.default_rng()
    d = s.d
    max_terms = cfg.max_terms if cfg.max_terms is not None else 2 * d**4
    rho = density_matrix(s)
    target = np.concatenate([rho.real.ravel(), rho.imag.ravel()])

    vecs_a, vecs_b = _seed_products(d)
    if init is not None:
        vecs_a = np.concatenate([init.vectors_a, vecs_a])
        vecs_b = np.concatenate([init.vectors_b, vecs_b])
    columns = [_product_column(a, b) for a, b in zip(vecs_a, vecs_b)]

    a_mat = np.array(columns).T
    weights, _ = nnls(a_mat, target)
    recon = a_mat @ weights
    best_residual = np.inf
    stall = 0
    for round_idx in range(cfg.max_iters):
        residual = float(np.linalg.norm(recon - target))
        if residual < cfg.inner_tol:
            return _finalize_certificate(s, rho, weights, vecs_a, vecs_b, cfg.tol)

        # seesaw the product states most aligned with the residual; the
        # residual is normalized so the seesaw tolerance is scale-invariant
        # (otherwise the duality bound below loses resolution as R shrinks)
        r_mat = rho - (recon[: d**4] + 1j * recon[d**4 :]).reshape(d * d, d * d)
        r_scale = float(np.linalg.norm(r_mat))
        if r_scale == 0.0:
            continue
        seed_b = _residual_seed(r_mat, d)
        found = top_product_states(
            (r_mat / r_scale).reshape(d, d, d, d),
            d,
            cfg.directions_per_round,
            cfg.direction_restarts,
            rng,
            max_sweeps=cfg.direction_sweeps,
            seeds_b=seed_b,
        )
        if not found:
            return None
        # Frank-Wolfe duality: for every separable sigma,
        #   ||rho - sigma|| >= (||R||^2 + <R, x> - max_prod <R, Pi>) / ||R||.
        # Underestimating the product maximum only makes the bound larger, so
        # exiting on it forfeits coverage, never soundness of a certificate.
        v_star = found[0][0] * r_scale
        r_vec = target - recon
        r_norm_sq = float(r_vec @ r_vec)
        if r_norm_sq > 0:
            dist_bound = (r_norm_sq + float(r_vec @ recon) - v_star) / np.sqrt(r_norm_sq)
            if dist_bound > cfg.fail_factor * cfg.tol:
                return None

        # plain Frank-Wolfe convex steps through the new atoms (cheap); the
        # fully-corrective NNLS below re-optimizes every few rounds
        for _, a_new, b_new in found:
            col = _product_column(a_new, b_new)
            diff = col - recon
            denom = float(diff @ diff)
            if denom <= 0:
                continue
            gamma = float((target - recon) @ diff) / denom
            gamma = min(max(gamma, 0.0), 1.0)
            if gamma <= 0:
                continue
            weights = np.append(weights * (1.0 - gamma), gamma)
            recon = recon + gamma * diff
            vecs_a = np.concatenate([vecs_a, a_new[None, :]])
            vecs_b = np.concatenate([vecs_b, b_new[None, :]])
            columns.append(col)

        corrective = (round_idx + 1) % cfg.nnls_every == 0
        if corrective or residual < 4 * cfg.inner_tol:
            a_mat = np.array(columns).T
            weights, _ = nnls(a_mat, target)
            recon = a_mat @ weights
            # keep only the active set; hard-cap by largest weight if needed
            keep = weights > 0
            if keep.sum() > max_terms:
                order = np.argsort(weights)[::-1][:max_terms]
                keep = np.zeros(len(weights), dtype=bool)
                keep[order] = True
            vecs_a, vecs_b = vecs_a[keep], vecs_b[keep]
            columns = [col for col, k in zip(columns, keep) if k]
            weights = weights[keep]
            recon = np.array(columns).T @ weights if columns else recon * 0.0
            corr_residual = float(np.linalg.norm(recon - target))
            if corr_residual < best_residual - 1e-12:
                best_residual = corr_residual
                stall = 0
            else:
                stall += 1
                if stall > cfg.patience:
                    return None
    return None


def _residual_seed(r_mat: np.ndarray, d: int) -> np.ndarray:
    """Second factor of the nearest product approximation to the top eigenvector."""
    vals, vecs = np.linalg.eigh(r_mat)
    psi = vecs[:, -1].reshape(d, d)
    _, _, vh = np.linalg.svd(psi)
    return vh[0].conj()[None, :]


def _finalize_certificate(s, rho, weights, vecs_a, vecs_b, tol):
    keep = weights > 0
    weights = weights[keep]
    weights = weights / weights.sum()
    cert = SeparabilityCertificate(weights, vecs_a[keep], vecs_b[keep], 0.0)
    residual = float(np.linalg.norm(cert.density_matrix() - rho))
    if residual > tol:
        return None
    return SeparabilityCertificate(cert.weights, cert.vectors_a, cert.vectors_b, residual)


# --- vertex extension -------------------------------------------------------------


@dataclass
class ExtendConfig:
    max_vertices: int = 10_000
    resolution: float = 1e-3  # bisection resolution in the mixing parameter
    certify: SeesawConfig = field(default_factory=SeesawConfig)
    ppt_tol: float = 1e-10


def _random_ppt_target(d: int, rng: np.random.Generator, ppt_tol: float) -> np.ndarray:
    while True:
        batch, _ = sample_enclosure_array(d, 64, rng)
        mins = ppt_min_eigenvalues(batch, d)
        hits = np.nonzero(mins >= -ppt_tol)[0]
        if len(hits):
            return batch[hits[0]]


def _line_search_vertex(
    d: int,
    target: np.ndarray,
    rng: np.random.Generator,
    cfg: ExtendConfig,
) -> tuple[np.ndarray, SeparabilityCertificate] | None:
    """Farthest certifiable point from the center toward the target."""
    center = uniform_state(d).c

    def mix(t: float) -> BellDiagonalState:
        return BellDiagonalState(d, (1.0 - t) * center + t * target)

    cert = certify_separable(mix(1.0), cfg.certify, rng)
    if cert is not None:
        return target.copy(), cert
    lo, hi = 0.0, 1.0
    best: tuple[np.ndarray, SeparabilityCertificate] | None = None
    warm: SeparabilityCertificate | None = None
    while hi - lo > cfg.resolution:
        mid = 0.5 * (lo + hi)
        cert = certify_separable(mix(mid), cfg.certify, rng, init=warm)
        if cert is None:
            hi = mid
        else:
            lo = mid
            warm = cert
            best = (mix(mid).c, cert)
    return best


def extend_vertices(
    vs: SeparableVertexSet,
    rng: np.random.Generator,
    budget: int,
    cfg: ExtendConfig | None = None,
) -> SeparableVertexSet:
    """Grow the vertex set; never removes vertices.

    ``budget`` counts line-search rays toward random PPT targets; afterwards
    symmetry-orbit images of certified vertices are added (certificates do not
    transport through a permutation, so images carry none) until the vertex
    cap is reached.
    """
    cfg = cfg or ExtendConfig()
    out = vs.copy()
    seen = out.fingerprints()

    def try_add(record: VertexRecord) -> bool:
        key = np.round(record.c, 12).tobytes()
        if key in seen or len(out.vertices) >= cfg.max_vertices:
            return False
        seen.add(key)
        out.vertices.append(record)
        return True

    for _ in range(budget):
        target = _random_ppt_target(vs.d, rng, cfg.ppt_tol)
        found = _line_search_vertex(vs.d, target, rng, cfg)
        if found is not None:
            c_vertex, cert = found
            try_add(VertexRecord(c_vertex, CERTIFIED_EXTENSION, cert))

    # orbit closure of certified extensions, round-robin so every ray
    # contributes images before the cap cuts off
    group = generate_group(vs.d)
    sources = [v for v in out.vertices if v.provenance == CERTIFIED_EXTENSION]
    queues = []
    for src in sources:
        images = np.empty((len(group), vs.d * vs.d))
        for g_idx, sym in enumerate(group):
            images[g_idx, sym.perm] = src.c
        queues.append(images)
    col = 0
    added = True
    while added and len(out.vertices) < cfg.max_vertices:
        added = False
        for images in queues:
            if col < len(images):
                if try_add(VertexRecord(images[col], ORBIT_IMAGE)):
                    added = True
        col += 1
        if col >= max((len(q) for q in queues), default=0):
            break
    return out


# --- persistence ---------------------------------------------------------------


def save_vertex_set(path: str | Path, vs: SeparableVertexSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in vs.vertices:
            rec: dict = {"d": vs.d, "c": [float(x) for x in v.c], "provenance": v.provenance}
            if v.certificate is not None:
                rec["certificate"] = v.certificate.to_dict()
            fh.write(json.dumps(rec) + "\n")


def load_vertex_set(path: str | Path) -> SeparableVertexSet:
    records = []
    d = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            d = int(rec["d"])
            cert = rec.get("certificate")
            records.append(
                VertexRecord(
                    np.array(rec["c"], dtype=float),
                    rec["provenance"],
                    SeparabilityCertificate.from_dict(cert) if cert else None,
                )
            )
    if d is None:
        raise ValueError(f"empty vertex file: {path}")
    return SeparableVertexSet(d, records)
