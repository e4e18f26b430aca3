"""Weyl algebra, Bell projectors, and phase-space subgroup structure."""

import math
from itertools import combinations, product

import numpy as np
import pytest

from magicsimplex.weyl import (
    LINE,
    SUBLATTICE,
    bell_projector,
    bell_state,
    enumerate_cosets,
    enumerate_order_d_subgroups,
    partial_trace,
    partial_transpose,
    realignment,
    weyl_operator,
)

DIMS = (2, 3, 4, 5)


def weyl_by_defining_sum(d, k, l):
    """Independent oracle: literal evaluation of the defining sum."""
    w = np.exp(2j * np.pi / d)
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        ket = np.zeros(d)
        bra = np.zeros(d)
        ket[j] = 1.0
        bra[(j + l) % d] = 1.0
        mat += (w ** (j * k)) * np.outer(ket, bra)
    return mat


@pytest.mark.parametrize("d", DIMS)
def test_weyl_matches_defining_sum(d):
    for k in range(d):
        for l in range(d):
            assert np.allclose(weyl_operator(d, k, l), weyl_by_defining_sum(d, k, l), atol=1e-12)


def test_weyl_spot_values():
    assert np.allclose(weyl_operator(2, 0, 0), np.eye(2), atol=1e-12)
    assert np.allclose(weyl_operator(2, 1, 1), np.array([[0, 1], [-1, 0]]), atol=1e-12)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(weyl_operator(3, 1, 0), np.diag([1, w, w**2]), atol=1e-12)


def test_weyl_rejects_bad_arguments():
    with pytest.raises(ValueError):
        weyl_operator(1, 0, 0)
    with pytest.raises(ValueError):
        weyl_operator(3, 3, 0)
    with pytest.raises(ValueError):
        weyl_operator(3, 0, -1)


@pytest.mark.parametrize("d", DIMS)
def test_weyl_unitary(d):
    for k in range(d):
        for l in range(d):
            mat = weyl_operator(d, k, l)
            assert np.allclose(mat @ mat.conj().T, np.eye(d), atol=1e-12)


@pytest.mark.parametrize("d", DIMS)
def test_weyl_composition_relation(d):
    w = np.exp(2j * np.pi / d)
    for k1, l1, k2, l2 in product(range(d), repeat=4):
        lhs = weyl_operator(d, k1, l1) @ weyl_operator(d, k2, l2)
        rhs = w ** (l1 * k2) * weyl_operator(d, (k1 + k2) % d, (l1 + l2) % d)
        assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("d", DIMS)
def test_weyl_adjoint_relation(d):
    w = np.exp(2j * np.pi / d)
    for k, l in product(range(d), repeat=2):
        mat = weyl_operator(d, k, l)
        adj = mat.conj().T
        assert np.allclose(adj, w ** (k * l) * weyl_operator(d, (-k) % d, (-l) % d), atol=1e-12)
        assert np.allclose(adj @ mat, np.eye(d), atol=1e-12)


def test_bell_state_00_is_maximally_entangled_pair():
    v = bell_state(2, 0, 0)
    expected = np.zeros(4)
    expected[0] = expected[3] = 1 / math.sqrt(2)
    assert np.allclose(v, expected, atol=1e-12)


@pytest.mark.parametrize("d", (2, 3, 4))
def test_bell_projectors_orthonormal(d):
    projs = [bell_projector(d, k, l) for k in range(d) for l in range(d)]
    for a in range(d * d):
        for b in range(d * d):
            overlap = np.trace(projs[a] @ projs[b]).real
            assert overlap == pytest.approx(1.0 if a == b else 0.0, abs=1e-12)


@pytest.mark.parametrize("d", DIMS)
def test_bell_projectors_complete(d):
    total = sum(bell_projector(d, k, l) for k in range(d) for l in range(d))
    assert np.allclose(total, np.eye(d * d), atol=1e-12)


@pytest.mark.parametrize("d", (2, 3, 4))
def test_bell_projector_rank_one_and_reduced_states(d):
    for k, l in product(range(d), repeat=2):
        proj = bell_projector(d, k, l)
        assert np.allclose(proj, proj.conj().T, atol=1e-12)
        assert np.trace(proj).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(proj @ proj, proj, atol=1e-12)
        for subsystem in (0, 1):
            red = partial_trace(proj, d, subsystem)
            assert np.allclose(red, np.eye(d) / d, atol=1e-12)


def test_partial_transpose_index_convention():
    d = 2
    rho = np.arange(16, dtype=float).reshape(4, 4)
    pt = partial_transpose(rho, d)
    for i, k, j, l in product(range(d), repeat=4):
        assert pt[i * d + l, j * d + k] == rho[i * d + k, j * d + l]


def test_realignment_index_convention():
    d = 2
    rho = np.arange(16, dtype=float).reshape(4, 4)
    re = realignment(rho, d)
    for i, k, j, l in product(range(d), repeat=4):
        assert re[i * d + j, k * d + l] == rho[i * d + k, j * d + l]


# --- subgroup enumeration -------------------------------------------------


def subgroups_by_subset_scan(d):
    """Independent oracle: scan all d-element subsets containing the origin."""
    nonzero = [(k, l) for k in range(d) for l in range(d) if (k, l) != (0, 0)]
    found = set()
    for rest in combinations(nonzero, d - 1):
        pts = {(0, 0), *rest}
        closed = all(
            ((a[0] + b[0]) % d, (a[1] + b[1]) % d) in pts for a in pts for b in pts
        )
        if closed:
            found.add(tuple(sorted(pts)))
    return found


@pytest.mark.parametrize("d,count", [(2, 3), (3, 4), (4, 7), (5, 6)])
def test_subgroup_enumeration_matches_subset_scan(d, count):
    subs = enumerate_order_d_subgroups(d)
    assert len(subs) == count
    assert {s.points for s in subs} == subgroups_by_subset_scan(d)


def test_subgroup_kinds():
    assert all(s.kind == LINE for s in enumerate_order_d_subgroups(2))
    assert all(s.kind == LINE for s in enumerate_order_d_subgroups(3))
    kinds = [s.kind for s in enumerate_order_d_subgroups(4)]
    assert kinds.count(LINE) == 6
    assert kinds.count(SUBLATTICE) == 1
    sub = next(s for s in enumerate_order_d_subgroups(4) if s.kind == SUBLATTICE)
    assert set(sub.points) == {(0, 0), (2, 0), (0, 2), (2, 2)}


@pytest.mark.parametrize("d", (2, 3, 4))
def test_subgroups_closed_under_addition(d):
    for sub in enumerate_order_d_subgroups(d):
        pts = set(sub.points)
        assert (0, 0) in pts
        for a in pts:
            for b in pts:
                assert ((a[0] + b[0]) % d, (a[1] + b[1]) % d) in pts


@pytest.mark.parametrize("d,count", [(2, 6), (3, 12), (4, 28)])
def test_coset_counts(d, count):
    cosets = enumerate_cosets(d)
    assert len(cosets) == count
    assert len({c.points for c in cosets}) == count
    # every subgroup appears among its own cosets
    sub_points = {s.points for s in enumerate_order_d_subgroups(d)}
    assert sub_points <= {c.points for c in cosets}


@pytest.mark.parametrize("d", (2, 3, 4))
def test_cosets_are_translates(d):
    subs = {s.points: s for s in enumerate_order_d_subgroups(d)}
    for coset in enumerate_cosets(d):
        p, q = coset.shift
        base = tuple(sorted(((k - p) % d, (l - q) % d) for k, l in coset.points))
        assert base in subs
        if coset.is_coset:
            assert (0, 0) not in coset.points


def test_enumeration_is_deterministic():
    a = [s.points for s in enumerate_cosets(4)]
    b = [s.points for s in enumerate_cosets(4)]
    assert a == b
    assert a == sorted(a)
