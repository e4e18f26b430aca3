"""Witness values, bound certification, bank scanning, soundness."""

import numpy as np
import pytest

from magicsimplex.detectors import ppt_min_eigenvalues
from magicsimplex.states import (
    BellDiagonalState,
    indicator_state,
    kernel_vertex_array,
    sample_simplex_array,
    uniform_state,
)
from magicsimplex.symmetries import generate_group
from magicsimplex.witnesses import (
    EntanglementWitness,
    WitnessConfig,
    bank_check,
    certify_bounds,
    detects,
    forge_bank,
    load_bank,
    permute_kappa,
    random_witness,
    save_bank,
    witness_id,
    witness_value,
)

FAST = WitnessConfig(restarts=48)


def make_witness(d, kappa, lower, upper):
    kappa = np.asarray(kappa, dtype=float)
    return EntanglementWitness(d, kappa, lower, upper, witness_id(d, kappa))


def test_witness_value_trivials():
    d = 3
    ones = make_witness(d, np.ones(d * d), 0.0, 2.0)
    assert witness_value(ones, uniform_state(d)) == pytest.approx(1.0)
    assert witness_value(ones, indicator_state(d, 1, 2)) == pytest.approx(1.0)
    ind = np.zeros(d * d)
    ind[0] = 1.0
    probe = make_witness(d, ind, 0.0, 1.0 / d)
    assert witness_value(probe, indicator_state(d, 0, 0)) == pytest.approx(1.0)
    assert witness_value(probe, uniform_state(d)) == pytest.approx(1.0 / d**2)
    with pytest.raises(ValueError):
        witness_value(probe, uniform_state(2))


def test_certify_bounds_identity_witness():
    rng = np.random.default_rng(0)
    d = 3
    lower, upper, info = certify_bounds(np.ones(d * d), d, WitnessConfig(margin=0.0), rng)
    assert lower == pytest.approx(1.0, abs=1e-9)
    assert upper == pytest.approx(1.0, abs=1e-9)
    assert info["converged"]


@pytest.mark.parametrize("d", (2, 3, 4))
def test_certify_bounds_single_projector(d):
    # max squared overlap of a product state with a maximally entangled state is 1/d
    rng = np.random.default_rng(d)
    kappa = np.zeros(d * d)
    kappa[0] = 1.0
    lower, upper, _ = certify_bounds(kappa, d, WitnessConfig(margin=0.0), rng)
    assert lower == pytest.approx(0.0, abs=1e-9)
    assert upper == pytest.approx(1.0 / d, abs=1e-9)


def test_margin_widens_interval():
    rng = np.random.default_rng(3)
    d = 3
    kappa = rng.uniform(-1, 1, d * d)
    l0, u0, _ = certify_bounds(kappa, d, WitnessConfig(margin=0.0), np.random.default_rng(5))
    l1, u1, _ = certify_bounds(kappa, d, WitnessConfig(margin=1e-4), np.random.default_rng(5))
    assert l1 == pytest.approx(l0 - 1e-4, abs=1e-9)
    assert u1 == pytest.approx(u0 + 1e-4, abs=1e-9)


def test_margin_monotonicity_of_detection():
    rng = np.random.default_rng(4)
    d = 3
    c = sample_simplex_array(d, 300, rng)
    kappa = rng.uniform(-1, 1, d * d)
    narrow_l, narrow_u, _ = certify_bounds(kappa, d, WitnessConfig(margin=1e-8), np.random.default_rng(6))
    wide_l, wide_u, _ = certify_bounds(kappa, d, WitnessConfig(margin=1e-3), np.random.default_rng(6))
    vals = c @ kappa
    narrow_hits = (vals < narrow_l) | (vals > narrow_u)
    wide_hits = (vals < wide_l) | (vals > wide_u)
    assert np.all(wide_hits <= narrow_hits)  # enlarging the margin never detects more


def test_random_witness_kernel_soundness():
    """No certified witness may flag a kernel vertex (all are separable)."""
    rng = np.random.default_rng(11)
    d = 3
    vertices = kernel_vertex_array(d)
    for _ in range(100):
        w = random_witness(d, rng, FAST)
        vals = vertices @ w.kappa
        assert vals.min() >= w.lower - 1e-12
        assert vals.max() <= w.upper + 1e-12


def test_random_witness_kernel_polytope_soundness():
    """Random mixtures of kernel vertices stay inside every certified interval."""
    rng = np.random.default_rng(12)
    d = 3
    vertices = kernel_vertex_array(d)
    mixtures = rng.dirichlet(np.ones(len(vertices)), size=1000) @ vertices
    bank = forge_bank(d, 25, rng, FAST)
    for w in bank:
        vals = mixtures @ w.kappa
        assert vals.min() >= w.lower - 1e-12
        assert vals.max() <= w.upper + 1e-12


def test_random_witness_never_flags_ppt_states_for_d2():
    """d=2 has no PPT entanglement; any hit on a PPT state is a bound bug."""
    rng = np.random.default_rng(13)
    d = 2
    c = sample_simplex_array(d, 2000, rng)
    ppt = c[ppt_min_eigenvalues(c, d) >= -1e-10]
    for _ in range(100):
        w = random_witness(d, rng, FAST)
        vals = ppt @ w.kappa
        assert not np.any((vals < w.lower) | (vals > w.upper))


def test_symmetry_image_has_same_bounds():
    rng = np.random.default_rng(14)
    d = 3
    group = generate_group(d)
    for i in range(20):
        kappa = rng.uniform(-1, 1, d * d)
        lower, upper, _ = certify_bounds(kappa, d, FAST, np.random.default_rng(100 + i))
        sym = group[rng.integers(len(group))]
        image = permute_kappa(sym.perm, kappa)
        ilower, iupper, _ = certify_bounds(image, d, FAST, np.random.default_rng(200 + i))
        assert ilower == pytest.approx(lower, abs=1e-4)
        assert iupper == pytest.approx(upper, abs=1e-4)


def test_bank_check_trivials():
    d = 3
    assert bank_check([], uniform_state(d)) is None
    ind = np.zeros(d * d)
    ind[0] = 1.0
    probe = make_witness(d, ind, -1e-6, 1.0 / d + 1e-6)
    assert bank_check([probe], indicator_state(d, 0, 0)) == probe.id
    assert bank_check([probe], uniform_state(d)) is None
    with pytest.raises(ValueError):
        bank_check([probe], uniform_state(2))


def test_bank_check_scans_in_id_order():
    d = 2
    ind = np.zeros(4)
    ind[0] = 1.0
    w1 = EntanglementWitness(d, ind, -1e-6, 0.5 + 1e-6, "bbbb")
    w2 = EntanglementWitness(d, ind, -1e-6, 0.5 + 1e-6, "aaaa")
    assert bank_check([w1, w2], indicator_state(d, 0, 0)) == "aaaa"


def test_witness_detects_direction():
    w = make_witness(2, np.zeros(4), 0.2, 0.4)
    assert detects(w, 0.1)
    assert detects(w, 0.5)
    assert not detects(w, 0.3)


def test_bank_file_round_trip(tmp_path):
    rng = np.random.default_rng(15)
    bank = forge_bank(2, 5, rng, FAST, seed_note=15)
    path = tmp_path / "bank.jsonl"
    save_bank(path, bank)
    loaded = load_bank(path)
    assert [w.id for w in loaded] == [w.id for w in bank]
    for a, b in zip(loaded, bank):
        assert np.array_equal(a.kappa, b.kappa)
        assert a.lower == b.lower and a.upper == b.upper
        assert a.meta["seed"] == 15


def test_witness_id_stability():
    kappa = np.array([0.25, -0.5, 0.125, 0.0])
    assert witness_id(2, kappa) == witness_id(2, kappa.copy())
    assert witness_id(2, kappa) != witness_id(2, np.zeros(4))
    assert witness_id(2, np.zeros(4)) != witness_id(3, np.zeros(9))


def test_witness_validation():
    with pytest.raises(ValueError):
        EntanglementWitness(2, np.array([2.0, 0, 0, 0]), 0, 1, "x")
    with pytest.raises(ValueError):
        EntanglementWitness(2, np.zeros(3), 0, 1, "x")
