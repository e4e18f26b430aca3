"""Simplex coordinates, samplers, enclosure membership, kernel vertices."""

import numpy as np
import pytest
from scipy import stats

from magicsimplex.states import (
    BellDiagonalState,
    bell_coordinates,
    density_matrix,
    in_enclosure,
    in_enclosure_array,
    indicator_state,
    kernel_vertex_array,
    kernel_vertices,
    read_states,
    sample_enclosure,
    sample_enclosure_array,
    sample_simplex,
    sample_simplex_array,
    uniform_state,
    write_states,
)
from magicsimplex.weyl import bell_projector, partial_trace


def test_state_validation():
    with pytest.raises(ValueError):
        BellDiagonalState(2, np.array([0.5, 0.5, 0.5, -0.5]))
    with pytest.raises(ValueError):
        BellDiagonalState(2, np.array([0.25, 0.25, 0.25]))
    with pytest.raises(ValueError):
        BellDiagonalState(2, np.array([0.5, 0.5, 0.5, 0.5]))
    s = BellDiagonalState(2, np.array([0.25, 0.25, 0.25, 0.25]))
    assert s.coordinate(1, 1) == 0.25


def test_density_matrix_uniform_is_maximally_mixed():
    for d in (2, 3):
        rho = density_matrix(uniform_state(d))
        assert np.allclose(rho, np.eye(d * d) / (d * d), atol=1e-12)


def test_density_matrix_indicator_is_projector():
    for d in (2, 3):
        rho = density_matrix(indicator_state(d, 0, 0))
        assert np.allclose(rho, bell_projector(d, 0, 0), atol=1e-12)


def test_density_matrix_properties_on_samples():
    rng = np.random.default_rng(7)
    d = 3
    for _ in range(5):
        s = sample_simplex(d, rng)
        rho = density_matrix(s)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        for subsystem in (0, 1):
            assert np.allclose(partial_trace(rho, d, subsystem), np.eye(d) / d, atol=1e-12)


def test_density_matrix_is_affine_in_coordinates():
    rng = np.random.default_rng(11)
    d = 3
    a = sample_simplex(d, rng)
    b = sample_simplex(d, rng)
    lam = 0.3
    mix = BellDiagonalState(d, lam * a.c + (1 - lam) * b.c)
    assert np.allclose(
        density_matrix(mix),
        lam * density_matrix(a) + (1 - lam) * density_matrix(b),
        atol=1e-12,
    )


def test_bell_coordinate_round_trip():
    rng = np.random.default_rng(13)
    for d in (2, 3):
        s = sample_simplex(d, rng)
        assert np.allclose(bell_coordinates(density_matrix(s), d), s.c, atol=1e-12)


def test_simplex_sampler_mean_matches_dirichlet():
    rng = np.random.default_rng(42)
    d = 3
    n = 100_000
    c = sample_simplex_array(d, n, rng)
    assert np.allclose(c.sum(axis=1), 1.0, atol=1e-9)
    assert c.min() >= 0.0
    # Dirichlet(1,...,1) coordinate mean 1/9, var = 1*(9-1)/(9^2*(9+1))
    se = np.sqrt(8.0 / (81 * 10) / n)
    assert np.all(np.abs(c.mean(axis=0) - 1.0 / 9) < 3 * se)


def rejection_sampler_oracle(d, n, rng):
    """The draw-and-reject scheme: d^2-1 uniform coordinates, last by normalization."""
    out = []
    m = d * d
    while len(out) < n:
        x = rng.uniform(0.0, 1.0, size=m - 1)
        last = 1.0 - x.sum()
        if last >= 0.0:
            out.append(np.append(x, last))
    return np.array(out)


def test_simplex_sampler_agrees_with_rejection_oracle():
    rng = np.random.default_rng(2024)
    d = 2
    n = 4000
    ours = sample_simplex_array(d, n, rng)
    oracle = rejection_sampler_oracle(d, n, rng)
    # two-sample KS on each coordinate at significance 0.01
    for j in range(d * d):
        assert stats.ks_2samp(ours[:, j], oracle[:, j]).pvalue > 0.01
    # and on the max coordinate, which drives enclosure membership
    assert stats.ks_2samp(ours.max(axis=1), oracle.max(axis=1)).pvalue > 0.01


def test_in_enclosure():
    assert in_enclosure(uniform_state(3))
    for d in (2, 3, 4):
        assert not in_enclosure(indicator_state(d, 0, 0))
        vertex = kernel_vertices(d)[0].state
        assert in_enclosure(vertex)  # boundary case, inclusive


def test_enclosure_sampler_respects_box():
    rng = np.random.default_rng(5)
    samples, proposed = sample_enclosure_array(3, 500, rng)
    assert samples.shape == (500, 9)
    assert proposed >= 500
    assert np.all(samples.max(axis=1) <= 1 / 3 + 1e-12)
    one = sample_enclosure(3, rng)
    assert in_enclosure(one)


def exact_enclosure_share(d):
    """P(max <= 1/d) on the uniform simplex, by inclusion-exclusion."""
    from math import comb

    m = d * d
    return sum((-1) ** j * comb(m, j) * max(0.0, 1 - j / d) ** (m - 1) for j in range(m + 1))


@pytest.mark.parametrize("d", (2, 4, 6))
def test_enclosure_acceptance_rate(d):
    # d=2 -> 0.5 exactly; d=4 -> 0.790 (also reported in the source data);
    # d=6 -> 0.9395 by the same argument (see notes on the reported 97.1%).
    rng = np.random.default_rng(100 + d)
    n = 100_000
    c = sample_simplex_array(d, n, rng)
    rate = in_enclosure_array(c, d).mean()
    assert rate == pytest.approx(exact_enclosure_share(d), abs=0.01)


def test_exact_enclosure_share_spot_values():
    assert exact_enclosure_share(2) == pytest.approx(0.5, abs=1e-12)
    assert exact_enclosure_share(4) == pytest.approx(0.790, abs=0.001)


@pytest.mark.parametrize("d,count", [(2, 6), (3, 12)])
def test_kernel_vertex_counts(d, count):
    verts = kernel_vertices(d)
    assert len(verts) == count
    for v in verts:
        nz = v.state.c[v.state.c > 0]
        assert len(nz) == d
        assert np.allclose(nz, 1.0 / d, atol=1e-15)


def test_kernel_barycenter_is_uniform():
    for d in (2, 3, 4):
        bary = kernel_vertex_array(d).mean(axis=0)
        assert np.allclose(bary, 1.0 / (d * d), atol=1e-12)


def test_state_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    states = [sample_simplex(3, rng) for _ in range(4)]
    states.append(BellDiagonalState(3, states[0].c, id="probe"))
    path = tmp_path / "states.jsonl"
    write_states(path, states)
    back = read_states(path)
    assert len(back) == 5
    for orig, loaded in zip(states, back):
        assert loaded.d == orig.d
        assert np.array_equal(loaded.c, orig.c)  # bit-exact round trip
    assert back[-1].id == "probe"
