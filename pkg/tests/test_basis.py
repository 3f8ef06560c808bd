import math

import numpy as np
import pytest

from hyperbasis.basis import (
    BasisKind,
    BasisSet,
    angular_distance,
    check_circular_closure,
    circular_transitions,
    distance_matrix,
    generate_basis,
    generate_circular_set,
    generate_level_set,
    generate_level_set_interpolated,
    generate_random_set,
    similarity_csv,
    similarity_matrix,
    transitions_per_run,
)
from hyperbasis.hv import bind, bind_all

from .oracles import exact_circular_distances, level_bit_model, triangle_law

D = 10000
SEEDS = range(100)


def mean_distances(make, seeds=SEEDS):
    return np.mean([distance_matrix(make(s)) for s in seeds], axis=0)


def upper_pairs(m):
    return [(i, j) for i in range(m) for j in range(i + 1, m)]


def test_random_set_is_flat():
    basis = generate_random_set(12, D, 1)
    dist = distance_matrix(basis)
    off = dist[~np.eye(12, dtype=bool)]
    assert np.all(np.abs(off - 0.5) <= 0.02)


def test_random_set_edge_cases():
    assert len(generate_random_set(1, D, 0)) == 1
    assert generate_random_set(12, 500, 9) == generate_random_set(12, 500, 9)
    assert generate_random_set(5, 100, 0).r == 1.0
    for m, d in ((0, 10), (3, 0)):
        with pytest.raises(ValueError):
            generate_random_set(m, d, 0)


def test_level_threshold_values():
    # m=3 has a single interior level at threshold (3-2)/(3-1)
    basis = generate_level_set(3, 4000, 5)
    rng = np.random.default_rng(5)
    rng.integers(0, 2**64, size=63, dtype=np.uint64)
    rng.integers(0, 2**64, size=63, dtype=np.uint64)
    phi = rng.random(4000)
    first, mid, last = (v.bits() for v in basis)
    np.testing.assert_array_equal(mid, np.where(phi < 0.5, first, last))


def test_level_set_rejects_small_m():
    with pytest.raises(ValueError):
        generate_level_set(1, D, 0)
    with pytest.raises(ValueError):
        generate_level_set_interpolated(12, D, 1.5, 0)
    with pytest.raises(ValueError):
        generate_level_set_interpolated(12, D, -0.1, 0)


def test_level_endpoints_and_neighbours():
    mean = mean_distances(lambda s: generate_level_set(12, D, s))
    assert abs(mean[0, 11] - 0.5) <= 0.01
    assert abs(mean[0, 1] - 1 / 22) <= 0.005


@pytest.mark.parametrize("m", [3, 5, 12, 33, 64])
def test_level_expected_distance_is_linear(m):
    mean = mean_distances(lambda s: generate_level_set(m, D, 1000 * m + s))
    i, j = np.triu_indices(m, 1)
    target = (j - i) / (2 * (m - 1))
    assert np.max(np.abs(mean[i, j] - target)) <= 0.01


def test_interpolated_r0_is_algorithm_one():
    for seed in range(5):
        assert generate_level_set_interpolated(12, 777, 0.0, seed).rows.tobytes() == (
            generate_level_set(12, 777, seed).rows.tobytes()
        )


@pytest.mark.parametrize(
    "m,r,n", [(12, 0.0, 11), (12, 1.0, 1), (13, 0.5, 6), (37, 0.5, 18), (37, 0.1, 32), (5, 0.99, 1)]
)
def test_transitions_per_run(m, r, n):
    assert transitions_per_run(m, r) == n


def test_interpolated_r1_is_quasi_orthogonal():
    mean = mean_distances(lambda s: generate_level_set_interpolated(12, D, 1.0, s))
    i, j = np.triu_indices(12, 1)
    assert np.max(np.abs(mean[i, j] - 0.5)) <= 0.01


def test_interpolated_half_r_neighbour_distance():
    mean = mean_distances(lambda s: generate_level_set_interpolated(13, D, 0.5, s))
    neighbours = np.diag(mean, 1)
    assert np.max(np.abs(neighbours - 1 / 12)) <= 0.01
    # runs restart every 6 steps: levels 0 and 6 are a full run apart
    assert abs(mean[0, 6] - 0.5) <= 0.01
    assert abs(mean[0, 12] - 0.5) <= 0.01


def test_interpolated_runs_share_endpoints():
    basis = generate_level_set_interpolated(13, 2000, 0.5, 3)
    # with n=6, bit-wise each level lies between the run endpoints 0/6 and 6/12
    for lo, hi in ((0, 6), (6, 12)):
        a, b = basis[lo].bits(), basis[hi].bits()
        for k in range(lo + 1, hi):
            v = basis[k].bits()
            assert np.all((v == a) | (v == b))


def test_bit_model_matches_level_generator():
    # oracle sanity: scalar model reproduces the two-endpoint level construction on single bits
    assert level_bit_model(5, 4, [0.6], 0, [1]) == [0, 0, 1, 1, 1]
    assert level_bit_model(5, 4, [0.1], 0, [1]) == [0, 0, 0, 0, 1]


def test_exact_circular_oracle_is_triangle():
    for m in (4, 6, 12, 20):
        np.testing.assert_allclose(exact_circular_distances(m), triangle_law(m), atol=1e-12)


def test_circular_distance_law():
    mean = mean_distances(lambda s: generate_circular_set(12, D, 0.0, s))
    exact = exact_circular_distances(12)
    assert np.max(np.abs(mean - exact)) <= 0.01
    assert abs(mean[0, 6] - 0.5) <= 0.01
    for i in range(12):
        assert abs(mean[i, (i + 6) % 12] - 0.5) <= 0.01


def test_circular_rotational_stationarity():
    mean = mean_distances(lambda s: generate_circular_set(12, D, 0.0, 500 + s))
    for k in range(1, 12):
        ring = [mean[i, (i + k) % 12] for i in range(12)]
        assert max(ring) - min(ring) <= 0.02


def test_circular_closure_and_transitions():
    for seed in range(10):
        basis = generate_circular_set(12, 3000, 0.0, seed)
        assert check_circular_closure(basis)
        steps = circular_transitions(basis)
        assert len(steps) == 6
        assert bind(basis[0], bind_all(steps)) == basis[6]
        assert all(steps[i] == bind(basis[i], basis[i + 1]) for i in range(6))


def test_circular_closure_with_r():
    for r in (0.1, 0.5, 1.0):
        assert check_circular_closure(generate_circular_set(20, 2000, r, 4))


def test_circular_r0_phase_one_is_level_set():
    circ = generate_circular_set(12, 999, 0.0, 8)
    level = generate_level_set(7, 999, 8)
    assert circ.vectors[:7] == level.vectors


def test_circular_r1_is_quasi_orthogonal():
    mean = mean_distances(lambda s: generate_circular_set(12, D, 1.0, s))
    i, j = np.triu_indices(12, 1)
    assert np.max(np.abs(mean[i, j] - 0.5)) <= 0.01


def test_odd_circular_uses_every_other_point():
    odd = generate_circular_set(7, 1000, 0.0, 2)
    full = generate_circular_set(14, 1000, 0.0, 2)
    assert odd.vectors == full.vectors[::2]
    mean = mean_distances(lambda s: generate_circular_set(7, D, 0.0, s))
    np.testing.assert_allclose(mean, triangle_law(14)[::2, ::2], atol=0.01)


def test_circular_rejects_bad_sizes():
    for m in (1, 2):
        with pytest.raises(ValueError):
            generate_circular_set(m, D, 0.0, 0)
    with pytest.raises(ValueError):
        generate_circular_set(12, D, 2.0, 0)
    with pytest.raises(ValueError):
        circular_transitions(generate_circular_set(7, 100, 0.0, 0))


def test_angular_distance():
    assert angular_distance(0, math.pi) == pytest.approx(1.0)
    assert angular_distance(1.3, 1.3) == 0.0
    assert angular_distance(0, math.pi / 2) == pytest.approx(0.5)
    assert angular_distance(0.2, 5.0) == pytest.approx(angular_distance(5.0, 0.2))
    assert angular_distance(0.0, 2 * math.pi) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        angular_distance(float("nan"), 0)
    with pytest.raises(ValueError):
        angular_distance(0, float("inf"))


def test_similarity_matrix_shape_and_values():
    for kind in BasisKind:
        basis = generate_basis(kind, 12, D, 3)
        sim = similarity_matrix(basis)
        assert sim.shape == (12, 12)
        np.testing.assert_array_equal(np.diag(sim), 1.0)
        np.testing.assert_array_equal(sim, sim.T)
    circ = similarity_matrix(generate_circular_set(12, D, 0.0, 3))
    assert abs(circ[0, 6] - 0.5) <= 0.02
    law = 1 - triangle_law(12)
    assert np.max(np.abs(circ - law)) <= 0.02


def test_determinism_all_kinds():
    for kind in BasisKind:
        for r in (0.0, 0.3, 1.0):
            a = generate_basis(kind, 9, 500, 77, r)
            b = generate_basis(kind, 9, 500, 77, r)
            assert a == b and a.rows.tobytes() == b.rows.tobytes()


def test_container_roundtrip(tmp_path):
    basis = generate_circular_set(9, 130, 0.25, 2**63 + 5)
    blob = basis.to_bytes()
    assert blob[:4] == b"HBBS"
    back = BasisSet.from_bytes(blob)
    assert back == basis and back.kind is BasisKind.CIRCULAR and back.r == 0.25
    basis.save(tmp_path / "b.bin")
    assert BasisSet.load(tmp_path / "b.bin") == basis
    with pytest.raises(ValueError):
        BasisSet.from_bytes(blob[:-3])
    with pytest.raises(ValueError):
        BasisSet.from_bytes(b"XXXX" + blob[4:])


def test_similarity_csv():
    basis = generate_random_set(3, 64, 0)
    lines = similarity_csv(basis).splitlines()
    assert lines[0] == "i,j,similarity"
    assert len(lines) == 1 + 9
    assert lines[1] == "1,1,1.00000000"
    rows = [l.split(",") for l in lines[1:]]
    sim = similarity_matrix(basis)
    for i, j, s in rows:
        assert float(s) == pytest.approx(sim[int(i) - 1, int(j) - 1], abs=1e-8)
