import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hyperbasis.basis import generate_circular_set, generate_level_set, generate_random_set
from hyperbasis.encode import (
    AngleQuantizer,
    LabelCodec,
    ScalarQuantizer,
    SymbolTable,
    encode_angle,
    encode_record,
    encode_scalar,
    encode_sequence,
    encode_tuple,
    label_decode,
    label_encode,
    quantize_angle,
    quantize_scalar,
    wrap_angle,
)
from hyperbasis.hv import Hypervector, bind, hamming_distance, permute, random_hypervector

D = 10000


@pytest.fixture(scope="module")
def q11():
    return ScalarQuantizer(0.0, 10.0, generate_level_set(11, 256, 0))


def brute_nearest(grid, x):
    # first minimum wins: lowest index on ties
    return int(np.argmin([abs(x - g) for g in grid]))


def test_grid_points(q11):
    np.testing.assert_allclose(q11.grid, np.arange(11.0))
    assert q11.grid[0] == 0.0 and q11.grid[-1] == 10.0


@pytest.mark.parametrize("x,index", [(2.0, 2), (-5.0, 0), (2.5, 2), (10.0, 10), (99.0, 10), (7.49, 7)])
def test_quantize_scalar_examples(q11, x, index):
    assert quantize_scalar(q11, x) == index
    if 0 <= x <= 10:
        assert brute_nearest(q11.grid, x) == index


def test_quantize_scalar_rejects_non_finite(q11):
    for bad in (math.nan, math.inf):
        with pytest.raises(ValueError):
            quantize_scalar(q11, bad)


def test_quantizer_validation():
    basis = generate_level_set(4, 64, 0)
    with pytest.raises(ValueError):
        ScalarQuantizer(1.0, 1.0, basis)
    with pytest.raises(ValueError):
        ScalarQuantizer(0.0, math.inf, basis)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_quantizer_monotone(q11, x, y):
    lo, hi = sorted((x, y))
    assert quantize_scalar(q11, lo) <= quantize_scalar(q11, hi)


@given(st.floats(0, 10))
def test_quantizer_matches_brute_force(q11, x):
    assert quantize_scalar(q11, x) == brute_nearest(q11.grid, x)


def test_encode_scalar_endpoints(q11):
    assert encode_scalar(q11, 0.0) == q11.basis[0]
    assert encode_scalar(q11, 10.0) == q11.basis[10]
    dists = []
    for s in range(100):
        q = ScalarQuantizer(-1.0, 3.0, generate_level_set(12, D, s))
        dists.append(hamming_distance(encode_scalar(q, -1.0), encode_scalar(q, 3.0)))
    assert abs(np.mean(dists) - 0.5) <= 0.01


@pytest.fixture(scope="module")
def aq12():
    return AngleQuantizer(generate_circular_set(12, 256, 0.0, 0))


def brute_angle_bin(m, theta):
    gaps = [abs(math.remainder(theta - 2 * math.pi * i / m, 2 * math.pi)) for i in range(m)]
    return int(np.argmin(gaps))


@pytest.mark.parametrize("theta,index", [(0.0, 0), (2 * math.pi, 0), (math.pi, 6), (-0.01, 0), (2 * math.pi - 1e-9, 0)])
def test_quantize_angle_examples(aq12, theta, index):
    assert quantize_angle(aq12, theta) == index
    assert brute_angle_bin(12, theta) == index
    assert encode_angle(aq12, theta) == aq12.basis[index]


def test_quantize_angle_rejects_non_finite(aq12):
    with pytest.raises(ValueError):
        quantize_angle(aq12, math.nan)


@given(st.floats(-50, 50), st.integers(-5, 5))
@settings(max_examples=200)
def test_angle_wrap_consistency(aq12, theta, k):
    # skip angles within rounding distance of a bin boundary
    t = (theta % (2 * math.pi)) / (2 * math.pi) * 12
    assume(abs(t - math.floor(t) - 0.5) > 1e-6)
    assert quantize_angle(aq12, theta) == quantize_angle(aq12, theta + 2 * math.pi * k)
    assert quantize_angle(aq12, theta) == brute_angle_bin(12, theta)


def test_wrap_angle():
    assert wrap_angle(2 * math.pi) == 0.0
    assert 0 <= wrap_angle(-1e-20) < 2 * math.pi
    assert wrap_angle(-math.pi / 2) == pytest.approx(1.5 * math.pi)


@pytest.fixture(scope="module")
def codec():
    return LabelCodec(ScalarQuantizer(-1.0, 1.0, generate_level_set(100, D, 42)))


def test_label_roundtrip_on_grid(codec):
    for i, xi in enumerate(codec.quantizer.grid):
        assert codec.encode_index(xi) == i
        assert label_decode(codec, label_encode(codec, xi)) == codec.quantizer.value(i)


def test_label_clamp_and_totality(codec, rng):
    assert label_encode(codec, -50.0) == codec.basis[0]
    value = label_decode(codec, random_hypervector(D, rng))
    assert value in set(codec.quantizer.grid.tolist())
    with pytest.raises(ValueError):
        label_decode(codec, random_hypervector(10, rng))
    with pytest.raises(ValueError):
        label_encode(codec, math.nan)


def test_label_decode_survives_noise(codec, rng):
    for level in (0, 17, 50, 99):
        bits = codec.basis[level].bits().copy()
        flip = rng.choice(D, size=D // 100, replace=False)
        bits[flip] ^= 1
        assert label_decode(codec, Hypervector.from_bits(bits)) == codec.quantizer.value(level)


@pytest.fixture(scope="module")
def table():
    alphabet = list("abcdefghij")
    tie = random_hypervector(D, np.random.default_rng(99))
    return SymbolTable(alphabet, generate_random_set(len(alphabet), D, 7), tie)


def test_sequence_single_symbol(table):
    assert encode_sequence(table, "c") == permute(table.encode("c"), 1)


def test_sequence_order_matters():
    # two-operand bundles tie wherever the operands differ; both words then
    # copy the shared tie-breaker, so E[distance] = 1/4*1/2 + 1/2*1/2 + 1/4*0 = 3/8
    dists = []
    for s in range(30):
        t = SymbolTable("ab", generate_random_set(2, D, s), random_hypervector(D, np.random.default_rng(s)))
        dists.append(hamming_distance(encode_sequence(t, "ab"), encode_sequence(t, "ba")))
    assert all(abs(x - 0.375) <= 0.02 for x in dists)
    assert abs(np.mean(dists) - 0.375) <= 0.005


def test_sequence_deterministic_and_errors(table):
    assert encode_sequence(table, "abcd") == encode_sequence(table, "abcd")
    with pytest.raises(KeyError, match="'z'"):
        encode_sequence(table, "abz")
    with pytest.raises(ValueError):
        encode_sequence(table, "")
    with pytest.raises(ValueError):
        SymbolTable("ab", generate_random_set(3, 64, 0))
    with pytest.raises(ValueError):
        SymbolTable("aa", generate_random_set(2, 64, 0))


def test_record_encoding(rng):
    keys = generate_random_set(18, D, 3)
    values = [random_hypervector(D, rng) for _ in range(18)]
    tie = random_hypervector(D, rng)
    assert encode_record(keys, values[:1]) == bind(keys[0], values[0])
    rec = encode_record(keys, values, tie)
    assert hamming_distance(bind(rec, keys[0]), values[0]) < 0.45
    order = rng.permutation(18)
    shuffled_keys = type(keys)(keys.kind, 18, D, keys.r, keys.seed, tuple(keys[i] for i in order))
    assert encode_record(shuffled_keys, [values[i] for i in order], tie) == rec


def test_record_errors(rng):
    keys = generate_random_set(2, 64, 0)
    vals = [random_hypervector(64, rng) for _ in range(3)]
    with pytest.raises(ValueError):
        encode_record(keys, vals)
    with pytest.raises(ValueError):
        encode_record(keys, [])
    with pytest.raises(ValueError):
        encode_record(keys, [random_hypervector(65, rng)])
    with pytest.raises(ValueError):
        encode_record(generate_level_set(3, 64, 0), vals[:2])


def test_tuple_encoding(rng):
    y, d, h = (random_hypervector(D, rng) for _ in range(3))
    assert encode_tuple([y]) == y
    assert bind(encode_tuple([y, d, h]), bind(d, h)) == y
    assert encode_tuple([h, y, d]) == encode_tuple([y, d, h])
    with pytest.raises(ValueError):
        encode_tuple([])
