import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from gtcm.interleave import (InterleaveContext, LinearInterleaver, derive, interleave_stream,
                             inverse_permute, is_prime, permute)
from oracles import table_interleave


def test_golden_vector():
    itl = derive(InterleaveContext(b"k", 1, 0, 251))
    assert (itl.a, itl.b) == (116, 121)
    assert list(itl.indices()) == table_interleave(b"k", 1, 0, 251)


def test_m2_always_identity_multiplier():
    for s in range(50):
        assert derive(InterleaveContext(b"key", s, 0, 2)).a == 1


def test_identity_and_worked_example():
    assert list(permute(LinearInterleaver(1, 0, 7), np.arange(7))) == list(range(7))
    out = permute(LinearInterleaver(2, 1, 5), np.array(list("abcde")))
    assert "".join(out) == "bdace"
    assert LinearInterleaver(2, 1, 5).a_inverse == 3


@pytest.mark.parametrize("m", [2, 3, 5, 101])
def test_bijective_for_every_coefficient_pair(m):
    base = np.arange(m)
    for a in range(1, m):
        for b in range(m):
            itl = LinearInterleaver(a, b, m)
            out = permute(itl, base)
            assert np.array_equal(np.sort(out), base)
            assert np.array_equal(inverse_permute(itl, out), base)


@given(st.binary(max_size=32), st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
def test_round_trip_random_contexts(key, s, i):
    itl = derive(InterleaveContext(key, s, i, 251))
    block = np.random.default_rng(s % 1000).integers(0, 64, 251)
    assert np.array_equal(inverse_permute(itl, permute(itl, block)), block)
    assert derive(InterleaveContext(key, s, i, 251)) == itl


def test_round_trip_thousand_blocks():
    rng = np.random.default_rng(0)
    for t in range(1000):
        itl = derive(InterleaveContext(rng.bytes(8), t, int(rng.integers(0, 100)), 251))
        block = rng.integers(0, 16, 251)
        assert np.array_equal(inverse_permute(itl, permute(itl, block)), block)


def test_context_changes_coefficients():
    seen = {}
    collisions = 0
    for t in range(10_000):
        key, s, i = bytes([t % 7]), t // 7, t % 3
        pair = (derive(InterleaveContext(key, s, i, 251)).a, derive(InterleaveContext(key, s, i, 251)).b)
        collisions += pair in seen
        seen[pair] = t
    # 250 * 251 possible pairs; birthday expectation for 10^4 draws
    pairs = 250 * 251
    expected = 10_000 - pairs * (1 - (1 - 1 / pairs) ** 10_000)
    assert abs(collisions - expected) < 5 * np.sqrt(expected)


def test_coefficients_uniform():
    a_counts = np.zeros(250, dtype=int)
    b_counts = np.zeros(251, dtype=int)
    for s in range(10_000):
        itl = derive(InterleaveContext(b"uniformity", s, 0, 251))
        a_counts[itl.a - 1] += 1
        b_counts[itl.b] += 1
    assert chisquare(a_counts).pvalue > 0.01
    assert chisquare(b_counts).pvalue > 0.01


def test_errors():
    with pytest.raises(ValueError):
        InterleaveContext(b"k", 0, 0, 250)
    with pytest.raises(ValueError):
        InterleaveContext(b"k", -1, 0, 251)
    with pytest.raises(ValueError):
        permute(LinearInterleaver(2, 1, 5), np.arange(6))
    with pytest.raises(ValueError):
        inverse_permute(LinearInterleaver(2, 1, 5), np.arange(4))
    with pytest.raises(ValueError):
        LinearInterleaver(0, 1, 5)
    with pytest.raises(ValueError):
        interleave_stream(b"k", 0, np.arange(300))


def test_stream_uses_block_index():
    data = np.arange(2 * 251)
    out = interleave_stream(b"k", 3, data)
    first = permute(derive(InterleaveContext(b"k", 3, 0)), data[:251])
    second = permute(derive(InterleaveContext(b"k", 3, 1)), data[251:])
    assert np.array_equal(out, np.concatenate([first, second]))
    assert np.array_equal(interleave_stream(b"k", 3, out, inverse=True), data)


def test_is_prime():
    assert [m for m in range(30) if is_prime(m)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
