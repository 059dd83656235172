import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gtcm import constellation as C
from gtcm.code import CodeSpec, Validity, parse_generator, split_registers, validate
from gtcm.distance import (CatastrophicCodeError, StateDistanceTable, coding_gain_db, compute_distance,
                           compute_distance_reference, distance_trace, update_distance)
from gtcm.search import generate_code
from oracles import brute_free_distance, dijkstra_free_distance

SHAPES = [(1, 2, "QPSK"), (1, 3, "PSK8"), (2, 3, "PSK8")]


@st.composite
def valid_codes(draw, max_v=3):
    k, n, target = draw(st.sampled_from(SHAPES))
    v = draw(st.integers(max(n - k, 1), max_v))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    for _ in range(200):
        code = generate_code(k, n, split_registers(v, k), rng)
        if validate(code) is Validity.VALID:
            return code, C.build(target)
    return parse_generator("(1 3)"), C.build("QPSK")


@pytest.mark.parametrize("text,target,d_sq,beta,source", [
    ("(1 3)", "QPSK", 6.0, 1.76, "BPSK"),
    ("(2 7)", "QPSK", 10.0, 3.98, "BPSK"),
    ("(0 0 1) (2 5 1)", "PSK8", 4.0, 3.01, "QPSK"),
])
def test_published_examples(text, target, d_sq, beta, source):
    res = compute_distance(parse_generator(text), C.build(target))
    assert abs(res.d_sq_free - d_sq) < 1e-9
    assert round(coding_gain_db(res.d_sq_free, C.build(source)), 2) == beta


def test_merge_depths_by_oracle():
    # (1 3): diverge with (3 vs 0), remerge with (2 vs 0): two steps
    assert compute_distance(parse_generator("(1 3)"), C.build("QPSK")).merge_depth == 2
    assert compute_distance(parse_generator("(2 7)"), C.build("QPSK")).merge_depth == 3


def test_update_distance_examples():
    code, mod = parse_generator("(1 3)"), C.build("QPSK")
    table = StateDistanceTable(code.n_states)
    d = update_distance(table, code, mod, 0, 1, 0, 0, math.inf)
    assert table[1, 0] == 2.0 and table[0, 1] == 2.0 and d == math.inf
    d = update_distance(table, code, mod, 1, 0, 0, 0, d)
    assert d == 6.0 and table[0, 0] == 6.0
    before = table.dist.copy()
    d = update_distance(table, code, mod, 1, 0, 0, 0, d)
    assert np.array_equal(before, table.dist) and d == 6.0


@pytest.mark.parametrize("d,src,expected", [(6.0, "BPSK", 1.76), (4.0, "BPSK", 0.0), (4.0, "QPSK", 3.01)])
def test_coding_gain_examples(d, src, expected):
    assert round(coding_gain_db(d, C.build(src)), 2) == expected


def test_coding_gain_rejects_non_positive():
    with pytest.raises(ValueError):
        coding_gain_db(0.0, C.build("BPSK"))


def test_catastrophic_rejected():
    with pytest.raises(CatastrophicCodeError):
        compute_distance(parse_generator("(3 6)"), C.build("QPSK"))


def test_modulation_mismatch():
    with pytest.raises(ValueError):
        compute_distance(parse_generator("(1 3)"), C.build("PSK8"))


@given(valid_codes())
def test_matches_brute_force_enumeration(pair):
    code, mod = pair
    res = compute_distance(code, mod)
    assert abs(res.d_sq_free - brute_free_distance(code, mod)) < 1e-9
    assert abs(res.d_sq_free - dijkstra_free_distance(code, mod)) < 1e-9
    assert res.d_sq_free > 0


@given(valid_codes())
def test_matches_reference_traversal(pair):
    code, mod = pair
    ref, _ = compute_distance_reference(code, mod)
    assert abs(compute_distance(code, mod).d_sq_free - ref) < 1e-9


@given(valid_codes(), st.floats(0.0, 12.0))
def test_prune_soundness(pair, d_best):
    code, mod = pair
    exact = compute_distance(code, mod).d_sq_free
    res = compute_distance(code, mod, d_best)
    if res.d_sq_free <= d_best:
        assert exact <= d_best + 1e-12
        assert res.d_sq_free >= exact - 1e-12
    else:
        assert abs(res.d_sq_free - exact) < 1e-9 and not res.pruned
    assert abs(compute_distance(code, mod, 0.0).d_sq_free - exact) < 1e-9


@given(valid_codes())
def test_table_canonical_and_bounded(pair):
    code, mod = pair
    res, table, active_min = distance_trace(code, mod)
    lower = np.tril(np.isfinite(table.dist), -1)
    assert not lower.any()  # only (min, max) entries are ever written
    for a, b in table.finite_pairs():
        assert table[a, b] == table[b, a]
    # the smallest extended entry never falls between sweeps
    finite = active_min[np.isfinite(active_min)]
    assert np.all(np.diff(finite) >= -1e-12)
    assert np.all(finite < res.d_sq_free + 1e-9)


@given(valid_codes())
@settings(max_examples=30)
def test_entries_only_decrease(pair):
    code, mod = pair
    table = StateDistanceTable(code.n_states)
    d_inf = math.inf
    rng = np.random.default_rng(0)
    prev = table.dist.copy()
    for _ in range(300):
        s, st_ = rng.integers(0, code.n_states, 2)
        x, xt = rng.integers(0, code.n_inputs, 2)
        if s == st_ and x == xt:
            continue
        d_inf = update_distance(table, code, mod, int(s), int(x), int(st_), int(xt), d_inf)
        assert np.all(table.dist <= prev)
        prev = table.dist.copy()
