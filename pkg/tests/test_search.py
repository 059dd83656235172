import numpy as np
import pytest
from scipy.stats import chisquare

from gtcm import constellation as C
from gtcm.code import Validity, validate
from gtcm.search import (SearchSpaceTooLarge, SearchSpec, default_trials, full_search, generate_code,
                         random_search)


def test_generate_code_golden_sequence():
    rng = np.random.default_rng(2024)
    assert [generate_code(1, 2, (2,), rng).to_octal() for _ in range(5)] == [
        "(1 5)", "(0 1)", "(2 2)", "(7 6)", "(7 7)"]
    rng = np.random.default_rng(2024)
    assert [generate_code(2, 3, (1, 1), rng).to_octal() for _ in range(3)] == [
        "(0 2 0) (0 1 1)", "(3 3 3) (3 0 0)", "(3 0 0) (0 3 1)"]


def test_generate_code_degree_zero():
    rng = np.random.default_rng(1)
    seen = {generate_code(1, 2, (0,), rng).gen for _ in range(400)}
    assert seen == {((a, b),) for a in (0, 1) for b in (0, 1)}


def test_generate_code_uniform_over_64_matrices():
    rng = np.random.default_rng(11)
    counts = np.zeros(64, dtype=int)
    for _ in range(100_000):
        g0, g1 = generate_code(1, 2, (2,), rng).gen[0]
        counts[g0 * 8 + g1] += 1
    assert chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("k,n,regs,target,beta", [
    (1, 2, (2,), "QPSK", 3.98), (1, 3, (2,), "PSK8", 3.72), (2, 3, (0, 2), "PSK8", 3.01),
])
def test_random_search_examples(k, n, regs, target, beta):
    res = random_search(SearchSpec(k, n, regs, C.build(target), 10_000, seed=5))
    assert res.found and round(res.beta_db, 2) == beta
    assert validate(res.best_code) is Validity.VALID
    assert res.trials_run == 10_000 and 0 < res.valid_count <= 10_000


def test_full_search_examples():
    assert abs(full_search(1, 2, (1,), "QPSK").d_sq_free - 6.0) < 1e-9
    assert round(full_search(1, 2, (2,), "QPSK").beta_db, 2) == 3.98
    assert round(full_search(1, 3, (2,), "PSK8").beta_db, 2) == 3.72


def test_even_split_is_weaker_for_rate_two_thirds():
    # v=2 split as (1, 1) cannot reach the (0, 2) optimum
    assert round(full_search(2, 3, (1, 1), "PSK8").beta_db, 2) == 2.0
    assert round(full_search(2, 3, (0, 2), "PSK8").beta_db, 2) == 3.01


def test_full_search_cap():
    with pytest.raises(SearchSpaceTooLarge):
        full_search(2, 4, (3, 3), "QAM16")


def test_random_search_deterministic():
    spec = SearchSpec.from_total(1, 2, 3, "QPSK", 2000, seed=9)
    a, b = random_search(spec), random_search(spec)
    assert a.best_code == b.best_code and a.d_sq_free == b.d_sq_free


@pytest.mark.parametrize("k,n,v,target", [(1, 2, 2, "QPSK"), (1, 3, 2, "PSK8"), (2, 3, 2, "PSK8")])
def test_prune_does_not_change_best(k, n, v, target):
    spec = SearchSpec.from_total(k, n, v, target, 3000, seed=3)
    with_prune, without = random_search(spec, prune=True), random_search(spec, prune=False)
    assert with_prune.best_code == without.best_code
    assert with_prune.d_sq_free == without.d_sq_free


def test_no_valid_code_is_empty_result():
    # one trial with v + k < n can never be equiprobable
    res = random_search(SearchSpec(1, 3, (0,), C.build("PSK8"), 5, seed=0))
    assert not res.found and res.best_code is None and res.valid_count == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        SearchSpec.from_total(1, 2, 2, "PSK8", 10)
    with pytest.raises(ValueError):
        SearchSpec.from_total(1, 2, 2, "QPSK", 0)


def test_default_trials():
    assert default_trials(6) == 100_000 and default_trials(7) == 1_000_000
