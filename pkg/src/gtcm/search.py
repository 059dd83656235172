"""Random and exhaustive searches for good codes."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import constellation
from .code import CodeSpec, Validity, split_registers, validate
from .constellation import Modulation
from .distance import compute_distance, coding_gain_db

FULL_SEARCH_CAP = 1 << 20


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    k: int
    n: int
    reg_lengths: tuple
    target: Modulation
    trials: int
    seed: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trial budget must be at least 1")
        if self.target.bits_per_symbol != self.n:
            raise ValueError(f"{self.target.name} does not carry n={self.n} bits per symbol")
        if len(self.reg_lengths) != self.k:
            raise ValueError(f"expected {self.k} register lengths")

    @classmethod
    def from_total(cls, k, n, v, target, trials, seed=None):
        if isinstance(target, str):
            target = constellation.build(target)
        return cls(k, n, split_registers(v, k), target, trials, seed)


@dataclass
class SearchResult:
    best_code: CodeSpec | None
    d_sq_free: float
    beta_db: float
    trials_run: int = 0
    valid_count: int = 0
    pruned_count: int = 0

    @property
    def found(self) -> bool:
        return self.best_code is not None


def default_trials(v: int) -> int:
    return 100_000 if v <= 6 else 1_000_000


def generate_code(k: int, n: int, reg_lengths, rng: np.random.Generator) -> CodeSpec:
    """Draw every generator coefficient independently and uniformly from {0, 1}."""
    gen = tuple(
        tuple(int(g) for g in rng.integers(0, 1 << (vi + 1), size=n)) for vi in reg_lengths
    )
    return CodeSpec(k, n, tuple(reg_lengths), gen)


def _source_for(k: int) -> Modulation:
    return constellation.for_bits(k)


def _evaluate(code, target, best, result, prune):
    if validate(code) is not Validity.VALID:
        return best, None
    result.valid_count += 1
    res = compute_distance(code, target, best if prune else -math.inf, check=False)
    if res.pruned:
        result.pruned_count += 1
        return best, None
    if res.d_sq_free > best:
        return res.d_sq_free, code
    return best, None


def _finish(result: SearchResult, best: float, k: int) -> SearchResult:
    if result.best_code is not None:
        result.d_sq_free = best
        result.beta_db = coding_gain_db(best, _source_for(k))
    return result


def random_search(spec: SearchSpec, prune: bool = True) -> SearchResult:
    """Keep the code with the largest squared free distance over ``spec.trials`` draws.

    If no valid code turns up, the result has ``best_code=None``.
    """
    rng = np.random.default_rng(spec.seed)
    result = SearchResult(None, 0.0, -math.inf)
    best = 0.0
    for _ in range(spec.trials):
        result.trials_run += 1
        code = generate_code(spec.k, spec.n, spec.reg_lengths, rng)
        best, winner = _evaluate(code, spec.target, best, result, prune)
        if winner is not None:
            result.best_code = winner
    return _finish(result, best, spec.k)


def search_space_size(k: int, n: int, reg_lengths) -> int:
    return 1 << sum(n * (vi + 1) for vi in reg_lengths)


def full_search(k: int, n: int, reg_lengths, target: Modulation | str,
                cap: int = FULL_SEARCH_CAP, prune: bool = True) -> SearchResult:
    """Evaluate every generator matrix with the given register lengths."""
    if isinstance(target, str):
        target = constellation.build(target)
    reg_lengths = tuple(reg_lengths)
    size = search_space_size(k, n, reg_lengths)
    if size > cap:
        raise SearchSpaceTooLarge(f"full search over {size} codes exceeds cap {cap}")
    ranges = [range(1 << (vi + 1)) for vi in reg_lengths for _ in range(n)]
    result = SearchResult(None, 0.0, -math.inf)
    best = 0.0
    for flat in itertools.product(*ranges):
        result.trials_run += 1
        gen = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(k))
        code = CodeSpec(k, n, reg_lengths, gen)
        best, winner = _evaluate(code, target, best, result, prune)
        if winner is not None:
            result.best_code = winner
    return _finish(result, best, k)
