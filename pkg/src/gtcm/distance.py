"""Squared free Euclidean distance of a code over a target constellation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .code import CodeSpec, Validity, validate
from .constellation import Modulation


class CatastrophicCodeError(RuntimeError):
    """The distance traversal did not settle within its sweep budget."""


@dataclass(frozen=True)
class FreeDistanceResult:
    d_sq_free: float
    merge_depth: int
    sweeps: int
    pruned: bool = False


class StateDistanceTable:
    """Symmetric state-pair distance table.

    Entries are stored once, at ``(min(S, T), max(S, T))``; indexing with
    either order returns the same value.
    """

    def __init__(self, n_states: int):
        self.dist = np.full((n_states, n_states), np.inf)

    @staticmethod
    def _key(s, t):
        return (s, t) if s <= t else (t, s)

    def __getitem__(self, pair):
        return self.dist[self._key(*pair)]

    def __setitem__(self, pair, value):
        self.dist[self._key(*pair)] = value

    def finite_pairs(self):
        a, b = np.nonzero(np.isfinite(self.dist))
        return list(zip(a.tolist(), b.tolist()))


def max_sweeps(code: CodeSpec) -> int:
    return 10 * code.v + 50


def _check_pair(code: CodeSpec, mod: Modulation):
    if mod.bits_per_symbol != code.n:
        raise ValueError(
            f"{mod.name} carries {mod.bits_per_symbol} bits per symbol but the code has n={code.n}"
        )


def update_distance(table: StateDistanceTable, code: CodeSpec, mod: Modulation,
                    s: int, x: int, st: int, xt: int, d_inf: float) -> float:
    """Extend the path pair ending in ``(s, st)`` by inputs ``(x, xt)``.

    Returns the (possibly lowered) free-distance accumulator.
    """
    nxt, out = code.trellis
    t, y = nxt[s, x], out[s, x]
    tt, yt = nxt[st, xt], out[st, xt]
    d = mod.sq_distances[y, yt]
    if s != st:
        d += table[s, st]
    if d < table[t, tt]:
        table[t, tt] = d
        if t == tt and d < d_inf:
            d_inf = float(d)
    return d_inf


def compute_distance_reference(code: CodeSpec, mod: Modulation, d_best: float = -math.inf):
    """Slow in-place traversal built directly on :func:`update_distance`.

    Updates become visible immediately (no per-sweep snapshot); a pair is
    extended again only after its entry has improved. Kept as a cross-check
    for :func:`compute_distance`. Returns ``(d_sq_free, table)``.
    """
    _check_pair(code, mod)
    table = StateDistanceTable(code.n_states)
    d_inf = math.inf
    for s in range(code.n_states):
        for x in range(code.n_inputs):
            for xt in range(code.n_inputs):
                if x != xt:
                    d_inf = update_distance(table, code, mod, s, x, s, xt, d_inf)
                    if d_inf <= d_best:
                        return d_inf, table
    extended = {}
    for _ in range(max_sweeps(code)):
        found = False
        for s, st in table.finite_pairs():
            value = table[s, st]
            if s == st or value >= d_inf or value >= extended.get((s, st), math.inf):
                continue
            found = True
            extended[(s, st)] = value
            for x in range(code.n_inputs):
                for xt in range(code.n_inputs):
                    d_inf = update_distance(table, code, mod, s, x, st, xt, d_inf)
                    if d_inf <= d_best:
                        return d_inf, table
        if not found:
            return d_inf, table
    raise CatastrophicCodeError(f"no convergence within {max_sweeps(code)} sweeps for {code}")


def compute_distance(code: CodeSpec, mod: Modulation, d_best: float = -math.inf,
                     check: bool = True) -> FreeDistanceResult:
    """Squared free distance of ``code`` on ``mod``.

    The traversal stops as soon as the running minimum drops to ``d_best`` or
    below, in which case the result is flagged ``pruned`` and its distance is
    only an upper bound. Pass ``check=False`` to skip validation when the
    caller has already validated the code.
    """
    _check_pair(code, mod)
    if check:
        status = validate(code)
        if status is Validity.CATASTROPHIC:
            raise CatastrophicCodeError(f"{code} is catastrophic")
    nxt, out = code.trellis
    d_inf, depth, sweeps, status, _, _ = _kernels.free_distance_kernel(
        nxt, out, mod.sq_distances, float(d_best), max_sweeps(code)
    )
    if status == _kernels.STATUS_CAP:
        raise CatastrophicCodeError(f"no convergence within {max_sweeps(code)} sweeps for {code}")
    return FreeDistanceResult(float(d_inf), int(depth), int(sweeps), status == _kernels.STATUS_PRUNED)


def distance_trace(code: CodeSpec, mod: Modulation):
    """Run the traversal and return ``(result, table, active_min_per_sweep)``."""
    _check_pair(code, mod)
    nxt, out = code.trellis
    d_inf, depth, sweeps, status, D, amin = _kernels.free_distance_kernel(
        nxt, out, mod.sq_distances, -math.inf, max_sweeps(code)
    )
    if status == _kernels.STATUS_CAP:
        raise CatastrophicCodeError(f"no convergence within {max_sweeps(code)} sweeps for {code}")
    table = StateDistanceTable(code.n_states)
    table.dist = D
    return FreeDistanceResult(float(d_inf), int(depth), int(sweeps)), table, amin[1:sweeps + 1]


def coding_gain_db(d_sq_free: float, source_mod: Modulation) -> float:
    """Asymptotic coding gain in dB over the uncoded source modulation."""
    if not d_sq_free > 0:
        raise ValueError(f"squared free distance must be positive, got {d_sq_free}")
    return 10.0 * math.log10(d_sq_free / source_mod.min_sq_distance)
