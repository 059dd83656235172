"""Soft-decision maximum-likelihood sequence decoding."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _kernels
from .code import CodeSpec, _tail_rows, tail_end_state
from .constellation import Modulation


@lru_cache(maxsize=256)
def predecessors(code: CodeSpec):
    """Per-state predecessor ``(state, input, output)`` arrays, ascending by state.

    Every state of a feed-forward encoder has exactly ``2**k`` incoming
    transitions, so the arrays have shape ``(2**v, 2**k)``.
    """
    nxt, out = code.trellis
    order = np.lexsort((np.tile(np.arange(code.n_inputs), code.n_states),
                        np.repeat(np.arange(code.n_states), code.n_inputs),
                        nxt.ravel()))
    src = order // code.n_inputs
    inp = order % code.n_inputs
    shape = (code.n_states, code.n_inputs)
    pred_s = src.reshape(shape)
    pred_x = inp.reshape(shape)
    pred_y = out[pred_s, pred_x]
    if not np.all(nxt[pred_s, pred_x] == np.arange(code.n_states)[:, None]):
        raise AssertionError("trellis does not have 2**k predecessors per state")
    return pred_s, pred_x, pred_y


def _trellis_constraints(code: CodeSpec, steps: int, terminated: bool, start_state: int,
                         tail_inputs):
    """``(start, forced, end)`` arguments for the block kernels."""
    if not 0 <= start_state < code.n_states:
        raise ValueError(f"start state {start_state} out of range")
    forced = np.full(steps, -1, dtype=np.int64)
    if not terminated:
        return start_state, forced, -1
    if steps < code.tail_steps:
        raise ValueError("block shorter than the termination tail")
    tail = _tail_rows(code, tail_inputs) @ (1 << np.arange(code.k))
    if code.tail_steps:
        forced[steps - code.tail_steps:] = tail
    return start_state, forced, tail_end_state(code, tail)


def _inputs_to_bits(decided, k):
    return ((decided[:, None] >> np.arange(k)) & 1).astype(np.uint8).ravel()


def decode(code: CodeSpec, mod: Modulation, received, terminated: bool = True,
           traceback_depth: int | None = None, start_state: int = 0,
           tail_inputs=None) -> np.ndarray:
    """Decode received complex samples back to information bits.

    With ``terminated`` the tail inputs are pinned (zeros unless
    ``tail_inputs`` is given), the survivor ending in the state they lead to
    is chosen and the ``max(v_i)`` tail steps are dropped from the output.
    ``start_state`` must match the encoder's. ``traceback_depth`` switches to
    sliding-window decoding (unterminated streams from the zero state only).
    """
    r = np.ascontiguousarray(received, dtype=np.complex128).ravel()
    if r.size == 0:
        raise ValueError("nothing to decode")
    if mod.bits_per_symbol != code.n:
        raise ValueError(f"{mod.name} does not match code with n={code.n}")
    pred_s, pred_x, pred_y = predecessors(code)
    if traceback_depth is not None:
        if terminated or start_state:
            raise ValueError("sliding-window decoding applies to unterminated streams from state 0")
        decided = _kernels.viterbi_stream_kernel(r, mod.points, pred_s, pred_x, pred_y,
                                                 int(traceback_depth))
    else:
        start, forced, end = _trellis_constraints(code, r.size, terminated, start_state, tail_inputs)
        decided, _ = _kernels.viterbi_kernel(r, mod.points, pred_s, pred_x, pred_y, start, forced, end)
    if terminated:
        decided = decided[: r.size - code.tail_steps]
    return _inputs_to_bits(decided, code.k)


def hamming_table(n: int) -> np.ndarray:
    labels = np.arange(1 << n)
    x = labels[:, None] ^ labels[None, :]
    return np.array([[bin(v).count("1") for v in row] for row in x], dtype=np.float64)


def decode_hard(code: CodeSpec, mod: Modulation, received, terminated: bool = True,
                start_state: int = 0, tail_inputs=None) -> np.ndarray:
    """Binary-receiver decoding: hard symbol decisions, then a Hamming-metric trellis search.

    This is how a conventional binary convolutional code is decoded behind a
    bit-labelled constellation; it ignores the soft Euclidean information.
    """
    from .constellation import nearest

    r = np.asarray(received, dtype=np.complex128).ravel()
    if r.size == 0:
        raise ValueError("nothing to decode")
    labels = nearest(mod, r).astype(np.int64)
    pred_s, pred_x, pred_y = predecessors(code)
    start, forced, end = _trellis_constraints(code, r.size, terminated, start_state, tail_inputs)
    decided = _kernels.viterbi_table_kernel(labels, hamming_table(code.n), pred_s, pred_x,
                                            pred_y, start, forced, end)
    if terminated:
        decided = decided[: r.size - code.tail_steps]
    return _inputs_to_bits(decided, code.k)


def path_metric(code: CodeSpec, mod: Modulation, received, bits, terminated: bool = True) -> float:
    """Total squared distance between ``received`` and the codeword for ``bits``."""
    from .code import encode

    sym = encode(code, bits, terminate=terminated)
    r = np.asarray(received, dtype=np.complex128)
    return float(np.sum(np.abs(r - mod.points[sym]) ** 2))


def default_traceback(code: CodeSpec) -> int:
    return max(6 * code.v, 1)
