"""Feed-forward rate-k/n convolutional codes.

A code is given by per-input register lengths ``v_i`` and a k x n matrix of
generator masks. Bit ``l`` of ``gen[i][j]`` is the coefficient of ``D**l`` in
``g_ij(D)``, so bit 0 taps the current input bit ``i`` and bit ``l`` taps that
input delayed by ``l`` steps. Output column ``j`` contributes ``2**j`` to the
output symbol.

The encoder state packs the k registers into one integer: register ``i``
occupies ``v_i`` consecutive bits starting at ``sum(v_0..v_{i-1})``, with the
most recent input bit lowest.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

_GROUP_RE = re.compile(r"\(([^()]*)\)")


class Validity(str, enum.Enum):
    VALID = "valid"
    CATASTROPHIC = "catastrophic"
    NON_EQUIPROBABLE = "non_equiprobable"


@dataclass(frozen=True)
class CodeSpec:
    k: int
    n: int
    reg_lengths: tuple
    gen: tuple

    def __post_init__(self):
        object.__setattr__(self, "reg_lengths", tuple(int(v) for v in self.reg_lengths))
        object.__setattr__(self, "gen", tuple(tuple(int(g) for g in row) for row in self.gen))
        if not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if len(self.reg_lengths) != self.k:
            raise ValueError(f"expected {self.k} register lengths, got {len(self.reg_lengths)}")
        if any(v < 0 for v in self.reg_lengths):
            raise ValueError("register lengths must be non-negative")
        if len(self.gen) != self.k or any(len(row) != self.n for row in self.gen):
            raise ValueError(f"generator matrix must be {self.k} x {self.n}")
        for i, row in enumerate(self.gen):
            limit = 1 << (self.reg_lengths[i] + 1)
            for g in row:
                if not 0 <= g < limit:
                    raise ValueError(
                        f"generator {g:o} (octal) in row {i} exceeds degree {self.reg_lengths[i]}"
                    )

    @property
    def v(self) -> int:
        return sum(self.reg_lengths)

    @property
    def n_states(self) -> int:
        return 1 << self.v

    @property
    def n_inputs(self) -> int:
        return 1 << self.k

    @property
    def n_outputs(self) -> int:
        return 1 << self.n

    @property
    def tail_steps(self) -> int:
        """Zero-input steps needed to flush every register."""
        return max(self.reg_lengths)

    @cached_property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for v in self.reg_lengths:
            out.append(acc)
            acc += v
        return tuple(out)

    @property
    def trellis(self):
        """``(next_state, output)`` arrays of shape ``(2**v, 2**k)``."""
        return _trellis(self)

    def to_octal(self) -> str:
        return " ".join("(" + " ".join(f"{g:o}" for g in row) + ")" for row in self.gen)

    def __str__(self):
        return f"CodeSpec(k={self.k}, n={self.n}, v={self.reg_lengths}, G={self.to_octal()})"


def split_registers(v: int, k: int) -> tuple:
    """Spread ``v`` register bits over ``k`` inputs, remainder to low inputs."""
    base, rem = divmod(v, k)
    return tuple(base + (1 if i < rem else 0) for i in range(k))


def _row_degree(row) -> int:
    return max(max(g.bit_length() for g in row) - 1, 0)


def parse_octal_rows(text: str) -> list:
    groups = _GROUP_RE.findall(text)
    leftover = _GROUP_RE.sub("", text).strip()
    if not groups or leftover:
        raise ValueError(f"malformed generator text {text!r}")
    rows = []
    for grp in groups:
        tokens = grp.split()
        if not tokens:
            raise ValueError(f"empty generator row in {text!r}")
        try:
            rows.append([int(t, 8) for t in tokens])
        except ValueError:
            raise ValueError(f"non-octal value in {text!r}") from None
    return rows


def parse_generator(text: str, k: int | None = None, n: int | None = None, reg_lengths=None) -> CodeSpec:
    """Parse an octal generator matrix such as ``"(0 0 1) (2 5 1)"``.

    When ``reg_lengths`` is omitted, each register length is taken as the
    largest polynomial degree in its row.
    """
    rows = parse_octal_rows(text)
    if k is not None and len(rows) != k:
        raise ValueError(f"expected {k} generator rows, got {len(rows)}")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError(f"generator rows have unequal lengths in {text!r}")
    if n is not None and width != {n}:
        raise ValueError(f"expected {n} generator columns, got {width.pop()}")
    if reg_lengths is None:
        reg_lengths = [_row_degree(r) for r in rows]
    return CodeSpec(len(rows), len(rows[0]), tuple(reg_lengths), tuple(map(tuple, rows)))


def reversed_code(code: CodeSpec) -> CodeSpec:
    """Read every mask MSB-first within its row's ``v_i + 1`` bits."""
    rows = []
    for i, row in enumerate(code.gen):
        width = code.reg_lengths[i] + 1
        rows.append(tuple(int(format(g, f"0{width}b")[::-1], 2) for g in row))
    return CodeSpec(code.k, code.n, code.reg_lengths, tuple(rows))


def _parity(x):
    x = np.asarray(x, dtype=np.int64)
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x = x >> 1
    return p


def step(code: CodeSpec, state: int, x: int):
    """One encoder transition: returns ``(next_state, output_symbol)``."""
    if not 0 <= x < code.n_inputs:
        raise ValueError(f"input {x} out of range for k={code.k}")
    if not 0 <= state < code.n_states:
        raise ValueError(f"state {state} out of range for v={code.v}")
    windows = []
    nxt = 0
    for i, (vi, off) in enumerate(zip(code.reg_lengths, code.offsets)):
        reg = (state >> off) & ((1 << vi) - 1)
        w = (reg << 1) | ((x >> i) & 1)
        windows.append(w)
        nxt |= (w & ((1 << vi) - 1)) << off
    y = 0
    for j in range(code.n):
        bit = 0
        for i in range(code.k):
            bit ^= bin(code.gen[i][j] & windows[i]).count("1") & 1
        y |= bit << j
    return nxt, y


@lru_cache(maxsize=256)
def _trellis(code: CodeSpec):
    states = np.arange(code.n_states, dtype=np.int64)[:, None]
    inputs = np.arange(code.n_inputs, dtype=np.int64)[None, :]
    nxt = np.zeros((code.n_states, code.n_inputs), dtype=np.int64)
    out = np.zeros_like(nxt)
    windows = []
    for i, (vi, off) in enumerate(zip(code.reg_lengths, code.offsets)):
        reg = (states >> off) & ((1 << vi) - 1)
        w = (reg << 1) | ((inputs >> i) & 1)
        windows.append(w)
        nxt |= (w & ((1 << vi) - 1)) << off
    for j in range(code.n):
        bit = np.zeros_like(nxt)
        for i in range(code.k):
            bit ^= _parity(windows[i] & code.gen[i][j])
        out |= bit << j
    nxt.setflags(write=False)
    out.setflags(write=False)
    return nxt, out


def _input_bits(bits, k: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} is not a multiple of k={k}")
    if np.any(bits > 1):
        raise ValueError("bits must be 0 or 1")
    return bits.reshape(-1, k)


def state_prefix(code: CodeSpec, state: int) -> np.ndarray:
    """Input steps (shape ``(tail_steps, k)``) that drive the zero state into ``state``."""
    x = np.zeros((code.tail_steps, code.k), dtype=np.int64)
    for i, (vi, off) in enumerate(zip(code.reg_lengths, code.offsets)):
        for b in range(vi):
            x[code.tail_steps - 1 - b, i] = (state >> (off + b)) & 1
    return x


def tail_end_state(code: CodeSpec, tail_inputs) -> int:
    """State reached after a full ``tail_steps`` tail, whatever the state before it."""
    nxt, _ = code.trellis
    state = 0
    for x in np.asarray(tail_inputs, dtype=np.int64).ravel():
        state = int(nxt[state, x])
    return state


def _tail_rows(code: CodeSpec, tail_inputs) -> np.ndarray:
    if tail_inputs is None:
        return np.zeros((code.tail_steps, code.k), dtype=np.int64)
    tail = np.asarray(tail_inputs, dtype=np.int64).ravel()
    if tail.size != code.tail_steps or np.any((tail < 0) | (tail >= code.n_inputs)):
        raise ValueError(f"tail needs {code.tail_steps} inputs in [0, {code.n_inputs})")
    return (tail[:, None] >> np.arange(code.k)) & 1


def encode(code: CodeSpec, bits, terminate: bool = True, start_state: int = 0,
           tail_inputs=None) -> np.ndarray:
    """Encode a bit sequence into output symbols.

    Input bit ``i`` of each k-bit group feeds register ``i``. Encoding starts
    in ``start_state`` (default the zero state). With ``terminate`` set,
    ``max(v_i)`` tail steps are appended: all-zero inputs by default, which
    end in state 0, or the given ``tail_inputs`` (k-bit integers), which end
    in ``tail_end_state``. Tail symbols are part of the output.
    """
    x = _input_bits(bits, code.k).astype(np.int64)
    if terminate and code.tail_steps:
        x = np.vstack([x, _tail_rows(code, tail_inputs)])
    skip = 0
    if start_state:
        if not 0 <= start_state < code.n_states:
            raise ValueError(f"start state {start_state} out of range")
        x = np.vstack([state_prefix(code, start_state), x])
        skip = code.tail_steps
    steps = x.shape[0]
    y = np.zeros(steps, dtype=np.int64)
    for j in range(code.n):
        col = np.zeros(steps, dtype=np.int64)
        for i in range(code.k):
            g = code.gen[i][j]
            l = 0
            while g >> l:
                if (g >> l) & 1:
                    if l == 0:
                        col ^= x[:, i]
                    else:
                        col[l:] ^= x[:-l, i]
                l += 1
        y |= col << j
    return y[skip:]


def symbols_to_bits(symbols, n: int) -> np.ndarray:
    """Expand symbols into n bits each, output column 0 first."""
    s = np.asarray(symbols, dtype=np.int64)
    return ((s[:, None] >> np.arange(n)) & 1).astype(np.uint8).ravel()


def is_equiprobable(code: CodeSpec) -> bool:
    if code.v + code.k < code.n:
        return False
    _, out = code.trellis
    counts = np.bincount(out.ravel(), minlength=code.n_outputs)
    return bool(np.all(counts == 1 << (code.v + code.k - code.n)))


def is_catastrophic(code: CodeSpec) -> bool:
    """True when some cycle of zero-output transitions exists besides the
    zero-state/zero-input self loop."""
    nxt, out = code.trellis
    zero = out == 0
    zero[0, 0] = False
    src, inp = np.nonzero(zero)
    dst = nxt[src, inp]
    # Peel nodes with no incoming zero-output edge; a cycle survives peeling.
    alive = np.ones(code.n_states, dtype=bool)
    edge_alive = np.ones(src.size, dtype=bool)
    while True:
        indeg = np.bincount(dst[edge_alive], minlength=code.n_states)
        drop = alive & (indeg == 0)
        if not drop.any():
            break
        alive &= ~drop
        edge_alive &= alive[src]
        if not edge_alive.any():
            return False
    return bool(edge_alive.any())


def validate(code: CodeSpec) -> Validity:
    if is_catastrophic(code):
        return Validity.CATASTROPHIC
    if not is_equiprobable(code):
        return Validity.NON_EQUIPROBABLE
    return Validity.VALID
