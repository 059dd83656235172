"""Keyed per-block affine interleaving of symbol blocks.

Block ``i`` of packet ``s`` is permuted by ``x -> (A*x + B) mod m`` with
``m`` prime and::

    A = (H(K || s || i || 0x00) mod (m - 1)) + 1
    B =  H(K || s || i || 0x01) mod m

where ``H`` is SHA-256 read as a big-endian integer and ``s``, ``i`` are
8-byte big-endian unsigned integers. Output position ``x`` carries input
symbol ``(A*x + B) mod m``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BLOCK_SIZE = 251


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    return all(m % d for d in range(3, math.isqrt(m) + 1, 2))


@dataclass(frozen=True)
class InterleaveContext:
    key: bytes
    packet_number: int
    block_index: int
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not is_prime(self.block_size):
            raise ValueError(f"block size {self.block_size} is not prime")
        for name in ("packet_number", "block_index"):
            value = getattr(self, name)
            if not 0 <= value < 1 << 64:
                raise ValueError(f"{name} must fit in 64 unsigned bits")


@dataclass(frozen=True)
class LinearInterleaver:
    a: int
    b: int
    m: int

    def __post_init__(self):
        if not is_prime(self.m):
            raise ValueError(f"block size {self.m} is not prime")
        if not (1 <= self.a < self.m and 0 <= self.b < self.m):
            raise ValueError(f"coefficients out of range: A={self.a}, B={self.b}, m={self.m}")

    @property
    def a_inverse(self) -> int:
        return pow(self.a, -1, self.m)

    def indices(self) -> np.ndarray:
        """``idx[x]`` is the input position placed at output position ``x``."""
        return (self.a * np.arange(self.m, dtype=np.int64) + self.b) % self.m


def _digest(key: bytes, s: int, i: int, domain: int) -> int:
    msg = bytes(key) + s.to_bytes(8, "big") + i.to_bytes(8, "big") + bytes([domain])
    return int.from_bytes(hashlib.sha256(msg).digest(), "big")


def derive(ctx: InterleaveContext) -> LinearInterleaver:
    m = ctx.block_size
    h0 = _digest(ctx.key, ctx.packet_number, ctx.block_index, 0)
    h1 = _digest(ctx.key, ctx.packet_number, ctx.block_index, 1)
    return LinearInterleaver((h0 % (m - 1)) + 1, h1 % m, m)


def _check_block(itl: LinearInterleaver, block):
    block = np.asarray(block)
    if block.shape[0] != itl.m:
        raise ValueError(f"block has {block.shape[0]} symbols, interleaver expects {itl.m}")
    return block


def permute(itl: LinearInterleaver, block) -> np.ndarray:
    block = _check_block(itl, block)
    return block[itl.indices()]


def inverse_permute(itl: LinearInterleaver, block) -> np.ndarray:
    block = _check_block(itl, block)
    p = np.arange(itl.m, dtype=np.int64)
    return block[(itl.a_inverse * (p - itl.b)) % itl.m]


def interleave_stream(key: bytes, packet_number: int, symbols, block_size: int = DEFAULT_BLOCK_SIZE,
                      inverse: bool = False) -> np.ndarray:
    """Apply (or undo) the per-block permutations to a whole packet."""
    symbols = np.asarray(symbols)
    if symbols.shape[0] % block_size:
        raise ValueError(f"{symbols.shape[0]} symbols do not fill whole blocks of {block_size}")
    out = np.empty_like(symbols)
    op = inverse_permute if inverse else permute
    for i in range(symbols.shape[0] // block_size):
        itl = derive(InterleaveContext(key, packet_number, i, block_size))
        sl = slice(i * block_size, (i + 1) * block_size)
        out[sl] = op(itl, symbols[sl])
    return out
