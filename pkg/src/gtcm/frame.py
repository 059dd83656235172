"""Rate-concealing frame construction and parsing.

Wire layout, bit 0 first, multi-bit fields big-endian:

* preamble: 64 public bits, BPSK
* header: 192 bits (16-byte AES block + 8-byte tag), encoded with the public
  rate-1/2 (7, 5) convolutional code (terminated) and sent as BPSK, i.e.
  388 channel bits
* payload: terminated GTCM symbols of the target modulation, padded with
  random symbols to whole interleaver blocks and interleaved per block;
  ``n`` bits per symbol, most significant bit first. The trellis starts in a
  keyed per-packet state and is terminated by keyed per-packet tail inputs
  (see ``trellis_secrets``), so no symbol comes from a fixed zero-input
  transient and the symbol histogram stays uniform for every valid code

The plaintext header block is ``mcs_id`` (1 byte), ``seq`` (4), ``payload_len``
(2, in bits), ``r`` (8) and one zero byte. It is encrypted as a single AES-128
block and authenticated by the first 8 bytes of an HMAC-SHA256 over the
ciphertext. Encryption and MAC keys are derived from the shared key with
HKDF-SHA256.
"""
from __future__ import annotations

import hmac
import secrets
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from . import constellation
from .catalog import load_catalog
from .code import CodeSpec, encode, parse_generator
from .constellation import Modulation
from .interleave import DEFAULT_BLOCK_SIZE, interleave_stream
from .viterbi import decode

PREAMBLE_WORD = 0xA3F15C2E9B47D608
PREAMBLE = np.array([(PREAMBLE_WORD >> (63 - i)) & 1 for i in range(64)], dtype=np.uint8)
HEADER_CODE = parse_generator("(7 5)", 1, 2)
HEADER_BYTES = 24
HEADER_BITS = HEADER_BYTES * 8
HEADER_CHANNEL_BITS = (HEADER_BITS + HEADER_CODE.tail_steps) * HEADER_CODE.n
MAX_PAYLOAD_BITS = (1 << 16) - 1
_TAG_BYTES = 8

# Two consecutive BPSK samples folded into one complex value, so the
# Euclidean Viterbi metric sums both channel bits.
_PAIR = Modulation("BPSK_PAIR", 2, np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]), 4.0)


class FrameError(Exception):
    """Base class for frame parsing failures."""


class PreambleNotFound(FrameError):
    pass


class AuthenticationError(FrameError):
    """Header integrity tag mismatch (wrong key or corrupted header)."""


class UnknownMCS(FrameError):
    pass


@dataclass(frozen=True)
class FrameHeader:
    mcs_id: int
    seq: int
    payload_len: int
    r: int

    def __post_init__(self):
        limits = {"mcs_id": 8, "seq": 32, "payload_len": 16, "r": 64}
        for name, bits in limits.items():
            value = getattr(self, name)
            if not 0 <= value < 1 << bits:
                raise ValueError(f"{name}={value} does not fit in {bits} bits")

    def pack(self) -> bytes:
        return struct.pack(">BIHQx", self.mcs_id, self.seq, self.payload_len, self.r)

    @classmethod
    def unpack(cls, block: bytes) -> "FrameHeader":
        if len(block) != 16 or block[-1] != 0:
            raise AuthenticationError("malformed header plaintext")
        return cls(*struct.unpack(">BIHQx", block))


def new_header(mcs_id: int, seq: int, payload_len: int, rng: np.random.Generator | None = None) -> FrameHeader:
    """Header with a fresh random ``r`` (from ``rng`` if given, else the OS CSPRNG)."""
    r = int(rng.integers(0, 1 << 63)) << 1 | int(rng.integers(0, 2)) if rng is not None else secrets.randbits(64)
    return FrameHeader(mcs_id, seq, payload_len, r)


@lru_cache(maxsize=64)
def _keys(key: bytes):
    material = HKDF(algorithm=hashes.SHA256(), length=48, salt=None,
                    info=b"gtcm frame header").derive(bytes(key))
    return material[:16], material[16:]


def trellis_secrets(key: bytes, header: FrameHeader, code: CodeSpec):
    """Keyed ``(start_state, tail_inputs, align_bits)`` for one packet.

    Derived from ``(seq, r)`` so the receiver recomputes them after decrypting
    the header, while an observer sees uniform-looking transients.
    ``align_bits`` pads the payload to a multiple of ``k``.
    """
    trellis_key = HKDF(algorithm=hashes.SHA256(), length=32, salt=None,
                       info=b"gtcm payload trellis").derive(bytes(key))
    msg = struct.pack(">IQ", header.seq, header.r)
    word = int.from_bytes(hmac.new(trellis_key, msg, "sha256").digest(), "big")
    start = word & (code.n_states - 1)
    word >>= code.v
    tail = []
    for _ in range(code.tail_steps):
        tail.append(word & (code.n_inputs - 1))
        word >>= code.k
    align = np.array([(word >> i) & 1 for i in range((-header.payload_len) % code.k)], dtype=np.uint8)
    return start, np.array(tail, dtype=np.int64), align


def encrypt_header(key: bytes, header: FrameHeader) -> bytes:
    enc_key, mac_key = _keys(bytes(key))
    enc = Cipher(algorithms.AES(enc_key), modes.ECB()).encryptor()
    ct = enc.update(header.pack()) + enc.finalize()
    tag = hmac.new(mac_key, ct, "sha256").digest()[:_TAG_BYTES]
    return ct + tag


def decrypt_header(key: bytes, blob: bytes) -> FrameHeader:
    if len(blob) != HEADER_BYTES:
        raise AuthenticationError(f"header is {len(blob)} bytes, expected {HEADER_BYTES}")
    enc_key, mac_key = _keys(bytes(key))
    ct, tag = blob[:16], blob[16:]
    expect = hmac.new(mac_key, ct, "sha256").digest()[:_TAG_BYTES]
    if not hmac.compare_digest(tag, expect):
        raise AuthenticationError("header integrity check failed")
    dec = Cipher(algorithms.AES(enc_key), modes.ECB()).decryptor()
    return FrameHeader.unpack(dec.update(ct) + dec.finalize())


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


@dataclass
class Frame:
    preamble: np.ndarray
    header_symbols: np.ndarray
    payload_symbols: np.ndarray
    target: str

    @property
    def modulation(self) -> Modulation:
        return constellation.build(self.target)

    def samples(self) -> np.ndarray:
        """Noiseless baseband samples: BPSK preamble and header, then the payload."""
        bpsk = constellation.build("BPSK").points
        return np.concatenate([
            bpsk[self.preamble], bpsk[self.header_symbols],
            self.modulation.points[self.payload_symbols],
        ])

    def wire_bits(self) -> np.ndarray:
        n = self.modulation.bits_per_symbol
        shifts = np.arange(n - 1, -1, -1)
        payload = ((self.payload_symbols[:, None] >> shifts) & 1).astype(np.uint8).ravel()
        return np.concatenate([self.preamble, self.header_symbols, payload]).astype(np.uint8)

    def to_bytes(self) -> bytes:
        return bits_to_bytes(self.wire_bits())


def _resolve(mcs_id: int, codes):
    codes = load_catalog() if codes is None else codes
    if not 0 <= mcs_id < len(codes):
        raise UnknownMCS(f"mcs_id {mcs_id} not in catalog of {len(codes)} codes")
    entry = codes[mcs_id]
    return entry.code(), constellation.build(entry.target)


def payload_layout(code, payload_len: int, block_size: int):
    """``(trellis_steps, padded_symbol_count)`` for a payload of ``payload_len`` bits."""
    steps = -(-payload_len // code.k) + code.tail_steps
    return steps, -(-steps // block_size) * block_size


def build_frame(key: bytes, header: FrameHeader, payload_bits, block_size: int = DEFAULT_BLOCK_SIZE,
                codes=None, rng: np.random.Generator | None = None) -> Frame:
    """Assemble a frame; the code and target modulation come from ``header.mcs_id``."""
    payload_bits = np.asarray(payload_bits, dtype=np.uint8).ravel()
    if payload_bits.size > MAX_PAYLOAD_BITS:
        raise ValueError(f"payload of {payload_bits.size} bits exceeds the 16-bit length field")
    if payload_bits.size != header.payload_len:
        raise ValueError(f"header says {header.payload_len} payload bits, got {payload_bits.size}")
    code, target = _resolve(header.mcs_id, codes)
    rng = rng if rng is not None else np.random.default_rng(secrets.randbits(128))

    hdr_bits = bytes_to_bits(encrypt_header(key, header))
    hdr_sym = encode(HEADER_CODE, hdr_bits, terminate=True)
    hdr_channel = ((hdr_sym[:, None] >> np.arange(2)) & 1).astype(np.uint8).ravel()

    start, tail, align = trellis_secrets(key, header, code)
    data = np.concatenate([payload_bits, align])
    sym = encode(code, data, terminate=True, start_state=start, tail_inputs=tail)
    _, total = payload_layout(code, payload_bits.size, block_size)
    filler = rng.integers(0, target.order, total - sym.size)
    sym = np.concatenate([sym, filler]).astype(np.int64)
    sym = interleave_stream(key, header.seq, sym, block_size)
    return Frame(PREAMBLE.copy(), hdr_channel, sym, target.name)


def find_preamble(hard_bits, max_mismatches: int = 0) -> int:
    """First offset where the preamble appears with at most ``max_mismatches`` bit errors."""
    hard_bits = np.asarray(hard_bits, dtype=np.uint8)
    n = PREAMBLE.size
    if hard_bits.size >= n:
        windows = np.lib.stride_tricks.sliding_window_view(hard_bits, n)
        hits = np.flatnonzero(np.sum(windows != PREAMBLE, axis=1) <= max_mismatches)
        if hits.size:
            return int(hits[0])
    raise PreambleNotFound("preamble not found")


def _decode_header(key: bytes, header_samples: np.ndarray) -> FrameHeader:
    pairs = header_samples.real.reshape(-1, 2)
    folded = pairs[:, 0] + 1j * pairs[:, 1]
    bits = decode(HEADER_CODE, _PAIR, folded, terminated=True)
    return decrypt_header(key, bits_to_bytes(bits))


def _decode_payload(key, header, code, target, samples, block_size):
    steps, total = payload_layout(code, header.payload_len, block_size)
    if samples.size < total:
        raise FrameError(f"frame truncated: need {total} payload symbols, got {samples.size}")
    rx = interleave_stream(key, header.seq, samples[:total], block_size, inverse=True)
    start, tail, _ = trellis_secrets(key, header, code)
    bits = decode(code, target, rx[:steps], terminated=True, start_state=start, tail_inputs=tail)
    return bits[: header.payload_len]


def parse_frame(key: bytes, received, block_size: int = DEFAULT_BLOCK_SIZE, codes=None,
                preamble_mismatches: int = 0):
    """Recover ``(header, payload_bits)`` from a Frame, complex samples or wire bytes.

    The preamble is located by exact match unless ``preamble_mismatches``
    allows some hard-decision bit errors (noisy samples).
    """
    if isinstance(received, Frame):
        received = received.samples()
    if isinstance(received, (bytes, bytearray)):
        return _parse_wire(key, bytes(received), block_size, codes)
    samples = np.asarray(received, dtype=np.complex128).ravel()
    start = find_preamble((samples.real < 0).astype(np.uint8), preamble_mismatches)
    pos = start + PREAMBLE.size
    hdr = samples[pos: pos + HEADER_CHANNEL_BITS]
    if hdr.size < HEADER_CHANNEL_BITS:
        raise FrameError("frame truncated inside the header")
    header = _decode_header(key, hdr)
    code, target = _resolve(header.mcs_id, codes)
    payload = samples[pos + HEADER_CHANNEL_BITS:]
    return header, _decode_payload(key, header, code, target, payload, block_size)


def _parse_wire(key, data, block_size, codes):
    bits = bytes_to_bits(data)
    start = find_preamble(bits)
    pos = start + PREAMBLE.size
    hdr = bits[pos: pos + HEADER_CHANNEL_BITS]
    if hdr.size < HEADER_CHANNEL_BITS:
        raise FrameError("frame truncated inside the header")
    bpsk = constellation.build("BPSK").points
    header = _decode_header(key, bpsk[hdr])
    code, target = _resolve(header.mcs_id, codes)
    n = target.bits_per_symbol
    rest = bits[pos + HEADER_CHANNEL_BITS:]
    usable = rest[: rest.size // n * n].reshape(-1, n).astype(np.int64)
    sym = usable @ (1 << np.arange(n - 1, -1, -1))
    return header, _decode_payload(key, header, code, target, target.points[sym], block_size)


def parse_symbol_streams(key: bytes, channel_bits, payload_symbols, block_size: int = DEFAULT_BLOCK_SIZE,
                         codes=None):
    """Parse from separate streams: BPSK channel bits (preamble and header) and payload indices."""
    bits = np.asarray(channel_bits, dtype=np.uint8)
    payload_symbols = np.asarray(payload_symbols, dtype=np.int64)
    start = find_preamble(bits)
    pos = start + PREAMBLE.size
    hdr = bits[pos: pos + HEADER_CHANNEL_BITS]
    if hdr.size < HEADER_CHANNEL_BITS:
        raise FrameError("frame truncated inside the header")
    header = _decode_header(key, constellation.build("BPSK").points[hdr])
    code, target = _resolve(header.mcs_id, codes)
    if payload_symbols.size and (payload_symbols.min() < 0 or payload_symbols.max() >= target.order):
        raise FrameError(f"payload symbol outside {target.name}")
    return header, _decode_payload(key, header, code, target, target.points[payload_symbols], block_size)
