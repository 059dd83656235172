"""AWGN Monte-Carlo bit-error-rate simulation and closed-form uncoded curves."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import constellation
from .code import CodeSpec, encode
from .constellation import Modulation
from .interleave import DEFAULT_BLOCK_SIZE, interleave_stream
from .viterbi import decode, decode_hard

log = logging.getLogger(__name__)

CSV_HEADER = ("scenario", "ebn0_db", "bits", "errors", "ber", "esn0_db")


def qfunc(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def noise_power(ebn0_db: float, info_bits_per_symbol: float, es: float = 1.0) -> float:
    """N0 for symbols of energy ``es`` carrying the given information bits."""
    return es / (info_bits_per_symbol * float(db_to_linear(ebn0_db)))


def awgn(symbols, ebn0_db: float, info_bits_per_symbol: float, rng: np.random.Generator) -> np.ndarray:
    """Add complex white Gaussian noise of variance N0/2 per dimension.

    Symbols are assumed to have unit average energy, so
    ``Es/N0 = info_bits_per_symbol * Eb/N0``.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return symbols.copy()
    sigma = math.sqrt(noise_power(ebn0_db, info_bits_per_symbol) / 2.0)
    noise = rng.standard_normal(symbols.shape) + 1j * rng.standard_normal(symbols.shape)
    return symbols + sigma * noise


def theoretical_uncoded_ber(mod: Modulation | str, ebn0_db, exact: bool = False):
    """Gray-mapped AWGN bit error rate.

    By default the usual nearest-neighbour approximations. With ``exact`` the
    full Gray-labelled expression: per-axis Q-function sums for BPSK, QPSK and
    square QAM, and numerical integration of the phase density for 8-PSK.
    """
    if isinstance(mod, str):
        mod = constellation.build(mod)
    name = mod.name.split("_")[0]
    if name not in ("BPSK", "QPSK", "PSK8", "QAM16", "QAM64"):
        raise ValueError(f"no closed form for {mod.name}")
    if exact:
        return _exact_ber(name, ebn0_db)
    g = db_to_linear(ebn0_db)
    b = mod.bits_per_symbol
    m = mod.order
    if name in ("BPSK", "QPSK"):
        ber = qfunc(np.sqrt(2.0 * g))
    elif name == "PSK8":
        ber = (2.0 / b) * qfunc(np.sqrt(2.0 * b * g) * math.sin(math.pi / m))
    else:
        ber = (4.0 / b) * (1.0 - 1.0 / math.sqrt(m)) * qfunc(np.sqrt(3.0 * b / (m - 1) * g))
    return np.minimum(ber, 0.5)


def _gray(i):
    return i ^ (i >> 1)


def _pam_gray_ber(levels: int, es_n0_axis):
    """Exact bit error rate of Gray-labelled ``levels``-PAM at the given per-axis Es/N0."""
    bits = levels.bit_length() - 1
    x = 2.0 * np.arange(levels) - (levels - 1)
    scale = np.sqrt(np.mean(x ** 2))
    sigma = np.sqrt(scale ** 2 / (2.0 * es_n0_axis))
    edges = np.concatenate([[-np.inf], (x[:-1] + x[1:]) / 2, [np.inf]])
    total = 0.0
    for i in range(levels):
        for j in range(levels):
            if i == j:
                continue
            p = qfunc((edges[j] - x[i]) / sigma) - qfunc((edges[j + 1] - x[i]) / sigma)
            total = total + p * bin(_gray(i) ^ _gray(j)).count("1")
    return total / (levels * bits)


def _psk_sector_probability(order: int, es_n0: float, sector: int) -> float:
    from scipy.integrate import quad

    def pdf(theta):
        c = math.cos(theta)
        return (math.exp(-es_n0) / (2 * math.pi)) * (
            1 + math.sqrt(4 * math.pi * es_n0) * c * math.exp(es_n0 * c * c)
            * float(qfunc(-math.sqrt(2 * es_n0) * c)))

    width = 2 * math.pi / order
    lo = sector * width - width / 2
    return quad(pdf, lo, lo + width, limit=200)[0]


def _exact_ber(name: str, ebn0_db):
    g = db_to_linear(ebn0_db)
    if name in ("BPSK", "QPSK"):
        return qfunc(np.sqrt(2.0 * g))
    if name.startswith("QAM"):
        m = 16 if name == "QAM16" else 64
        b = m.bit_length() - 1
        # each axis carries half the symbol energy and half the bits
        return _pam_gray_ber(int(math.isqrt(m)), b * g / 2.0)
    b = 3
    out = []
    for gi in np.atleast_1d(g):
        es_n0 = b * float(gi)
        err = sum(_psk_sector_probability(8, es_n0, j) * bin(_gray(0) ^ _gray(j)).count("1")
                  for j in range(1, 8))
        out.append(err / b)
    out = np.array(out)
    return out if np.ndim(ebn0_db) else out[0]


def _inverse_gray(labels):
    labels = np.asarray(labels, dtype=np.int64)
    out = labels.copy()
    shift = labels >> 1
    while np.any(shift):
        out ^= shift
        shift >>= 1
    return out


def gray_modulation(name: str) -> Modulation:
    """The named constellation relabelled with a binary-reflected Gray code.

    PSK labels follow the circle; square QAM applies the Gray code to the
    low-order bits on the real axis and the high-order bits on the imaginary
    axis.
    """
    base = constellation.build(name)
    m = base.order
    labels = np.arange(m)
    if base.name.startswith("QAM"):
        side = int(round(math.sqrt(m)))
        pos = _inverse_gray(labels % side) + side * _inverse_gray(labels // side)
    else:
        pos = _inverse_gray(labels)
    return constellation.from_points(base.name + "_GRAY", base.points[pos])


@dataclass(frozen=True)
class Scenario:
    """What is transmitted: an uncoded modulation or a code on a target constellation."""

    label: str
    modulation: Modulation
    code: CodeSpec | None = None
    source: Modulation | None = None
    receiver: str = "soft"

    @classmethod
    def uncoded(cls, name: str, label: str | None = None):
        mod = gray_modulation(name)
        return cls(label or f"uncoded:{constellation.canonical_name(name)}", mod)

    @classmethod
    def coded(cls, code: CodeSpec, target: Modulation | str, label: str | None = None,
              receiver: str = "soft"):
        """``receiver`` is ``"soft"`` (Euclidean Viterbi) or ``"hard"``
        (symbol decisions then Hamming-metric Viterbi, a binary-code receiver)."""
        if receiver not in ("soft", "hard"):
            raise ValueError(f"unknown receiver {receiver!r}")
        if isinstance(target, str):
            target = constellation.build(target)
        if target.bits_per_symbol != code.n:
            raise ValueError(f"{target.name} does not match code with n={code.n}")
        source = constellation.for_bits(code.k)
        return cls(label or f"coded:{source.name}>{target.name}", target, code, source, receiver)

    @property
    def info_bits_per_step(self) -> int:
        return self.code.k if self.code is not None else self.modulation.bits_per_symbol


@dataclass
class SweepConfig:
    scenario: Scenario
    ebn0_stop_db: float
    ebn0_start_db: float = 0.0
    ebn0_step_db: float = 0.5
    bits_per_point: int = 10_000_000
    error_stop: int = 1000
    seed: int = 0
    block_steps: int = 4096
    interleave_key: bytes | None = None
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not self.ebn0_step_db > 0:
            raise ValueError("Eb/N0 step must be positive")
        if self.error_stop < 100:
            raise ValueError("error_stop below 100 gives meaningless estimates")
        if self.bits_per_point < 1:
            raise ValueError("bit budget must be positive")

    def levels(self) -> np.ndarray:
        count = int(math.floor((self.ebn0_stop_db - self.ebn0_start_db) / self.ebn0_step_db + 1e-9)) + 1
        return self.ebn0_start_db + self.ebn0_step_db * np.arange(max(count, 0))


@dataclass
class BerPoint:
    ebn0_db: float
    bits_sent: int
    bit_errors: int
    esn0_db: float = field(default=float("nan"))
    reached_error_stop: bool = False

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent


def point_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _channel(tx, ebn0_db, info_per_symbol, rng, config: SweepConfig, packet: int):
    if config.interleave_key is None:
        return awgn(tx, ebn0_db, info_per_symbol, rng)
    m = config.block_size
    pad = (-tx.size) % m
    padded = np.concatenate([tx, tx[rng.integers(0, tx.size, pad)]]) if pad else tx
    sent = interleave_stream(config.interleave_key, packet, padded, m)
    rx = awgn(sent, ebn0_db, info_per_symbol, rng)
    return interleave_stream(config.interleave_key, packet, rx, m, inverse=True)[: tx.size]


def _coded_block(scn: Scenario, ebn0_db, rng, config, packet):
    code = scn.code
    bits = rng.integers(0, 2, config.block_steps * code.k, dtype=np.uint8)
    sym = encode(code, bits, terminate=True)
    info_per_symbol = bits.size / sym.size
    rx = _channel(scn.modulation.points[sym], ebn0_db, info_per_symbol, rng, config, packet)
    decoder = decode if scn.receiver == "soft" else decode_hard
    decoded = decoder(code, scn.modulation, rx, terminated=True)
    return bits.size, int(np.count_nonzero(decoded != bits))


def _uncoded_block(scn: Scenario, ebn0_db, rng, config, packet):
    b = scn.modulation.bits_per_symbol
    n_sym = max(config.block_steps, 1 << 14)
    bits = rng.integers(0, 2, (n_sym, b), dtype=np.uint8)
    labels = bits.astype(np.int64) @ (1 << np.arange(b))
    rx = _channel(scn.modulation.points[labels], ebn0_db, b, rng, config, packet)
    est = constellation.nearest(scn.modulation, rx)
    est_bits = (est[:, None] >> np.arange(b)) & 1
    return bits.size, int(np.count_nonzero(est_bits != bits))


def simulate_point(config: SweepConfig, ebn0_db: float, index: int) -> BerPoint:
    scn = config.scenario
    rng = point_rng(config.seed, index)
    block = _coded_block if scn.code is not None else _uncoded_block
    sent = errors = packet = 0
    while sent < config.bits_per_point and errors < config.error_stop:
        n_bits, n_err = block(scn, ebn0_db, rng, config, packet)
        sent += n_bits
        errors += n_err
        packet += 1
    esn0 = ebn0_db + 10 * math.log10(scn.info_bits_per_step)
    return BerPoint(float(ebn0_db), sent, errors, esn0, errors >= config.error_stop)


def run_sweep(config: SweepConfig) -> list:
    """Simulate every Eb/N0 level; each level has its own seeded stream."""
    points = [simulate_point(config, float(e), i) for i, e in enumerate(config.levels())]
    if points and not any(p.reached_error_stop for p in points):
        log.warning("bit budget %d never reached %d errors", config.bits_per_point, config.error_stop)
    return points


def to_csv(points, label: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        w.writerow([label, f"{p.ebn0_db:g}", p.bits_sent, p.bit_errors, f"{p.ber:.6e}", f"{p.esn0_db:g}"])
    return buf.getvalue()


def binomial_sigma(ber: float, bits: int) -> float:
    return math.sqrt(max(ber * (1 - ber), 0.0) / bits)


def ebn0_at_ber(points, target_ber: float) -> float:
    """Eb/N0 where the measured curve crosses ``target_ber`` (log-linear interpolation).

    Returns NaN if the curve never crosses within the measured range.
    """
    pts = [p for p in points if p.bit_errors > 0]
    for lo, hi in zip(pts, pts[1:]):
        if lo.ber >= target_ber >= hi.ber:
            y0, y1 = math.log10(lo.ber), math.log10(hi.ber)
            if y0 == y1:
                return lo.ebn0_db
            frac = (math.log10(target_ber) - y0) / (y1 - y0)
            return lo.ebn0_db + frac * (hi.ebn0_db - lo.ebn0_db)
    return float("nan")


BINARY_RATE_HALF_CODE = "(17 13 05 02) (10 03 17 15)"


def binary_comparison_scenario(receiver: str = "hard") -> Scenario:
    """Best Hamming-distance rate-2/4 code on Gray-labelled 16-QAM."""
    from .code import parse_generator

    return Scenario.coded(parse_generator(BINARY_RATE_HALF_CODE, 2, 4), gray_modulation("QAM16"),
                          label=f"binary-gray:{receiver}", receiver=receiver)


def theoretical_ebn0_at_ber(mod: Modulation | str, target_ber: float, exact: bool = False) -> float:
    from scipy.optimize import brentq

    return float(brentq(lambda e: float(theoretical_uncoded_ber(mod, e, exact)) - target_ber,
                        -10.0, 40.0))
