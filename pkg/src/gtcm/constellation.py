"""Constellations used as source and target modulations.

All constellations are scaled to unit average symbol energy so that squared
distances (and therefore coding gains) are comparable across modulations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MODULATIONS = ("BPSK", "QPSK", "PSK8", "QAM16", "QAM64")

_ALIASES = {
    "bpsk": "BPSK",
    "2psk": "BPSK",
    "qpsk": "QPSK",
    "4psk": "QPSK",
    "psk8": "PSK8",
    "8psk": "PSK8",
    "8-psk": "PSK8",
    "qam16": "QAM16",
    "16qam": "QAM16",
    "16-qam": "QAM16",
    "qam64": "QAM64",
    "64qam": "QAM64",
    "64-qam": "QAM64",
}

# Modulation carrying k information bits per symbol, used as the uncoded
# reference when a rate-k/n code is evaluated.
SOURCE_FOR_BITS = {1: "BPSK", 2: "QPSK", 3: "PSK8", 4: "QAM16", 6: "QAM64"}


@dataclass(frozen=True, eq=False)
class Modulation:
    """A named constellation with unit average energy.

    ``points[s]`` is the complex point transmitted for symbol ``s``.
    """

    name: str
    bits_per_symbol: int
    points: np.ndarray = field(repr=False)
    min_sq_distance: float

    @property
    def order(self) -> int:
        return 1 << self.bits_per_symbol

    @property
    def sq_distances(self) -> np.ndarray:
        """Full ``order x order`` matrix of squared distances."""
        return _sq_distance_matrix(self)

    def __hash__(self):
        return hash((self.name, self.points.tobytes()))

    def __eq__(self, other):
        if not isinstance(other, Modulation):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.points, other.points)


def canonical_name(name: str) -> str:
    key = str(name).strip()
    if key in MODULATIONS:
        return key
    try:
        return _ALIASES[key.lower()]
    except KeyError:
        raise ValueError(
            f"unsupported modulation {name!r}; expected one of {', '.join(MODULATIONS)}"
        ) from None


def _psk_points(order: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(order) / order)


def _qam_points(order: int) -> np.ndarray:
    side = int(round(np.sqrt(order)))
    s = np.arange(order)
    low = s % side  # real axis
    high = s // side  # imaginary axis
    corner = -(side - 1)
    pts = (corner + 2 * low) + 1j * (corner + 2 * high)
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def _pairwise_sq(pts) -> np.ndarray:
    # Summing squared components keeps exact grids exact (|1 - 1j|**2 is not).
    diff = pts[:, None] - pts[None, :]
    return diff.real ** 2 + diff.imag ** 2


def from_points(name: str, points) -> Modulation:
    """Wrap an arbitrary point set (normalized to unit energy) as a Modulation."""
    pts = np.asarray(points, dtype=np.complex128)
    order = pts.size
    bits = order.bit_length() - 1
    if order < 2 or (1 << bits) != order:
        raise ValueError("constellation size must be a power of two >= 2")
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    diff = _pairwise_sq(pts)
    iu = np.triu_indices(order, 1)
    dmin = float(diff[iu].min())
    if dmin <= 0:
        raise ValueError("constellation points must be distinct")
    pts.setflags(write=False)
    return Modulation(name, bits, pts, dmin)


def build(name: str) -> Modulation:
    """Return the named constellation (BPSK, QPSK, PSK8, QAM16 or QAM64)."""
    return _build(canonical_name(name))


@lru_cache(maxsize=None)
def _build(name: str) -> Modulation:
    if name == "BPSK":
        pts = _psk_points(2)
    elif name == "QPSK":
        pts = _psk_points(4)
    elif name == "PSK8":
        pts = _psk_points(8)
    elif name == "QAM16":
        pts = _qam_points(16)
    else:
        pts = _qam_points(64)
    # Snap float noise (e.g. cos(pi/2)) so exact points like 1j come out exact.
    pts = np.round(pts.real, 15) + 1j * np.round(pts.imag, 15)
    return from_points(name, pts)


def for_bits(bits_per_symbol: int) -> Modulation:
    """The uncoded modulation carrying ``bits_per_symbol`` bits."""
    try:
        return build(SOURCE_FOR_BITS[bits_per_symbol])
    except KeyError:
        raise ValueError(f"no supported modulation carries {bits_per_symbol} bits") from None


@lru_cache(maxsize=None)
def _sq_distance_matrix(mod: Modulation) -> np.ndarray:
    d = _pairwise_sq(mod.points)
    np.fill_diagonal(d, 0.0)
    d.setflags(write=False)
    return d


def sq_distance(mod: Modulation, s: int, t: int) -> float:
    """Squared Euclidean distance between the points of symbols ``s`` and ``t``."""
    for sym in (s, t):
        if not 0 <= sym < mod.order:
            raise IndexError(f"symbol {sym} out of range for {mod.name}")
    return float(_sq_distance_matrix(mod)[s, t])


def min_sq_distance(mod: Modulation) -> float:
    return mod.min_sq_distance


def nearest(mod: Modulation, samples) -> np.ndarray:
    """Hard-decision symbol indices for complex ``samples``."""
    samples = np.asarray(samples, dtype=np.complex128)
    d = np.abs(samples[..., None] - mod.points) ** 2
    return np.argmin(d, axis=-1)
