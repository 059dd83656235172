"""Published code catalog and its verification.

The catalog file is plain text, one code per line::

    BPSK QPSK 1 1.76 (1 3)

giving source modulation, target modulation, total constraint length, the
published coding gain in dB and the octal generator matrix. ``#`` starts a
comment line.
"""
from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import constellation
from .code import CodeSpec, Validity, parse_generator, reversed_code, validate
from .distance import CatastrophicCodeError, compute_distance, coding_gain_db

CATALOG_ENV = "GTCM_CATALOG"
BETA_TOLERANCE_DB = 0.01


@dataclass
class CatalogEntry:
    source: str
    target: str
    v: int
    beta_db_published: float
    generator: str
    verified: bool | None = None
    beta_db: float | None = None
    d_sq_free: float | None = None
    merge_depth: int | None = None
    convention: str | None = None
    seconds: float | None = None
    note: str = field(default="", repr=False)

    @property
    def k(self) -> int:
        return constellation.build(self.source).bits_per_symbol

    @property
    def n(self) -> int:
        return constellation.build(self.target).bits_per_symbol

    def code(self) -> CodeSpec:
        return parse_generator(self.generator, self.k, self.n)

    def to_line(self) -> str:
        return f"{self.source} {self.target} {self.v} {self.beta_db_published:g} {self.generator}"


def _default_text() -> str:
    path = os.environ.get(CATALOG_ENV)
    if path:
        return Path(path).read_text()
    return resources.files("gtcm").joinpath("data/catalog.txt").read_text()


def parse_catalog(text: str) -> list:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            src, tgt, v, beta, gen = line.split(None, 4)
            entries.append(CatalogEntry(
                constellation.canonical_name(src), constellation.canonical_name(tgt),
                int(v), float(beta), gen.strip(),
            ))
        except ValueError as exc:
            raise ValueError(f"catalog line {lineno}: {exc}") from None
    return entries


def load_catalog(path: str | os.PathLike | None = None) -> list:
    text = Path(path).read_text() if path is not None else _default_text()
    return parse_catalog(text)


def dump_catalog(entries) -> str:
    return "# source target v beta_db generator\n" + "".join(e.to_line() + "\n" for e in entries)


def _candidates(entry: CatalogEntry):
    """Readings of the published matrix, tried in order."""
    code = entry.code()
    yield "lsb", code
    yield "msb", reversed_code(code)
    if code.k > 1:
        for perm in itertools.permutations(range(code.k)):
            if list(perm) == list(range(code.k)):
                continue
            permuted = CodeSpec(code.k, code.n, tuple(code.reg_lengths[p] for p in perm),
                                tuple(code.gen[p] for p in perm))
            yield "rows" + "".join(map(str, perm)), permuted


def verify_entry(entry: CatalogEntry) -> CatalogEntry:
    """Recompute beta for one entry, returning an updated copy."""
    start = time.perf_counter()
    source = constellation.build(entry.source)
    target = constellation.build(entry.target)
    first = None
    note = ""
    try:
        candidates = list(_candidates(entry))
    except ValueError as exc:
        return replace(entry, verified=False, note=f"unparseable: {exc}",
                       seconds=time.perf_counter() - start)
    for name, code in candidates:
        if code.v != entry.v:
            note = f"register lengths sum to {code.v}, table says {entry.v}"
        status = validate(code)
        if status is not Validity.VALID:
            note = status.value
            if status is Validity.CATASTROPHIC:
                continue
        try:
            res = compute_distance(code, target, check=False)
        except CatastrophicCodeError as exc:
            note = str(exc)
            continue
        beta = coding_gain_db(res.d_sq_free, source) if res.d_sq_free > 0 else float("-inf")
        outcome = (name, res, beta)
        if first is None:
            first = outcome
        if abs(beta - entry.beta_db_published) <= BETA_TOLERANCE_DB:
            return replace(entry, verified=True, beta_db=beta, d_sq_free=res.d_sq_free,
                           merge_depth=res.merge_depth, convention=name, note=note,
                           seconds=time.perf_counter() - start)
    elapsed = time.perf_counter() - start
    if first is None:
        return replace(entry, verified=False, note=note or "no valid reading", seconds=elapsed)
    name, res, beta = first
    return replace(entry, verified=False, beta_db=beta, d_sq_free=res.d_sq_free,
                   merge_depth=res.merge_depth, convention=name, note=note, seconds=elapsed)


def verify_catalog(entries=None, max_v: int | None = None) -> list:
    """Verify every entry (those above ``max_v`` are returned unverified, flag None)."""
    if entries is None:
        entries = load_catalog()
    out = []
    for entry in entries:
        if max_v is not None and entry.v > max_v:
            out.append(replace(entry, verified=None, note="skipped"))
        else:
            out.append(verify_entry(entry))
    return out


def find_entry(entries, source: str, target: str, v: int) -> int:
    """Index of the entry for ``source -> target`` at constraint length ``v``."""
    source = constellation.canonical_name(source)
    target = constellation.canonical_name(target)
    for idx, e in enumerate(entries):
        if e.source == source and e.target == target and e.v == v:
            return idx
    raise KeyError(f"no catalog code for {source}->{target} v={v}")
