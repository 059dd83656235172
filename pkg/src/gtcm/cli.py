"""Command-line front end. Every command writes CSV with a header row to stdout.

Domain failures exit 1 with a single ``error,<kind>,<message>`` line on
stderr; bad flags exit 2 with usage text.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import catalog, constellation, frame, link
from .code import parse_generator, split_registers, validate, Validity
from .distance import compute_distance, coding_gain_db
from .interleave import DEFAULT_BLOCK_SIZE, InterleaveContext, derive
from .search import SearchSpec, default_trials, full_search, random_search


def _count(text: str) -> int:
    """Integer flag that also accepts scientific notation such as ``1e6``."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_integer() or value < 0:
        raise argparse.ArgumentTypeError(f"not a non-negative integer: {text!r}")
    return int(value)


def _key(args) -> bytes:
    if args.key_hex is not None:
        return bytes.fromhex(args.key_hex)
    return args.key.encode()


def _writer(out):
    return csv.writer(out, lineterminator="\n")


def _fmt_float(x: float, digits: int = 9) -> str:
    return repr(round(float(x), digits))


def _code_from_args(args):
    reg = split_registers(args.v, args.k) if args.v is not None else None
    code = parse_generator(args.code, args.k, args.n)
    if reg is not None and code.v != args.v:
        code = parse_generator(args.code, args.k, args.n, reg)
    return code


def cmd_distance(args, out):
    code = _code_from_args(args)
    target = constellation.build(args.target)
    status = validate(code)
    if status is Validity.CATASTROPHIC:
        raise ValueError("code is catastrophic")
    res = compute_distance(code, target, check=False)
    source = constellation.build(args.source) if args.source else constellation.for_bits(code.k)
    w = _writer(out)
    w.writerow(["d_sq", "beta_db", "L"])
    w.writerow([_fmt_float(res.d_sq_free), f"{coding_gain_db(res.d_sq_free, source):.2f}", res.merge_depth])


def cmd_search(args, out):
    target = constellation.build(args.target)
    if args.regs is not None:
        regs = tuple(int(r) for r in args.regs.split(","))
    elif args.v is not None:
        regs = split_registers(args.v, args.k)
    else:
        raise ValueError("give --v or --regs")
    v = sum(regs)
    if args.full:
        res = full_search(args.k, args.n, regs, target)
    else:
        trials = default_trials(v) if args.trials is None else args.trials
        res = random_search(SearchSpec(args.k, args.n, regs, target, trials, args.seed))
    w = _writer(out)
    w.writerow(["k", "n", "v", "target", "code", "d_sq", "beta_db", "trials", "valid"])
    code = res.best_code.to_octal() if res.found else ""
    beta = f"{res.beta_db:.2f}" if res.found else ""
    w.writerow([args.k, args.n, v, target.name, code, _fmt_float(res.d_sq_free), beta,
                res.trials_run, res.valid_count])


def cmd_verify_catalog(args, out):
    entries = catalog.load_catalog(args.catalog)
    checked = catalog.verify_catalog(entries, max_v=args.max_v)
    w = _writer(out)
    w.writerow(["mcs_id", "source", "target", "v", "beta_published", "beta_db", "d_sq", "L",
                "convention", "status"])
    for idx, e in enumerate(checked):
        status = {True: "ok", False: "mismatch", None: "skipped"}[e.verified]
        beta = "" if e.beta_db is None else f"{e.beta_db:.2f}"
        d_sq = "" if e.d_sq_free is None else _fmt_float(e.d_sq_free)
        w.writerow([idx, e.source, e.target, e.v, f"{e.beta_db_published:.2f}", beta, d_sq,
                    "" if e.merge_depth is None else e.merge_depth, e.convention or "", status])
    n_bad = sum(e.verified is False for e in checked)
    n_ok = sum(e.verified is True for e in checked)
    n_skip = sum(e.verified is None for e in checked)
    out.write(f"# summary entries={len(checked)} verified={n_ok} mismatches={n_bad} skipped={n_skip}\n")
    return 0


def _scenario(text: str, entries):
    """``uncoded:<mod>``, ``catalog:<id>``, ``coded:<src>:<tgt>:<v>``, ``code:<octal>:<tgt>``
    or ``binary[:hard|soft]``."""
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    if kind == "uncoded":
        return link.Scenario.uncoded(rest)
    if kind == "catalog":
        idx = int(rest)
        if not 0 <= idx < len(entries):
            raise ValueError(f"catalog id {idx} out of range")
        e = entries[idx]
        return link.Scenario.coded(e.code(), e.target, label=f"catalog:{idx}")
    if kind == "coded":
        src, tgt, v = rest.split(":")
        e = entries[catalog.find_entry(entries, src, tgt, int(v))]
        return link.Scenario.coded(e.code(), e.target, label=f"coded:{e.source}>{e.target}:v{e.v}")
    if kind == "code":
        gen, _, tgt = rest.rpartition(":")
        return link.Scenario.coded(parse_generator(gen), tgt, label=f"code:{gen}")
    if kind == "binary":
        return link.binary_comparison_scenario(rest or "hard")
    raise ValueError(f"unknown scenario {text!r}")


def cmd_sweep(args, out):
    entries = catalog.load_catalog(args.catalog)
    scn = _scenario(args.scenario, entries)
    key = None if args.interleave_key is None else args.interleave_key.encode()
    cfg = link.SweepConfig(scn, args.to, args.start, args.step, args.budget, args.errors, args.seed,
                           args.block_steps, key, args.block_size)
    out.write(link.to_csv(link.run_sweep(cfg), scn.label))


def _payload_bits(args, rng):
    if args.payload_hex is not None:
        return frame.bytes_to_bits(bytes.fromhex(args.payload_hex))
    return rng.integers(0, 2, args.random_bits, dtype=np.uint8)


def cmd_frame_encode(args, out):
    rng = np.random.default_rng(args.seed)
    bits = _payload_bits(args, rng)
    header = frame.new_header(args.mcs, args.seq, bits.size, rng)
    codes = catalog.load_catalog(args.catalog)
    f = frame.build_frame(_key(args), header, bits, args.block_size, codes, rng)
    if args.format == "hex":
        w = _writer(out)
        w.writerow(["frame_hex"])
        w.writerow([f.to_bytes().hex()])
        return
    w = _writer(out)
    w.writerow(["section", "index", "symbol"])
    for name, seq in (("preamble", f.preamble), ("header", f.header_symbols),
                      ("payload", f.payload_symbols)):
        for i, s in enumerate(seq):
            w.writerow([name, i, int(s)])


def _read_input(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def cmd_frame_decode(args, out):
    text = _read_input(args.input)
    codes = catalog.load_catalog(args.catalog)
    key = _key(args)
    if args.format == "hex":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and ln.strip() != "frame_hex"]
        if not lines:
            raise ValueError("no frame in input")
        header, bits = frame.parse_frame(key, bytes.fromhex(lines[0]), args.block_size, codes)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
        chan = [int(r["symbol"]) for r in rows if r["section"] in ("preamble", "header")]
        pay = [int(r["symbol"]) for r in rows if r["section"] == "payload"]
        header, bits = frame.parse_symbol_streams(key, chan, pay, args.block_size, codes)
    w = _writer(out)
    w.writerow(["mcs_id", "seq", "payload_len", "r", "payload_hex"])
    w.writerow([header.mcs_id, header.seq, header.payload_len, header.r,
                frame.bits_to_bytes(bits).hex()])


def cmd_interleave_demo(args, out):
    itl = derive(InterleaveContext(_key(args), args.packet, args.block, args.m))
    w = _writer(out)
    w.writerow(["x", "source_index", "A", "B", "A_inv", "m"])
    for x, src in enumerate(itl.indices()):
        w.writerow([x, int(src), itl.a, itl.b, itl.a_inverse, itl.m])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    common.add_argument("--catalog", default=None,
                        help=f"catalog file (default: ${catalog.CATALOG_ENV} or the bundled table)")
    keyed = argparse.ArgumentParser(add_help=False)
    group = keyed.add_mutually_exclusive_group()
    group.add_argument("--key", default="", help="shared key as UTF-8 text")
    group.add_argument("--key-hex", default=None, help="shared key as hex")

    p = argparse.ArgumentParser(prog="gtcm", description="General trellis-coded modulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("distance", parents=[common], help="free distance, gain and merge depth")
    s.add_argument("--code", required=True, help='octal generator matrix, e.g. "(1 3)"')
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--v", type=int, default=None)
    s.add_argument("--target", required=True)
    s.add_argument("--source", default=None, help="reference modulation (default: implied by k)")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("search", parents=[common], help="random or exhaustive code search")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--v", type=int, default=None, help="total constraint length, split evenly")
    s.add_argument("--regs", default=None, help="explicit register lengths, e.g. 0,2")
    s.add_argument("--target", required=True)
    s.add_argument("--trials", type=_count, default=None)
    s.add_argument("--full", action="store_true", help="enumerate every generator matrix")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("verify-catalog", parents=[common], help="recompute every catalog gain")
    s.add_argument("--max-v", type=int, default=None)
    s.set_defaults(func=cmd_verify_catalog)

    s = sub.add_parser("sweep", parents=[common], help="AWGN bit-error-rate sweep")
    s.add_argument("--scenario", required=True,
                   help="uncoded:<mod> | catalog:<id> | coded:<src>:<tgt>:<v> | code:<octal>:<tgt> | binary[:hard|soft]")
    s.add_argument("--from", dest="start", type=float, default=0.0)
    s.add_argument("--to", type=float, required=True)
    s.add_argument("--step", type=float, default=0.5)
    s.add_argument("--budget", type=_count, default=10_000_000)
    s.add_argument("--errors", type=_count, default=1000)
    s.add_argument("--block-steps", type=_count, default=4096)
    s.add_argument("--interleave-key", default=None)
    s.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("frame-encode", parents=[common, keyed], help="build one frame")
    s.add_argument("--mcs", type=int, required=True, help="catalog row index")
    s.add_argument("--seq", type=int, default=0)
    payload = s.add_mutually_exclusive_group(required=True)
    payload.add_argument("--payload-hex")
    payload.add_argument("--random-bits", type=_count)
    s.add_argument("--format", choices=("hex", "csv"), default="hex")
    s.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    s.set_defaults(func=cmd_frame_encode)

    s = sub.add_parser("frame-decode", parents=[common, keyed], help="parse one frame")
    s.add_argument("--input", default="-", help="file written by frame-encode ('-' for stdin)")
    s.add_argument("--format", choices=("hex", "csv"), default="hex")
    s.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    s.set_defaults(func=cmd_frame_decode)

    s = sub.add_parser("interleave-demo", parents=[common, keyed], help="list one block permutation")
    s.add_argument("--packet", type=_count, default=0)
    s.add_argument("--block", type=_count, default=0)
    s.add_argument("--m", type=int, default=DEFAULT_BLOCK_SIZE)
    s.set_defaults(func=cmd_interleave_demo)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        status = args.func(args, out)
    except (ValueError, KeyError, OSError, RuntimeError, frame.FrameError) as exc:
        msg = str(exc).replace("\n", " ").strip("'\"")
        print(f"error,{type(exc).__name__},{msg}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
