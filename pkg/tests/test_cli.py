import io
import subprocess
import sys

import pytest

from gtcm.cli import main


def run(*argv):
    out = io.StringIO()
    status = main(list(argv), out=out)
    return status, out.getvalue()


def test_distance_example():
    status, text = run("distance", "--code", "(1 3)", "--k", "1", "--n", "2", "--v", "1", "--target", "qpsk")
    assert status == 0 and text == "d_sq,beta_db,L\n6.0,1.76,2\n"


def test_verify_catalog_small(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("BPSK QPSK 1 1.76 (1 3)\nBPSK QPSK 2 9.99 (2 7)\n")
    status, text = run("verify-catalog", "--catalog", str(path))
    lines = text.splitlines()
    assert status == 0 and lines[0].startswith("mcs_id,source,target,v")
    assert lines[1].endswith(",lsb,ok") and lines[2].endswith("mismatch")
    assert lines[-1] == "# summary entries=2 verified=1 mismatches=1 skipped=0"


def test_sweep_byte_deterministic():
    args = ("sweep", "--scenario", "uncoded:qpsk", "--to", "10", "--budget", "1e6", "--seed", "7")
    a, b = run(*args), run(*args)
    assert a == b and a[1].startswith("scenario,ebn0_db,bits,errors,ber")
    assert len(a[1].splitlines()) == 1 + 21


@pytest.mark.parametrize("scenario", ["catalog:1", "coded:qpsk:qam16:4", "code:(2 7):qpsk", "binary",
                                      "binary:soft"])
def test_sweep_scenarios(scenario):
    status, text = run("sweep", "--scenario", scenario, "--from", "2", "--to", "2", "--budget", "5000")
    assert status == 0 and len(text.splitlines()) == 2


def test_search_command():
    status, text = run("search", "--k", "1", "--n", "2", "--v", "2", "--target", "qpsk", "--trials", "1e3")
    assert status == 0 and text.splitlines()[1].split(",")[6] == "3.98"
    status, text = run("search", "--k", "2", "--n", "3", "--regs", "0,2", "--target", "psk8", "--full")
    assert status == 0 and text.splitlines()[1].split(",")[6] == "3.01"


@pytest.mark.parametrize("fmt", ["hex", "csv"])
def test_frame_round_trip(tmp_path, fmt):
    status, text = run("frame-encode", "--key", "k", "--mcs", "12", "--seq", "4", "--payload-hex", "deadbeef",
                       "--format", fmt, "--seed", "1")
    assert status == 0
    path = tmp_path / "frame"
    path.write_text(text)
    status, text = run("frame-decode", "--key", "k", "--input", str(path), "--format", fmt)
    header, row = text.splitlines()
    assert header == "mcs_id,seq,payload_len,r,payload_hex"
    assert row.startswith("12,4,32,") and row.endswith(",deadbeef")
    assert run("frame-encode", "--key", "k", "--mcs", "12", "--seq", "4", "--payload-hex", "deadbeef",
               "--format", fmt, "--seed", "1")[1] == path.read_text()


def test_interleave_demo():
    status, text = run("interleave-demo", "--key", "k", "--packet", "1", "--block", "0")
    lines = text.splitlines()
    assert lines[0] == "x,source_index,A,B,A_inv,m" and len(lines) == 252
    assert lines[1] == "0,121,116,121,132,251"


def test_domain_error_exit_1(tmp_path, capsys):
    path = tmp_path / "frame"
    path.write_text(run("frame-encode", "--key", "k", "--mcs", "3", "--random-bits", "64")[1])
    status, _ = run("frame-decode", "--key", "wrong", "--input", str(path))
    err = capsys.readouterr().err
    assert status == 1 and err.strip() == "error,AuthenticationError,header integrity check failed"
    status, _ = run("distance", "--code", "(3 6)", "--target", "qpsk")
    assert status == 1


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["distance", "--target", "qpsk"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gtcm", "distance", "--code", "(2 7)", "--target", "QPSK"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout == "d_sq,beta_db,L\n10.0,3.98,3\n"
