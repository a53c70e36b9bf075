import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from sinrzones.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, fmt, main
from sinrzones.corpus import canonical_two_station, corpus_network, nonconvex_fixture
from sinrzones.locate import deserialize_index, serialize_index
from sinrzones.model import Network, dump_network, save_network
from sinrzones.render import BASE_PALETTE, read_ppm


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def two_net(tmp_path):
    path = tmp_path / "two.json"
    save_network(canonical_two_station(beta=4), path)
    return path


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("built")
    net = d / "net.json"
    save_network(corpus_network(1), net)
    idx = d / "net.idx"
    assert main(["build", "--net", str(net), "--eps", "1/2", "--out", str(idx)]) == EXIT_OK
    return net, idx


def test_fmt():
    assert fmt(Fraction(1, 3)) == "1/3"
    assert fmt(2) == "2"
    assert fmt(Fraction(1, 3 * 10**7)) == "3.33333333333e-08"


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "gen", "--n", 5, "--seed", 42, "--beta", "3", "--noise", "1/10", "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    net = Network.from_dict(json.loads(a.read_text()))
    assert net.n == 5 and net.beta == 3 and net.noise == Fraction(1, 10)
    code, out, _ = run(capsys, "gen", "--n", 5, "--seed", 42, "--beta", "3", "--noise", "1/10")
    assert out.encode() == a.read_bytes()


def test_gen_rejects_single_station(capsys):
    code, _, err = run(capsys, "gen", "--n", 1, "--seed", 0)
    assert code == EXIT_USAGE and "n >= 2" in err


def test_render_deterministic_and_mirror_symmetric(tmp_path, capsys):
    net = tmp_path / "sym.json"
    save_network(Network.from_coords([(-1, 0), (1, 0)], Fraction(1, 10), 2), net)
    outs = []
    for name in ("a.ppm", "b.ppm"):
        p = tmp_path / name
        assert run(capsys, "render", "--net", net, "--bbox", "-3,-2,3,2", "--res", "61x40", "--out", p)[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b"P6\n61 40\n255\n")
    img = read_ppm(outs[0])
    c0, c1 = np.array(BASE_PALETTE[0]), np.array(BASE_PALETTE[1])
    is0 = (img == c0).all(axis=2)
    is1 = (img == c1).all(axis=2)
    assert is0.any() and is1.any()
    assert (is0 == is1[:, ::-1]).all()
    white = (img == 255).all(axis=2)
    assert (white == white[:, ::-1]).all() and (is0 | is1 | white).all()


def test_render_low_beta_fixture(tmp_path, capsys):
    net = tmp_path / "low.json"
    net.write_text(dump_network(nonconvex_fixture()))
    code, out, _ = run(capsys, "render", "--net", net, "--bbox", "-4,-4,4,4", "--res", "20x20", "--out", tmp_path / "x.ppm")
    assert code == 0


@pytest.mark.parametrize("args", [["--bbox", "1,0,0,1"], ["--bbox", "0,0,1"], ["--res", "0x10"], ["--res", "big"]])
def test_render_usage_errors(two_net, capsys, args):
    base = {"--bbox": "-1,-1,1,1", "--res": "10x10"}
    base[args[0]] = args[1]
    code, _, _ = run(capsys, "render", "--net", two_net, *[v for kv in base.items() for v in kv])
    assert code == EXIT_USAGE


def test_bounds_report_two_stations(two_net, capsys):
    code, out, _ = run(capsys, "bounds", "--net", two_net, "--station", 0, "--angles", 90)
    lines = out.splitlines()
    assert code == 0
    assert lines[:6] == ["station 0", "kappa 1", "fatness 3", "explicit delta_lo 1/3", "explicit Delta 1",
                         lines[5]]
    assert lines[5].startswith("refined delta_lo ")
    assert lines[6].startswith("refined Delta ")
    measured = dict(line.rsplit(" ", 1) for line in lines[7:])
    lo, hi = (float(v) for v in measured["measured delta"].strip("[]").split(","))
    assert lo <= 1 / 3 <= hi


def test_bounds_report_degenerate_and_all_stations(tmp_path, capsys):
    net = tmp_path / "deg.json"
    save_network(Network.from_coords([(0, 0), (0, 0), (2, 0)], 0, 2), net)
    code, out, _ = run(capsys, "bounds", "--net", net)
    assert code == 0
    blocks = out.split("station ")[1:]
    assert len(blocks) == 3
    assert "degenerate zone" in blocks[0] and "degenerate zone" not in blocks[2]
    assert run(capsys, "bounds", "--net", net, "--station", 7)[0] == EXIT_USAGE


def test_build_and_query(two_net, tmp_path, capsys):
    idx = tmp_path / "two.idx"
    assert run(capsys, "build", "--net", two_net, "--eps", "1/10", "--out", idx)[0] == 0
    for point, want in (("0,3/10", "IN 0"), ("0,3/2", "OUT"), ("0,0", "IN 0"), ("40,-7.5", "OUT"), ("1,0", "IN 1")):
        code, out, _ = run(capsys, "query", "--index", idx, point)
        assert code == 0 and out.strip() == want


def test_build_is_byte_stable(built, tmp_path, capsys):
    net, idx = built
    again = tmp_path / "again.idx"
    assert run(capsys, "build", "--net", net, "--eps", "1/2", "--out", again)[0] == 0
    assert again.read_bytes() == idx.read_bytes()


@pytest.mark.parametrize("eps", ["0", "1", "3/2", "abc"])
def test_build_rejects_bad_eps(two_net, capsys, eps):
    assert run(capsys, "build", "--net", two_net, "--eps", eps)[0] == EXIT_USAGE


def test_build_rejects_trivial_net(tmp_path, capsys):
    net = tmp_path / "triv.json"
    save_network(Network.from_coords([(0, 0), (1, 0)], 0, 1), net)
    code, _, err = run(capsys, "build", "--net", net, "--eps", "1/2")
    assert code == EXIT_USAGE and "unbounded" in err


def test_query_usage_errors(built, capsys):
    _, idx = built
    assert run(capsys, "query", "--index", idx, "1;2")[0] == EXIT_USAGE
    assert run(capsys, "query", "--index", idx, "x,2")[0] == EXIT_USAGE


def test_verify_corpus_net_with_index(built, capsys):
    net, idx = built
    code, out, _ = run(capsys, "verify", "--net", net, "--index", idx, "--trials", 100, "--angles", 90)
    lines = out.splitlines()
    assert code == EXIT_OK and lines[-1] == "RESULT PASS"
    assert all(line.split()[0] in ("PASS", "SKIP", "RESULT") for line in lines)
    names = {line.split()[1] for line in lines if line.startswith("PASS")}
    assert names == {"convexity", "star-shape", "fatness", "bounds-sandwich", "index"}


def test_verify_nonconvex_fixture(tmp_path, capsys):
    net = tmp_path / "low.json"
    net.write_text(dump_network(nonconvex_fixture()))
    code, out, _ = run(capsys, "verify", "--net", net, "--expect-nonconvex", "--trials", 1000)
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("PASS nonconvex-witness station=0 ")
    # the same fixture is rejected without the flag, since beta < 1
    assert run(capsys, "verify", "--net", net)[0] == EXIT_USAGE


def test_verify_flags_tampered_index(built, tmp_path, capsys):
    net, idx = built
    index = deserialize_index(idx.read_bytes())
    z = index.zones[0]
    col = 0  # the station's own column
    z.columns[col] = z.columns[col] + [z.columns[col][-1] + 40]
    bad = tmp_path / "bad.idx"
    bad.write_bytes(serialize_index(index))
    code, out, _ = run(capsys, "verify", "--net", net, "--index", bad, "--trials", 100, "--angles", 45)
    assert code == EXIT_FAIL
    assert "FAIL index station=0" in out and out.splitlines()[-1] == "RESULT FAIL"


def test_verify_rejects_index_for_other_network(built, two_net, capsys):
    _, idx = built
    code, out, _ = run(capsys, "verify", "--net", two_net, "--index", idx, "--trials", 20, "--angles", 45)
    assert code == EXIT_FAIL and "FAIL index-network" in out


def test_corrupted_index_is_a_usage_error(built, tmp_path, capsys):
    _, idx = built
    bad = tmp_path / "corrupt.idx"
    bad.write_bytes(idx.read_bytes()[:-20])
    assert run(capsys, "query", "--index", bad, "0,0")[0] == EXIT_USAGE


def test_io_errors(tmp_path, two_net, capsys):
    assert run(capsys, "bounds", "--net", tmp_path / "missing.json")[0] == EXIT_IO
    assert run(capsys, "query", "--index", tmp_path / "missing.idx", "0,0")[0] == EXIT_IO
    assert run(capsys, "gen", "--n", 3, "--out", tmp_path / "no" / "dir" / "x.json")[0] == EXIT_IO


def test_bad_network_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"version": 1, "beta": 0.5, "stations": []}')
    assert run(capsys, "bounds", "--net", p)[0] == EXIT_USAGE
    p.write_text("not json")
    assert run(capsys, "bounds", "--net", p)[0] == EXIT_USAGE


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["build", "--net", "x"])
    assert exc.value.code == EXIT_USAGE


def test_console_entry_point(two_net):
    res = subprocess.run([sys.executable, "-m", "sinrzones.cli", "bounds", "--net", str(two_net)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "fatness 3" in res.stdout
