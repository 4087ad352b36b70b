import json

import pytest

from matcomp.cli import main
from matcomp.matfile import MatrixFileError, parse_matrix_text, render_matrix
from matcomp import GF2, PartialMatrix

DIAG_TEXT = """# separated entries
field gf2
2 2
1 ?
? 1
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_matfile_round_trip():
    M = parse_matrix_text(DIAG_TEXT)
    assert M == PartialMatrix.from_rows(GF2, [[1, None], [None, 1]])
    canonical = render_matrix(M)
    assert parse_matrix_text(canonical) == M
    assert render_matrix(parse_matrix_text(canonical)) == canonical


def test_matfile_errors_name_the_line():
    with pytest.raises(MatrixFileError) as err:
        parse_matrix_text("field gf7\n1 1\n1\n")
    assert "line 1" in str(err.value)
    with pytest.raises(MatrixFileError) as err2:
        parse_matrix_text("field gf2\n2 2\n1 ?\n")
    assert "line" in str(err2.value)
    with pytest.raises(MatrixFileError) as err3:
        parse_matrix_text("field gf2\n2 2\n1 ?\n? x\n")
    assert "line 4" in str(err3.value)
    with pytest.raises(MatrixFileError):
        parse_matrix_text("")


def test_cli_complete_round_trip(tmp_path, capsys):
    infile = _write(tmp_path, "in.txt", DIAG_TEXT)
    outfile = str(tmp_path / "out.txt")
    assert main(["complete", "--in", infile, "--out", outfile]) == 0
    out = capsys.readouterr().out
    assert out.strip() == "rank=1 deviation_bound=0"
    completed = parse_matrix_text(open(outfile).read())
    assert completed.is_fully_known
    assert completed.get(0, 0) == 1 and completed.get(1, 1) == 1

    # byte-identical across runs
    first = open(outfile).read()
    assert main(["complete", "--in", infile, "--out", outfile]) == 0
    assert open(outfile).read() == first


def test_cli_complete_fully_known_identity(tmp_path, capsys):
    text = "field gf2\n2 2\n1 0\n1 1\n"
    infile = _write(tmp_path, "in.txt", text)
    outfile = str(tmp_path / "out.txt")
    assert main(["complete", "--in", infile, "--out", outfile]) == 0
    assert capsys.readouterr().out.strip() == "rank=2 deviation_bound=0"
    assert open(outfile).read() == text


def test_cli_complete_flags(tmp_path, capsys):
    infile = _write(tmp_path, "in.txt", DIAG_TEXT)
    outfile = str(tmp_path / "out.txt")
    rc = main(["complete", "--in", infile, "--out", outfile,
               "--no-subdiag", "--no-approx", "--zero-budget", "4"])
    assert rc == 0
    assert "rank=" in capsys.readouterr().out


def test_cli_complete_parse_error(tmp_path, capsys):
    infile = _write(tmp_path, "bad.txt", "field gf9\n1 1\n1\n")
    rc = main(["complete", "--in", infile, "--out", str(tmp_path / "o.txt")])
    assert rc == 1
    assert "line 1" in capsys.readouterr().err


def test_cli_missing_file(tmp_path):
    rc = main(["complete", "--in", str(tmp_path / "nope.txt"),
               "--out", str(tmp_path / "o.txt")])
    assert rc == 1


def test_cli_decompose(tmp_path, capsys):
    infile = _write(tmp_path, "in.txt", DIAG_TEXT)
    assert main(["decompose", "--in", infile]) == 0
    out = capsys.readouterr().out
    assert "clusters=2" in out
    assert main(["decompose", "--in", infile, "--json"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert len(body["clusters"]) == 2


def test_cli_simulate(tmp_path, capsys, monkeypatch):
    outfile = str(tmp_path / "sim.csv")
    rawfile = str(tmp_path / "raw.csv")
    args = ["simulate", "--n", "6", "--k-grid", "0,1,36", "--trials", "4",
            "--seed", "11", "--out", outfile, "--raw", rawfile]
    assert main(args) == 0
    csv1 = open(outfile).read()
    raw1 = open(rawfile).read()
    assert csv1.splitlines()[0] == "n,k,mean_clusters,stddev"
    assert raw1.splitlines()[0] == "n,k,trial,clusters"
    assert csv1.splitlines()[1] == "6,0,0.000000,0.000000"
    # same seed: byte-identical
    assert main(args) == 0
    assert open(outfile).read() == csv1 and open(rawfile).read() == raw1
    # threads env var must not change results
    monkeypatch.setenv("MATCOMP_THREADS", "3")
    assert main(args) == 0
    assert open(outfile).read() == csv1
    capsys.readouterr()


def test_cli_simulate_k_steps(tmp_path, capsys):
    outfile = str(tmp_path / "sim.csv")
    assert main(["simulate", "--n", "4", "--k-steps", "4", "--trials", "2",
                 "--seed", "0", "--out", outfile]) == 0
    lines = open(outfile).read().splitlines()
    ks = [int(line.split(",")[1]) for line in lines[1:]]
    assert ks[0] == 0 and ks[-1] == 16
    capsys.readouterr()


def test_cli_oracle(tmp_path, capsys):
    infile = _write(tmp_path, "in.txt", DIAG_TEXT)
    witness = str(tmp_path / "w.txt")
    assert main(["oracle", "--in", infile, "--out", witness]) == 0
    assert capsys.readouterr().out.strip() == "mr=1"
    w = parse_matrix_text(open(witness).read())
    assert w.is_fully_known

    # budget exceeded -> exit 3
    blank = _write(tmp_path, "blank.txt", "field gf2\n3 3\n? ? ?\n? ? ?\n? ? ?\n")
    assert main(["oracle", "--in", blank, "--max-unknowns", "2"]) == 3
    capsys.readouterr()

    # infinite field -> exit 1 with a clear message
    rational = _write(tmp_path, "q.txt", "field rational\n1 1\n?\n")
    assert main(["oracle", "--in", rational]) == 1
    assert "finite field" in capsys.readouterr().err


def test_cli_trim(tmp_path, capsys):
    dup = _write(tmp_path, "dup.txt", "field rational\n2 2\n1 1\n2 2\n")
    logfile = str(tmp_path / "log.json")
    assert main(["trim", "--in", dup, "--log", logfile]) == 0
    out = capsys.readouterr().out
    core = parse_matrix_text(out)
    assert (core.rows, core.cols) == (1, 1)
    log = json.loads(open(logfile).read())
    assert log["rows"] == 2 and log["cols"] == 2
    assert log["records"][0]["axis"] == "col"
    assert log["records"][0]["coefficients"] == ["1"]
    assert log["records"][0]["approximate"] is False


def test_cli_trim_untrimmable(tmp_path, capsys):
    infile = _write(tmp_path, "in.txt", DIAG_TEXT)
    assert main(["trim", "--in", infile]) == 0
    core = parse_matrix_text(capsys.readouterr().out)
    assert core == PartialMatrix.from_rows(GF2, [[1, None], [None, 1]])


def test_cli_trim_empty_file(tmp_path, capsys):
    empty = _write(tmp_path, "e.txt", "")
    assert main(["trim", "--in", empty]) == 1
    capsys.readouterr()
