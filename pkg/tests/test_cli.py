import csv
import io
import subprocess
import sys

import pytest

import gl3kuz.verify as verify
from gl3kuz.cli import main
from gl3kuz.verify import PropertyResult


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_sum_examples(capsys):
    code, out, _ = run("sum --kind gl3 --level 5 --d1 5 --d2 5 --m1 1 --m2 1 --n1 1 --n2 1".split(), capsys)
    assert code == 0
    assert out.startswith("# command: gl3kuz sum")
    assert "# seed: 0" in out
    assert rows(out)[0]["value"] == "5"
    code, out, _ = run("sum --kind classical --m 1 --n 1 --c 3".split(), capsys)
    assert code == 0 and rows(out)[0]["value"] == "-1"
    code, out, _ = run("sum --kind tilde --d1 1 --d2 5 --m1 1 --n1 1 --n2 1".split(), capsys)
    assert code == 0 and rows(out)[0]["value"] == "-1"


def test_sum_ranges(capsys):
    code, out, _ = run("sum --kind gl3 --level 5 --d1 5 --d2 5 --m1 1 --n2 1 --n1 0:4 --m2 0,1".split(), capsys)
    assert code == 0
    r = rows(out)
    assert len(r) == 10
    assert {x["value"] for x in r} == {"20", "0", "5"}


def test_fourier_examples(capsys):
    code, out, _ = run("fourier --d1 1 --d2 1 --freq 0,0,0,0,0,0".split(), capsys)
    assert code == 0 and float(rows(out)[0]["value_re"]) == 1
    code, out, _ = run("fourier --both --d1 4 --d2 4 --random 5".split(), capsys)
    assert code == 0
    assert all(float(x["deviation"]) < 1e-6 for x in rows(out))
    code, out, _ = run("fourier --twist-order 4 --p 5 --alpha1 3 --alpha2 3 --freq 0,0,0,0,0,0".split(), capsys)
    assert code == 0
    r = rows(out)[0]
    assert abs(complex(float(r["value_re"]), float(r["value_im"]))) <= 1e-8 * 5 ** 5


def test_whittaker_and_jtransform(capsys):
    code, out, _ = run("whittaker --tempered 0.2,-0.1 --y1 1,20 --y2 1".split(), capsys)
    assert code == 0 and len(rows(out)) == 2
    code, out, _ = run("jtransform --kind tilde --A 0.1".split(), capsys)
    assert code == 0 and float(rows(out)[0]["value_re"]) == 0
    code, out, _ = run("jtransform --kind big --A1 0.3 --A2 0.3 --eps2 -1".split(), capsys)
    assert code == 0 and float(rows(out)[0]["value_re"]) == 0


def test_rhs(capsys):
    code, out, _ = run("rhs --level 97 --n1 1 --n2 2 --m1 1 --m2 2".split(), capsys)
    assert code == 0
    r = {x["term"]: x for x in rows(out)}
    assert float(r["delta"]["value_re"]) > 0
    code, out, _ = run("rhs --level 97 --n1 1 --n2 2 --m1 2 --m2 1".split(), capsys)
    assert float({x["term"]: x for x in rows(out)}["delta"]["value_re"]) == 0


def test_usage_errors(capsys):
    code, out, err = run("sum --kind gl3 --d1 5 --d2 5".split(), capsys)
    assert code == 1 and out == "" and "--m1" in err
    code, out, err = run(["verify", "nonexistent"], capsys)
    assert code == 1 and out == "" and "nonexistent" in err
    assert run([], capsys)[0] == 1
    assert run(["sum", "--bogus"], capsys)[0] == 1
    code, out, _ = run("sum --kind gl3 --level 4 --d1 4 --d2 6".split(), capsys)
    assert code == 1 and out == ""


def test_verify_exit_codes(capsys, monkeypatch):
    code, out, _ = run(["verify", "weil"], capsys)
    assert code == 0 and rows(out)[0]["passed"] == "true"
    monkeypatch.setitem(verify.SUITES, "weil", lambda rng: [PropertyResult("always fails", 1, 1.0, False)])
    code, out, _ = run(["verify", "weil"], capsys)
    assert code == 2 and rows(out)[0]["passed"] == "false"


def test_config_and_output_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nkind = gl3\nlevel = 5\nd1 = 5\nd2 = 5\nm1 = 1\nn2 = 1\nn1 = 5\nm2 = 5\n")
    target = tmp_path / "out.csv"
    code, out, _ = run(["sum", "--config", str(cfg), "--output", str(target)], capsys)
    assert code == 0 and out == ""
    assert rows(target.read_text())[0]["value"] == "20"
    # explicit flags win over the file
    code, out, _ = run(["sum", "--config", str(cfg), "--n1", "1", "--m2", "1"], capsys)
    assert rows(out)[0]["value"] == "5"


def test_repeat_runs_byte_identical(capsys):
    argv = "fourier --d1 6 --d2 4 --random 20 --seed 7".split()
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gl3kuz", "sum", "--kind", "classical", "--m", "1", "--n", "1",
                          "--c", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert rows(res.stdout)[0]["value"] == "1"
