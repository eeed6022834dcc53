import json
import subprocess
import sys

import pytest

from hyperdoc.cli import main


@pytest.fixture(scope="module")
def docs(tmp_path_factory):
    d = tmp_path_factory.mktemp("docs")
    out = {}
    for name in ("subsets", "chain", "thin", "cube", "antichain", "trivial"):
        p = d / f"{name}.hdoc.json"
        assert main(["gen", name, "--out", str(p)]) in (0,)
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(["--format", "structured", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_gen_to_stdout(capsys):
    assert main(["gen", "trivial"]) == 0
    assert json.loads(capsys.readouterr().out)["meta"]["name"] == "trivial"


def test_check(capsys, docs):
    code, rep = run(capsys, "check", docs["subsets"], "--rich")
    assert code == 0 and rep["status"] == "pass"
    assert rep["result"]["consistency"] == "two_valued"
    assert [c["name"] for c in rep["checks"]] == ["structure", "rich"]


def test_check_not_rich(capsys, docs):
    code, rep = run(capsys, "check", docs["thin"], "--rich")
    assert code == 1
    assert ["e", "{u}"] in rep["checks"][1]["failures"]


def test_check_missing_witness(capsys, docs):
    code, rep = run(capsys, "check", docs["antichain"], "--layers", "primary")
    assert code == 1
    assert "MissingWitness" in rep["checks"][0]["error"]


def test_construct(capsys, docs, tmp_path):
    out = tmp_path / "c.hdoc.json"
    code, rep = run(capsys, "construct", docs["subsets"], "add-constant", "2", "--out", str(out))
    assert code == 0 and out.exists()
    code, rep = run(capsys, "construct", docs["chain"], "notnot")
    assert code == 0
    code, rep = run(capsys, "construct", docs["subsets"], "henkin", "2", "{1}")
    assert code == 0


def test_saturate(capsys, docs):
    code, rep = run(capsys, "saturate", docs["thin"])
    assert code == 0
    assert rep["result"]["covered"] == rep["result"]["targets"] == 6
    code, rep = run(capsys, "saturate", docs["thin"], "--budget", "1")
    assert rep["result"]["truncated"] is True


def test_ultrafilter(capsys, docs):
    code, rep = run(capsys, "ultrafilter", docs["chain"])
    assert code == 0
    assert rep["result"]["ultrafilter"] == ["1/2", "1"]
    code, rep = run(capsys, "ultrafilter", docs["chain"], "0")
    assert code == 1


def test_quotient(capsys, docs):
    code, rep = run(capsys, "quotient", docs["cube"], "--filter", "{x}")
    assert code == 0
    assert rep["result"]["fiber_sizes"] == {"t": 2}
    code, rep = run(capsys, "quotient", docs["cube"], "--filter", "{}")
    assert rep["result"]["consistency"] == "inconsistent"


def test_model(capsys, docs):
    code, rep = run(capsys, "model", docs["subsets"], "--budget", "0", "--elementary")
    assert code == 0
    assert rep["result"]["diagonal"] == "interp(delta) = diagonal"
    assert rep["result"]["model"]["actions"] == "omitted"
    code, rep = run(capsys, "model", docs["thin"], "--budget", "0")
    assert code == 1
    assert "NotRichError" in rep["checks"][0]["error"]


def test_colimit(capsys, docs):
    code, rep = run(capsys, "colimit", docs["cube"], "add-axiom:{x,y}", "add-axiom:{x}")
    assert code == 0
    assert rep["result"]["fiber_sizes"] == [2]
    code, rep = run(capsys, "colimit", docs["subsets"], "add-constant:2")
    assert code == 1


def test_usage_errors(capsys, docs, tmp_path):
    assert main(["check", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": ')
    assert main(["check", str(bad)]) == 2
    assert "line" in capsys.readouterr().err
    assert main(["colimit", docs["cube"], "frobnicate"]) == 2
    assert main(["nope"]) == 2


def test_structured_reports_are_byte_identical(capsys, docs):
    outs = []
    for _ in range(2):
        main(["--format", "structured", "model", docs["subsets"], "--budget", "0"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    assert "time" not in json.loads(outs[0])


def test_text_report(capsys, docs):
    assert main(["check", docs["chain"]]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS")
    assert "[pass] structure" in out


def test_console_script_module(docs):
    r = subprocess.run([sys.executable, "-m", "hyperdoc.cli", "check", docs["trivial"]],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
