import json
import subprocess
import sys

import pytest

from qscatter.cli import main, split_charges
from qscatter.fixtures import FIXTURES, load_fixture


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _err = run(capsys, *argv)
    return code, json.loads(out)


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def test_scatter_pentagon_seed(capsys, tmp_path):
    seed = write(tmp_path, "seed.json", {"seed_vectors": [[1, 0], [0, 1]], "blowups": [{"dir": [1, 0], "class": "E1"}, {"dir": [0, 1], "class": "E2"}]})
    code, rep = run_json(capsys, "scatter", seed, "--order", "5")
    assert code == 0
    assert rep["added_walls"] == [{"direction": [1, 1], "f": "(1) + (s^-1)*z^(-1,-1)*z^[E1+E2]"}]
    assert rep["loop_identity"]["pass"]


def test_scatter_empty_seed(capsys, tmp_path):
    code, rep = run_json(capsys, "scatter", write(tmp_path, "e.json", {"seed_vectors": []}))
    assert code == 0 and rep["pass"]
    assert rep["diagram"]["walls"] == [] and rep["added_walls"] == []


def test_malformed_json(capsys, tmp_path):
    path = write(tmp_path, "bad.json", '{\n  "seed_vectors": [[1, 0],\n  }\n')
    code, _out, err = run(capsys, "scatter", path)
    assert code == 2
    assert "bad.json:3:3" in err


def test_input_errors(capsys, tmp_path):
    assert run(capsys, "theta", "no_such_fixture")[0] == 2
    assert run(capsys, "theta", "dp5", "--charges", "v9")[0] == 2
    assert run(capsys, "theta", "dp5", "--order", "0")[0] == 2
    assert run(capsys, "frobnicate", "dp5")[0] == 2
    assert run(capsys, "scatter", write(tmp_path, "s.json", {"seed_vectors": [[2, 0]]}))[0] == 2


def test_relations_dp5_verbatim(capsys):
    code, rep = run_json(capsys, "relations", "dp5")
    assert code == 0
    texts = [r["text"] for r in rep["relations"]]
    assert "v5*v2 = z^{D1+E1} + q^{1/2}*z^{D1}*v1" in texts
    assert "v2*v5 = z^{D1+E1} + q^{-1/2}*z^{D1}*v1" in texts
    assert len(texts) == 10


def test_relations_poisson_v2(capsys):
    code, rep = run_json(capsys, "relations", "v2", "--poisson")
    assert code == 0
    assert [r["text"] for r in rep["poisson"]] == ["{x,y} = 2*z - x*y", "{y,z} = -y*z", "{z,x} = -x*z"]


def test_theta_identity_row(capsys):
    code, rep = run_json(capsys, "theta", "dp5", "--charges", "(1,1)@2,0")
    assert code == 0
    rows = {(r["p1"], r["p2"]): r["terms"] for r in rep["table"]}
    (term,) = rows[("v3+v4", "0")]
    assert term["p"] == "v3+v4" and term["class"] == {} and term["text"] == "1"


def test_theta_q_eval(capsys):
    _code, rep = run_json(capsys, "theta", "dp5", "--charges", "v1,v3", "--q-eval", "4")
    rows = {(r["p1"], r["p2"]): r["terms"] for r in rep["table"]}
    vals = {t["p"]: t["value"] for t in rows[("v1", "v3")]}
    # q = 4, q^(1/2) = 2
    assert vals == {"0": "1", "v2": "2"}


def _mutated_dp5():
    obj = load_fixture("dp5").to_json()
    obj["surface"]["rays"][0]["exceptionals"] = ["E2"]
    return obj


def test_check_mutated_fixture(capsys, tmp_path):
    code, rep = run_json(capsys, "check", write(tmp_path, "mut.json", _mutated_dp5()))
    assert code == 1
    assert not rep["pass"]
    assert rep["first_failure"]


def test_check_table_input(capsys, tmp_path):
    code, rep = run_json(capsys, "theta", "dp5", "--charges", "v1,v2,v3")
    table = {"surface": load_fixture("dp5").to_json()["surface"], "order": 3, "table": rep["table"]}
    code, rep = run_json(capsys, "check", write(tmp_path, "t.json", table))
    assert code == 0 and rep["pass"]
    # corrupt one class
    table["table"][2]["terms"][0]["class"] = {"D2": 1, "E3": 1}
    code, rep = run_json(capsys, "check", write(tmp_path, "t2.json", table))
    assert code == 1


def test_out_and_text(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, printed, _ = run(capsys, "relations", "v1", "--out", str(out))
    assert code == 0 and printed == ""
    assert json.loads(out.read_text())["relations"][3]["text"] == "x*y*z = q^{1/2}*x^2 + q*z^3"
    code, text, _ = run(capsys, "relations", "v1", "--format", "text")
    assert "x*y*z = q^{1/2}*x^2 + q*z^3" in text


def test_deterministic_output(tmp_path):
    cmd = [sys.executable, "-m", "qscatter", "relations", "dp5", "--poisson"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


@pytest.mark.parametrize("name", FIXTURES)
@pytest.mark.parametrize("command", ["canonical", "theta", "relations", "check"])
def test_fixture_end_to_end(capsys, name, command):
    code, rep = run_json(capsys, command, name)
    assert code == 0 and rep["pass"]


def test_pentagon_fixture_scatter(capsys):
    code, rep = run_json(capsys, "scatter", "pentagon", "--order", "5")
    assert code == 0 and len(rep["added_walls"]) == 1


def test_split_charges():
    assert split_charges("v1, (2,1)@0 ,0") == ["v1", "(2,1)@0", "0"]
