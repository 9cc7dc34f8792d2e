import json
from pathlib import Path

import numpy as np
import pytest

from invopt import cli
from invopt.errors import SchemaError
from invopt.generators import ex1_raw, random_suite
from invopt.io import (InstanceFile, dump_instance, dumps_record, instance_from_arrays,
                       instance_from_dict, instance_to_dict, load_cost, load_instance,
                       load_schema, parse_json_text, round_sig)

ROOT = Path(__file__).resolve().parents[1]
EX1_FILE = ROOT / "demos" / "data" / "ex1.json"


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _suite_dir(tmp_path, count=2, bad=False):
    d = tmp_path / "suite"
    d.mkdir()
    for inst in random_suite(count, seed=5):
        dump_instance(InstanceFile(inst.name, inst.raw, tuple(inst.x_struct),
                                   tuple(inst.c_ring), inst.group), d / f"{inst.name}.json")
    if bad:
        data = json.loads((d / "small-00.json").read_text())
        data["observation"] = [-50] * len(data["observation"])
        (d / "zz-bad.json").write_text(json.dumps(data))
    return d


# ---------------------------------------------------------------- schema and files

def test_schema_copies_identical():
    docs = json.loads((ROOT / "docs" / "instance.schema.json").read_text())
    assert docs == load_schema()
    assert load_schema()["properties"]["format"]["const"] == 1


def test_round_trip(tmp_path):
    inst = load_instance(EX1_FILE)
    dump_instance(inst, tmp_path / "a.json")
    again = load_instance(tmp_path / "a.json")
    assert instance_to_dict(again) == instance_to_dict(inst)
    p, obs, c = again.build()
    np.testing.assert_array_equal(obs.sigma_hat, [3, 2, 4, 19])
    np.testing.assert_array_equal(c, [3, 1])


def test_round_trip_generated(tmp_path):
    for inst in random_suite(2, seed=1):
        f = InstanceFile(inst.name, inst.raw, tuple(inst.x_struct), tuple(inst.c_ring),
                         inst.group)
        dump_instance(f, tmp_path / "x.json")
        g = load_instance(tmp_path / "x.json")
        np.testing.assert_array_equal(g.build()[0].A, inst.problem.A)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(format=2),
    lambda d: d.pop("observation"),
    lambda d: d.update(extra=1),
    lambda d: d["problem"]["constraints"][0].update(relation="<"),
    lambda d: d.update(config={"model": "nope"}),
])
def test_schema_rejections(mutate):
    d = json.loads(EX1_FILE.read_text())
    mutate(d)
    with pytest.raises(SchemaError):
        instance_from_dict(d)


def test_reference_cost_length():
    d = json.loads(EX1_FILE.read_text())
    d["reference_cost"] = [1, 2, 3]
    with pytest.raises(SchemaError):
        instance_from_dict(d).build()


def test_non_finite_rejected():
    with pytest.raises(SchemaError):
        parse_json_text('{"a": NaN}')
    with pytest.raises(SchemaError):
        parse_json_text("{")


def test_round_sig_and_record():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig(float("inf")) == "inf"
    assert json.loads(dumps_record({"x": np.float64(2 / 3), "k": np.int64(3)})) == {
        "x": 0.666666666667, "k": 3}


def test_instance_from_arrays():
    f = instance_from_arrays("e", [[-4, -3], [-1, -3], [6, 1], [-3, 5]], "<=",
                             [-19, -8, 30, 17], [4, 2], [3, 1])
    assert instance_to_dict(f)["problem"]["constraints"][2]["coeffs"] == [6.0, 1.0]
    assert f.raw.constraints == ex1_raw().constraints


def test_load_cost(tmp_path):
    (tmp_path / "a.json").write_text("[1, 2]")
    (tmp_path / "b.json").write_text('{"c_hat": [1.5, 2]}')
    (tmp_path / "c.json").write_text('{"x": 1}')
    assert load_cost(tmp_path / "a.json").tolist() == [1, 2]
    assert load_cost(tmp_path / "b.json").tolist() == [1.5, 2]
    with pytest.raises(SchemaError):
        load_cost(tmp_path / "c.json")


# ---------------------------------------------------------------- commands

def test_solve_biobj_unit(capsys):
    code, out, _ = _run(capsys, "solve", EX1_FILE, "--model", "biobj", "--weights", "unit",
                        "--no-timing")
    assert code == 0
    rep = json.loads(out)
    assert rep["master_objective"] == pytest.approx(8 / 3)
    assert rep["c_hat"] == pytest.approx([4 / 3, 1])
    assert rep["lp_certificate"]["z_lp"] == pytest.approx(19 / 3)
    assert "timing" not in rep


def test_solve_tolerance_scale_certify(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, _, _ = _run(capsys, "solve", EX1_FILE, "--model", "tolerance", "--tau", "1e-3",
                      "--scale", "--certify", "--out", out_file)
    assert code == 0
    rep = json.loads(out_file.read_text())
    assert rep["l1_deviation"] == pytest.approx(3.99, abs=0.05)
    assert rep["scaled"]["l1_deviation"] == pytest.approx(1.25, abs=1e-3)
    assert rep["oracle"]["optimal"] is False
    assert "cpu_seconds" in rep["timing"]


def test_verify(capsys, tmp_path):
    (tmp_path / "c.json").write_text("[1, 1]")
    code, out, _ = _run(capsys, "verify", EX1_FILE, "--cost", tmp_path / "c.json")
    rep = json.loads(out)
    assert code == 0 and rep["rgap"] == 0 and rep["oracle"]["optimal"]
    (tmp_path / "d.json").write_text("[3, 1]")
    rep = json.loads(_run(capsys, "verify", EX1_FILE, "--cost", tmp_path / "d.json")[1])
    assert rep["objective_at_x_hat"] == 14 and rep["lower_bound"] == 10
    assert rep["rgap"] == pytest.approx(4 / 14)


def test_verify_accepts_report(capsys, tmp_path):
    code, out, _ = _run(capsys, "solve", EX1_FILE, "--model", "biobj", "--weights", "unit")
    (tmp_path / "r.json").write_text(out)
    code, out, _ = _run(capsys, "verify", EX1_FILE, "--cost", tmp_path / "r.json")
    assert code == 0 and json.loads(out)["c_hat"] == pytest.approx([4 / 3, 1])


def test_cutplane_log(capsys, tmp_path):
    log = tmp_path / "it.jsonl"
    code, out, _ = _run(capsys, "cutplane", EX1_FILE, "--log", log, "--no-timing")
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "converged"
    assert rep["l1_deviation"] == pytest.approx(2.0)
    recs = [json.loads(line) for line in log.read_text().splitlines()]
    assert recs[0]["k"] == 0 and recs[-1]["forward_gap"] < 1e-2
    # --no-timing drops the clock so logs are reproducible
    assert all(set(r) == {"k", "tau", "master_norm", "forward_gap", "cuts", "master_status"}
               for r in recs)


def test_cutplane_log_to_stderr(capsys):
    code, _, err = _run(capsys, "cutplane", EX1_FILE, "--log", "-")
    assert code == 0
    assert json.loads(err.splitlines()[0])["k"] == 0


def test_exit_schema(capsys, tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert _run(capsys, "solve", tmp_path / "bad.json")[0] == 2
    assert _run(capsys, "solve", tmp_path / "missing.json")[0] == 2
    assert _run(capsys, "cutplane", EX1_FILE, "--max-iters", "-1")[0] == 2


def test_exit_observation(capsys, tmp_path):
    d = json.loads(EX1_FILE.read_text())
    d["observation"] = [0, 0]
    (tmp_path / "o.json").write_text(json.dumps(d))
    code, _, err = _run(capsys, "solve", tmp_path / "o.json")
    assert code == 3 and "row 0" in err


def test_exit_solver(capsys):
    code, _, err = _run(capsys, "solve", EX1_FILE, "--model", "bigm", "--big-m", "1e-9")
    assert code == 4 and "error" in err


def test_batch_outputs(capsys, tmp_path):
    d = _suite_dir(tmp_path)
    csv_f, md_f, js_f = tmp_path / "s.csv", tmp_path / "s.md", tmp_path / "s.json"
    code, out, _ = _run(capsys, "batch", d, "--csv", csv_f, "--md", md_f, "--json", js_f)
    assert code == 0
    assert out == md_f.read_text()
    lines = csv_f.read_text().splitlines()
    assert lines[0].startswith("group,count,rgap_min")
    assert [l.split(",")[0] for l in lines[1:]] == ["large", "medium", "small"]
    data = json.loads(js_f.read_text())
    assert len(data["results"]) == 6 and all(r["ok"] for r in data["results"])
    assert all(r["report"]["oracle"] is not None for r in data["results"])


def test_batch_parallel_matches_serial(capsys, tmp_path):
    d = _suite_dir(tmp_path)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target, par in ((a, "1"), (b, "3")):
        code, _, _ = _run(capsys, "batch", d, "--model", "biobj", "--no-timing",
                          "--parallel", par, "--json", target)
        assert code == 0
    assert a.read_text() == b.read_text()


def test_batch_failure_exit(capsys, tmp_path):
    d = _suite_dir(tmp_path, count=1, bad=True)
    code, _, err = _run(capsys, "batch", d, "--no-certify")
    assert code == 1 and "zz-bad.json" in err


def test_batch_empty_dir(capsys, tmp_path):
    assert _run(capsys, "batch", tmp_path)[0] == 2
