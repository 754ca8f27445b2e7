import csv
import io
import json
import math

import numpy as np
import pytest

from oracles import gamma_quarter_density, rho_quarter_density

from freeqid.cli import RunConfig, SpecError, dumps, main, parse_grid, parse_model_spec


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid_and_spec():
    assert np.allclose(parse_grid("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
    with pytest.raises(SpecError):
        parse_grid("1:0:0.1")
    assert parse_model_spec("mp:c=1,lam=1/4") == ("mp", {"c": 1.0, "lambda": 0.25})
    assert parse_model_spec("rho-acl:1,1,1/4")[1]["lambda"] == 0.25
    with pytest.raises(SpecError):
        parse_model_spec("nosuch:1")
    with pytest.raises(SpecError):
        RunConfig(tol=-1)


def test_dumps_is_stable():
    a = dumps({"b": 0.1, "a": [1 / 3, 2]})
    assert a == dumps({"a": [1 / 3, 2], "b": 0.1})
    assert "0.33333333333333331" in a


def test_density_gamma_at_zero(capsys):
    code, out, _ = run(capsys, "density", "gamma:a=1,sigma2=0.25", "--grid", "-4:4:0.01")
    assert code == 0
    d = json.loads(out)
    i = int(np.argmin(np.abs(np.array(d["x"]))))
    assert abs(d["f"][i] - 2 / math.pi) <= 1e-6
    assert all(abs(f - gamma_quarter_density(x)) <= 1e-12 for x, f in zip(d["x"], d["f"]))


def test_density_rho_csv(capsys):
    code, out, _ = run(capsys, "density", "rho-acl:a=1,c=1,lambda=0.25", "--grid", "-2:2:0.25",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 17
    for r in rows:
        assert abs(float(r["f"]) - rho_quarter_density(float(r["x"]))) <= 1e-11


def test_density_cauchy_values(capsys):
    code, out, _ = run(capsys, "density", "cauchy:a=1", "--grid", "-1:1:0.5")
    d = json.loads(out)
    want = [1 / (math.pi * (1 + x * x)) for x in d["x"]]
    assert code == 0 and np.allclose(d["f"], want, atol=1e-15)


def test_density_stieltjes_matches_closed(capsys):
    code, out, _ = run(capsys, "density", "gamma:1,0.25", "--grid", "0.5:1:0.25", "--method",
                       "stieltjes", "--y-levels", "1e-6,5e-7,2.5e-7")
    d = json.loads(out)
    assert code == 0
    assert np.allclose(d["f"], [gamma_quarter_density(x) for x in d["x"]], atol=1e-8)


def test_density_fm_levy_signed(capsys):
    code, out, _ = run(capsys, "density", "fm-levy:b=0.0625", "--grid", "-1:1:0.05")
    d = json.loads(out)
    assert code == 0 and d["meta"]["signed"] and min(d["f"]) < 0


def test_density_invalid_bound_exit_3(capsys):
    code, _, err = run(capsys, "density", "rho-acl:a=1,c=1,lambda=1")
    assert code == 3 and "(a/2c)^2" in err


def test_parse_error_exit_2(capsys):
    code, _, _ = run(capsys, "density", "bogus:1")
    assert code == 2
    code, _, _ = run(capsys, "density", "mp:c=1")
    assert code == 2


def test_output_is_deterministic(capsys, tmp_path):
    f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "density", "mp:1,0.25", "--grid", "0:3:0.5", "--out", str(f1))
    run(capsys, "density", "mp:1,0.25", "--grid", "0:3:0.5", "--out", str(f2))
    assert f1.read_bytes() == f2.read_bytes()


def test_triplet_and_classify_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "triplet", "smp:u=1,x=2")
    d = json.loads(out)
    assert code == 0 and d["class"]["classical_excluded"]
    path = tmp_path / "t.json"
    path.write_text(out)
    code, out2, _ = run(capsys, "triplet", "classify", "--in", str(path))
    assert code == 0 and json.loads(out2)["class"] == d["class"]


def test_pair_command(capsys):
    code, out, _ = run(capsys, "pair", "semicircle:0.5,2")
    d = json.loads(out)
    assert code == 0 and d["b"] == 0.5 and d["tau"]["atoms"] == [[0.0, 2.0]]


def test_cumulants_convert_and_hankel(capsys, tmp_path, monkeypatch):
    seq = tmp_path / "k.json"
    seq.write_text(json.dumps([0, 1, 0, 0, 0, 0]))
    code, out, _ = run(capsys, "cumulants", "convert", "--from", "free", "--to", "moments",
                       "--in", str(seq))
    assert code == 0 and json.loads(out)["values"] == [1, 0, 1, 0, 2, 0, 5]
    mom = tmp_path / "m.json"
    mom.write_text(json.dumps(["1", "1/3", "1/3", "1/3", "23/81"]))
    code, out, _ = run(capsys, "cumulants", "hankel", "--k", "2", "--in", str(mom))
    assert code == 0 and np.isclose(json.loads(out)["det"], -8 / 729, atol=1e-15)
    monkeypatch.setattr("sys.stdin", io.StringIO("[1, 0, 1, 0, 3]"))
    code, out, _ = run(capsys, "cumulants", "hankel", "--k", "2")
    assert code == 0 and json.loads(out)["det"] == 2


def test_cumulants_bernoulli_and_pair(capsys):
    code, out, _ = run(capsys, "cumulants", "bernoulli", "--a", "0.25", "--truncation", "3")
    d = json.loads(out)
    assert code == 0 and np.isclose(d["nu"][0][1], 1 / 3) and d["gaussian"] == 0
    code, _, err = run(capsys, "cumulants", "bernoulli", "--a", "0.5")
    assert code == 1 and "1/2" in err
    code, out, _ = run(capsys, "cumulants", "pair", "mp:1,0.75", "--n", "4")
    assert code == 0 and np.allclose(json.loads(out)["values"], [0.75] * 4)


def test_deconv_commands(capsys):
    code, out, _ = run(capsys, "deconv", "multi-mp:1,2,3,4")
    d = json.loads(out)
    assert code == 0 and d["sum"] == 1
    assert np.allclose(d["weights"], [-1 / 6, 4, -27 / 2, 32 / 3])
    code, out, _ = run(capsys, "deconv", "rho-acl", "--a", "1", "--c", "1", "--lambda", "1/4",
                       "--pick", "--grid", "0:1:0.5")
    d = json.loads(out)
    assert code == 0 and d["pick"]["passed"]
    assert np.allclose(d["density"]["f"], [rho_quarter_density(x) for x in (0, 0.5, 1)])
    code, out, _ = run(capsys, "deconv", "gamma", "--a", "1", "--sigma2", "0.25")
    assert code == 0 and json.loads(out)["class"]["gaussian_negative"]
    code, out, _ = run(capsys, "deconv", "fm-levy", "--b", "0.0625")
    assert code == 0


def test_bpx_commands(capsys):
    code, out, _ = run(capsys, "bpx", "classify", "--c", "4", "--atoms", "1:1")
    d = json.loads(out)
    assert code == 0
    assert [d[k]["status"] for k in ("in_phi", "in_phi_plus", "in_phi_star", "in_phi_boxplus")] \
        == ["yes", "no", "yes", "yes"]
    code, out, _ = run(capsys, "bpx", "density", "--c", "4", "--atoms", "1:1", "--side", "box",
                       "--grid", "-2:2:1")
    assert code == 0 and len(json.loads(out)["f"]) == 5
    code, out, _ = run(capsys, "bpx", "extend", "--mu", "semicircle:0,1", "--c", "4", "--atoms", "1:1")
    assert code == 0 and len(json.loads(out)["R"]) == 11
    code, _, _ = run(capsys, "bpx", "density", "--c", "8", "--atoms", "1:4")
    assert code == 3
    code, _, _ = run(capsys, "bpx", "classify", "--c", "4", "--atoms", "1")
    assert code == 2


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "cumulants")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert any("a^3 (a-1)^3" in c["name"] for c in d["checks"])
