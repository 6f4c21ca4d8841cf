from __future__ import annotations

import json
import random

import pytest
import sympy as sp

from vocluster.characters import random_context
from vocluster.cli import main
from vocluster.vcluster import make_seed, seed_to_json
from vocluster.voa import HeisenbergVOA


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def params(tmp_path):
    return write(tmp_path / "params.json", {"genus": 1, "W": {"1": "1", "-1": "0"}, "q": {"1": "1/4"}})


@pytest.fixture
def a2(tmp_path):
    return write(tmp_path / "B.json", [[0, 1], [-1, 0]])


@pytest.fixture
def seed_file(tmp_path):
    V = HeisenbergVOA(cutoff=6)
    ctx = random_context(V, 1, 1, ["y1", "y2"], random.Random(0))
    seed = make_seed(ctx, [V.a(1), V.omega], ["y1", "y2"])
    return write(tmp_path / "seed.json", seed_to_json(seed))


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main(list(argv) + ["--out-dir", str(out)])
    return code, out


def load(out, name):
    return json.loads((out / name).read_text())


def test_schottky_commands(tmp_path, params):
    code, out = run(tmp_path, "schottky", "check", "--params", params)
    assert code == 0
    assert all(load(out, "manifest.json")["checks"].values())
    code, out = run(tmp_path, "schottky", "orbit", "--params", params, "--gamma", "1,1,0,1", name="orbit")
    assert code == 0 and load(out, "schottky_orbit.json")["gamma"]
    code, out = run(tmp_path, "schottky", "words", "--genus", "2", "--max-len", "3", name="words")
    assert code == 0 and load(out, "schottky_words.json")["counts"] == [1, 4, 12, 36]


def test_zhu_kernel_command(tmp_path):
    code, out = run(tmp_path, "zhu", "kernel", "--order", "2", "--weight", "2")
    assert code == 0 and load(out, "zhu_kernel.json")["telescoping_exact"]


def test_partition_symbolic(tmp_path):
    code, out = run(tmp_path, "char", "partition", "--order", "1", "--symbolic")
    assert code == 0
    series = load(out, "partition.json")["series"]
    text = json.dumps(series)
    assert "w1" in text and "wm1" in text


def test_partition_symbolic_value(tmp_path, capsys):
    assert main(["char", "partition", "--order", "1", "--symbolic"]) == 0
    data = json.loads(capsys.readouterr().out)
    terms = data["series"]["terms"]
    w1, wm1 = sp.symbols("w1 wm1")
    total = sum(sp.sympify(t["coeff"]["expr"]) * sp.Symbol("rho") ** sp.Rational(t["rho_exp"][0]) for t in terms)
    assert sp.simplify(total - (1 - sp.Symbol("rho") / (w1 - wm1) ** 2)) == 0


def test_char_npoint_and_verify(tmp_path):
    code, out = run(tmp_path, "char", "npoint", "--order", "1", "--states", "a(-1)|0>;a(-1)|0>")
    assert code == 0 and load(out, "npoint.json")["hash"]
    code, out = run(tmp_path, "char", "verify-zhu", "--order", "1", "--states", "a(-1)|0>", name="vz")
    assert code == 0 and load(out, "verify_zhu.json")["equal"]


def test_cluster_commands(tmp_path, a2):
    code, out = run(tmp_path, "cluster", "mutate", "--B", a2, "--word", "1,2,1")
    assert code == 0 and load(out, "cluster_mutate.json")["reverse_restores"]
    code, out = run(tmp_path, "cluster", "enumerate", "--B", a2, name="enum")
    summary = load(out, "cluster_enumerate.json")
    assert code == 0 and summary["clusters"] == 5 and summary["closed"]
    code, out = run(tmp_path, "cluster", "laurent", "--B", a2, "--word", "1,2,1,2", "--coefficients",
                    "principal", name="laurent")
    assert code == 0 and load(out, "cluster_laurent.json")["laurent"]


def test_vcluster_commands(tmp_path, seed_file):
    for xi in ("1", "-1"):
        code, out = run(tmp_path, "vcluster", "involution", "--seed", seed_file, "--xi", xi, name=f"inv{xi}")
        assert code == 0 and load(out, "vcluster_involution.json")["ok"]
    spec = write(tmp_path / "spec.json", {"u": "a(-1)|0>", "mode": 1, "direction": 1})
    code, out = run(tmp_path, "vcluster", "mutate", "--seed", seed_file, "--spec", spec, name="mut")
    assert code == 0
    assert load(out, "vcluster_mutate.json")["states"][0] == HeisenbergVOA().vacuum.to_json()


def test_verify_all(tmp_path):
    code, out = run(tmp_path, "verify-all", "--genus", "1", "--order", "2")
    assert code == 0
    checks = load(out, "manifest.json")["checks"]
    assert checks == {"recursion": True, "involution": True, "axioms": True}


def test_error_exit_codes(tmp_path, a2, seed_file):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["schottky", "check", "--params", str(bad)]) == 2
    assert main(["schottky", "check"]) == 2
    badB = write(tmp_path / "badB.json", [[0, 1], [1, 0]])
    assert main(["cluster", "enumerate", "--B", badB]) == 2
    assert main(["char", "partition", "--order", "1/3"]) == 2
    assert main(["no-such-group"]) == 2
    data = json.loads(open(seed_file).read())
    data["character_hash"] = "0" * 64
    tampered = write(tmp_path / "tampered.json", data)
    assert main(["vcluster", "involution", "--seed", tampered]) == 1


def test_csv_format(tmp_path, a2):
    code, out = run(tmp_path, "cluster", "enumerate", "--B", a2, "--format", "csv")
    assert code == 0
    lines = (out / "cluster_enumerate.csv").read_text().splitlines()
    assert lines[0] == "key,value" and any(l.startswith("clusters,") for l in lines)


@pytest.mark.parametrize("argv", [
    ["char", "partition", "--order", "2"],
    ["zhu", "kernel", "--order", "1", "--seed", "3"],
    ["cluster", "enumerate", "--B", "B"],
])
def test_deterministic_artifacts(tmp_path, a2, argv):
    argv = [a2 if x == "B" else x for x in argv]
    _, one = run(tmp_path, *argv, name="one")
    _, two = run(tmp_path, *argv, name="two")
    files = sorted(p.name for p in one.iterdir())
    assert files == sorted(p.name for p in two.iterdir())
    for name in files:
        if name == "manifest.json":
            m1, m2 = load(one, name), load(two, name)
            m1.pop("wall_time"), m2.pop("wall_time")
            assert m1 == m2
        else:
            assert (one / name).read_bytes() == (two / name).read_bytes()
