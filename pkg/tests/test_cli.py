import json

import pytest

from skreduce import cli


def run(tmp_path, *argv):
    code = cli.main([argv[0], "--out", str(tmp_path), *argv[1:]])
    path = tmp_path / f"{argv[0]}.json"
    return code, (json.loads(path.read_text()) if path.exists() else None)


def test_brute(tmp_path):
    code, doc = run(tmp_path, "brute", "--n", "7", "--N", "1")
    assert code == 0
    assert doc["body"]["schema_version"] == cli.REPORT_SCHEMA
    assert "37304" in json.dumps(doc["body"])


def test_recursion_check(tmp_path):
    code, doc = run(tmp_path, "recursion-check", "--trials", "30")
    assert code == 0 and doc["body"]["failures"] == 0
    assert (tmp_path / "recursion-check.csv").exists()


def test_body_is_deterministic(tmp_path):
    a = run(tmp_path / "a", "recursion-check", "--trials", "10", "--seed", "5")[1]
    b = run(tmp_path / "b", "recursion-check", "--trials", "10", "--seed", "5")[1]
    assert a["body"] == b["body"]


def test_config_precedence(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[common]\nseed = 9\n[recursion-check]\ntrials = 7\nN = 2\n")
    code, doc = run(tmp_path, "recursion-check", "--config", str(ini), "--trials", "5")
    assert code == 0
    params = doc["body"]["params"]
    assert params["trials"] == 5 and params["N"] == 2 and params["seed"] == 9


def test_config_errors(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[brute]\nbogus = 1\n")
    assert run(tmp_path, "brute", "--config", str(ini))[0] == 2
    assert run(tmp_path, "brute", "--n", "x")[0] == 2
    assert run(tmp_path, "reduce-modp", "--mode", "nope")[0] == 2


def test_reduce_modp_small(tmp_path):
    code, doc = run(tmp_path, "reduce-modp", "--trials", "2", "--n", "5", "--p", "307")
    assert code == 0 and doc["body"]["checks"]["candidate_cap"]


def test_lipschitz_and_tvcurve(tmp_path):
    assert run(tmp_path, "lipschitz", "--grid", "30")[0] == 0
    code, doc = run(tmp_path, "tvcurve", "--lambdas", "0.01,0.1,0.5")
    assert code == 0 and set(doc["body"]["slopes"]) == {"1.0", "2.0", "5.0"}


def test_uniformity_failing_check_sets_exit_code(tmp_path):
    # far too few samples for the bound to hold
    code, doc = run(tmp_path, "uniformity", "--samples", "2000", "--Ns", "4,8", "--max-last", "0.0001")
    assert code == 1


def test_decode_bench_bw(tmp_path):
    code, _ = run(tmp_path, "decode-bench", "--decoder", "bw", "--p", "101", "--L", "60", "--d", "5",
                  "--agree", "40", "--trials", "2")
    assert code == 0


def test_real_reduce_small(tmp_path):
    code, doc = run(tmp_path, "real-reduce", "--n", "3", "--delta", "0.2", "--trials", "10",
                    "--R", "3", "--meta-trials", "2")
    assert doc is not None and "per_trial" in doc["body"]["checks"]


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    for cmd in cli.SUBCOMMANDS:
        assert cmd in out
