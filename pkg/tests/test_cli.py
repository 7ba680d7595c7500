import json

import pytest

from bargmann_lab import cli, fock


def write_config(path, **fields):
    base = {"symbol": {"family": "ball_indicator", "R": 1.0, "n": 1, "d": 2}, "D_ladder": [3, 5], "order": 16,
            "radii": [0.0, 1.0, 2.0], "schur_radii": [1.0, 2.0], "suite": "quick", "seed": 7}
    base.update(fields)
    path.write_text(json.dumps(base))
    return str(path)


@pytest.mark.parametrize("command", ["assemble", "profile", "certify", "verify"])
def test_commands_are_reproducible(tmp_path, command):
    cfg = write_config(tmp_path / "c.json")
    assert cli.main([command, "--config", cfg, "--out", str(tmp_path / "a" / "run")]) == 0
    assert cli.main([command, "--config", cfg, "--out", str(tmp_path / "b" / "run"), "--threads", "3"]) == 0
    a_files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert a_files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in a_files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_assemble_outputs(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    cli.main(["assemble", "--config", cfg, "--out", str(tmp_path / "op")])
    assert (tmp_path / "op_D3.top.json").exists() and (tmp_path / "op_D5.top.csv").exists()
    manifest = json.loads((tmp_path / "op.json").read_text())
    assert [e["D"] for e in manifest["operators"]] == [3, 5]


def test_profile_singular_table(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    cli.main(["profile", "--config", cfg, "--out", str(tmp_path / "p")])
    rows = (tmp_path / "p_singular.csv").read_text().splitlines()
    assert rows[0] == "D,d,k,sigma" and len(rows) == 1 + 8 + 12


def test_seed_override_changes_random_direction(tmp_path):
    cfg = write_config(tmp_path / "c.json", symbol={"family": "gaussian_radial", "t": 0.5, "n": 1, "d": 1})
    cli.main(["profile", "--config", cfg, "--out", str(tmp_path / "s1")])
    cli.main(["profile", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "8"])
    d1 = json.loads((tmp_path / "s1.json").read_text())["directions"]
    d2 = json.loads((tmp_path / "s2.json").read_text())["directions"]
    assert d1[:3] == d2[:3] and d1[3] != d2[3]


def test_config_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["verify", "--config", str(bad)]) == 1
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json")]) == 1
    assert cli.main(["verify", "--config", write_config(tmp_path / "k.json", colour="red")]) == 1
    assert cli.main(["profile", "--config", write_config(tmp_path / "l.json", radii=[1.0, 0.5])]) == 1
    assert cli.main(["verify", "--config", write_config(tmp_path / "s.json", seed=-3)]) == 1


def test_budget_error_exits_one(tmp_path, monkeypatch):
    monkeypatch.setenv("BARGMANN_POINT_BUDGET", "10")
    assert cli.main(["assemble", "--config", write_config(tmp_path / "c.json"), "--out", str(tmp_path / "x")]) == 1


def test_numerical_failure_exits_two(tmp_path):
    cfg = write_config(tmp_path / "c.json", symbol={"family": "gaussian_radial", "t": -0.99, "n": 1, "d": 1},
                       radii=[0.0, 50.0])
    assert cli.main(["profile", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_verification_failure_exits_three(tmp_path, monkeypatch):
    true_kernel = fock.kernel_eval
    monkeypatch.setattr(fock, "kernel_eval", lambda z, w: true_kernel(z, w) ** 2)
    cfg = write_config(tmp_path / "c.json", symbol={"family": "constant", "n": 1, "d": 1})
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")]) == 3
    report = json.loads((tmp_path / "v.json").read_text())
    assert report["passed"] is False


def test_example_command(tmp_path):
    cfg = write_config(tmp_path / "c.json", example="taebaek", d_ladder=[1, 2], D_ladder=[4, 8], radii=[0.0, 4.0])
    assert cli.main(["example", "--config", cfg, "--out", str(tmp_path / "e")]) == 0
    report = json.loads((tmp_path / "e.json").read_text())
    assert report["verdicts"]["compactness"] == "compact-consistent"
    assert (tmp_path / "e_d2_necessary_random.csv").exists()
