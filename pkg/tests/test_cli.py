import json

from mdpreg import build_two_goals, save_mdp_spec
from mdpreg.cli import main
from mdpreg.properties import CheckResult


def test_preset_list_prints_names(capsys):
    assert main(["preset", "--list"]) == 0
    out = capsys.readouterr().out
    assert "cliff-random" in out and "grid-start-limited" in out


def test_unknown_preset_fails(capsys):
    assert main(["preset", "no-such-thing"]) == 2
    assert "unknown preset" in capsys.readouterr().err


def test_preset_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main(["preset", "twogoals-random", "--replications", "2",
                 "--seed", "5", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("method,strength,")
    assert "mean_loss" in capsys.readouterr().out


def test_run_from_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps({
        "mdp": "grid",
        "methods": ["eps_greedy"],
        "eps_grid": [0.0, 0.5],
        "collection": {"n_trajectories": 3, "trajectory_length": 5},
        "replications": 2,
        "master_seed": 3,
        "out": str(tmp_path / "res.csv"),
    }))
    assert main(["run", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "res.csv").exists()


def test_run_accepts_preset_flag(tmp_path):
    out = tmp_path / "p.csv"
    code = main(["run", "--preset", "grid-random", "--replications", "2",
                 "--out", str(out)])
    assert code == 0 and out.exists()


def test_run_surfaces_config_problems(tmp_path, capsys):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text('{"mdp": "grid", "collection": {"n_trajectories": 3,'
                        ' "trajectory_length": 5}, "bogus": 1}')
    assert main(["run", "--config", str(cfg_path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_mdp_validate_accepts_good_spec(tmp_path, capsys):
    path = tmp_path / "tg.json"
    save_mdp_spec(build_two_goals(), path)
    assert main(["mdp", "validate", str(path)]) == 0
    assert "OK: two_goals" in capsys.readouterr().out


def test_mdp_validate_rejects_bad_spec(tmp_path, capsys):
    path = tmp_path / "tg.json"
    save_mdp_spec(build_two_goals(), path)
    doc = json.loads(path.read_text())
    doc["gamma"] = 1.5
    path.write_text(json.dumps(doc))
    assert main(["mdp", "validate", str(path)]) == 2
    assert "gamma" in capsys.readouterr().err


def test_mdp_validate_missing_file(tmp_path, capsys):
    assert main(["mdp", "validate", str(tmp_path / "nope.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_check_verb_reports_and_sets_exit_code(monkeypatch, capsys):
    fake = [CheckResult("alpha", True, "fine", 0.1),
            CheckResult("beta", False, "broken", 0.2)]
    monkeypatch.setattr("mdpreg.cli.run_acceptance", lambda **kw: fake)
    assert main(["check", "--quick"]) == 1
    out = capsys.readouterr().out
    assert "[PASS] alpha" in out and "[FAIL] beta" in out

    monkeypatch.setattr("mdpreg.cli.run_acceptance", lambda **kw: fake[:1])
    assert main(["check"]) == 0
