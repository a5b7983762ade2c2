import json
import math

import numpy as np
import pytest

from spiral_erw import cli


def run_cli(args):
    return cli.main(args)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].startswith("# seed=")
    return lines[2], lines[3:]


def test_regime_subcommand_critical(capsys):
    code = run_cli(
        ["regime", "--set", 'law={"type":"constant","theta":%r}' % (math.pi / 3)]
    )
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["regime"] == "critical"
    assert out["sigma_squared"] is None


def test_regime_rejects_degenerate(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"law": {"type": "discrete", "atoms": [[0.0, 0.5], [math.pi, 0.5]]}}
    )
    assert run_cli(["regime", "--config", cfg]) == 2


def test_unreadable_config_is_exit_2(tmp_path):
    assert run_cli(["regime", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["regime", "--config", str(bad)]) == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_simulate_writes_complex_paths(tmp_path, capsys):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}, "n": 20, "paths": 3, "seed": 9})
    assert run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    header, rows = read_rows(tmp_path / "o" / "paths.csv")
    assert header == "path_id,n,re,im"
    assert len(rows) == 60
    assert rows[0] == "0,1,1,0"


def test_simulate_lattice_paths(tmp_path):
    cfg = write_config(
        tmp_path,
        {"law": {"type": "lattice", "p": 0.4, "q": 0.3, "r": 0.2, "s": 0.1}, "n": 16, "paths": 2},
    )
    assert run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    header, rows = read_rows(tmp_path / "o" / "paths.csv")
    assert header == "path_id,n,x,y"
    assert rows[0] == "0,1,1,0"


def test_simulate_outputs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}, "n": 50, "paths": 2, "seed": 3})
    for d in ("a", "b"):
        assert run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "paths.csv").read_bytes() == (tmp_path / "b" / "paths.csv").read_bytes()


def test_oracle_table(tmp_path):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}, "n": 8})
    assert run_cli(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    header, rows = read_rows(tmp_path / "o" / "moments.csv")
    assert header == "n,re_a,im_a,u,re_q,im_q,v"
    assert len(rows) == 8
    first = rows[0].split(",")
    assert first[0] == "1" and float(first[3]) == 1.0


def test_branching_jsonl(tmp_path):
    cfg = write_config(
        tmp_path,
        {"law": {"type": "constant", "theta": math.pi / 4}, "n": 1024, "paths": 3, "seed": 4},
    )
    assert run_cli(["branching", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "runs.jsonl").read_text().splitlines()
    meta = json.loads(lines[0])
    assert "config_sha256" in meta and meta["seed"] == 4
    assert len(lines) == 4
    record = json.loads(lines[1])
    assert set(record) == {"n", "tau_n", "z1_re", "z1_im", "w_re", "w_im", "e"}
    assert record["e"] > 0


def test_branching_jsonl_no_limits_outside_superdiffusive(tmp_path):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}, "n": 64, "paths": 1, "seed": 4})
    assert run_cli(["branching", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    record = json.loads((tmp_path / "o" / "runs.jsonl").read_text().splitlines()[1])
    assert record["w_re"] is None and record["e"] is None


def test_figure_writes_three_reference_paths(tmp_path):
    assert run_cli(["figure", "--out", str(tmp_path / "o"), "--seed", "1"]) == 0
    names = sorted(p.name for p in (tmp_path / "o").glob("*.csv"))
    assert names == ["figure_a.csv", "figure_b.csv", "figure_c.csv"]
    header, rows = read_rows(tmp_path / "o" / "figure_b.csv")
    assert header == "n,re,im"
    assert len(rows) == 1000


def test_verify_pass_and_exit_codes(tmp_path):
    cfg = write_config(
        tmp_path, {"law": {"type": "uniform"}, "n": 512, "paths": 2000, "seed": 42}
    )
    assert run_cli(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["passed"] is True
    assert report["regime"] == "diffusive"
    assert {c["criterion"] for c in report["criteria"]} >= {"var_re", "var_im"}
    csv_lines = (tmp_path / "o" / "report.csv").read_text().splitlines()
    assert csv_lines[2] == "criterion,target,estimate,stderr,tolerance,passed"


def test_verify_degenerate_law_is_config_error(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "law": {"type": "discrete", "atoms": [[0.0, 0.5], [math.pi, 0.5]]},
            "n": 64,
            "paths": 1000,
        },
    )
    assert run_cli(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_env_seed_overrides_everything(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}, "n": 10, "paths": 1, "seed": 1})
    monkeypatch.setenv("SPIRAL_ERW_SEED", "99")
    assert run_cli(["simulate", "--config", cfg, "--seed", "5", "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "paths.csv").read_text().splitlines()
    assert lines[1] == "# seed=99"


def test_set_overrides_win_over_file(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"law": {"type": "constant", "theta": math.pi / 3}, "n": 10, "paths": 1}
    )
    code = run_cli(["regime", "--config", cfg, "--set", "law.theta=0.2"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["regime"] == "superdiffusive"


def test_bad_set_syntax_is_config_error(tmp_path):
    cfg = write_config(tmp_path, {"law": {"type": "uniform"}})
    assert run_cli(["regime", "--config", cfg, "--set", "lawtheta"]) == 2
