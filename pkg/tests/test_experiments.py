import csv
import json

import pytest

from karner import cli
from karner.experiments import HEADERS, ConfigError, ExperimentConfig, run

SMALL = {
    "finite-verify": ["--set", "n_seeds=4"],
    "krein-table": ["--set", "z_grid.step=10.0"],
    "floquet-verify": ["--set", "k_max=3", "--set", "n_max=12"],
    "bounds": ["--set", "ladder=[[2,8],[3,12]]"],
    "convergence": ["--set", "ladder=[[2,8],[4,16]]"],
}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_cli_writes_outputs(tmp_path, kind):
    status = cli.main([kind, "--out", str(tmp_path)] + SMALL[kind])
    rows = read_csv(tmp_path / f"{kind}.csv")
    assert rows and list(rows[0]) == HEADERS[kind]
    summary = json.loads((tmp_path / f"{kind}.summary.json").read_text())
    assert summary["n_rows"] == len(rows)
    assert summary["all_passed"] == (status == 0)
    assert status == (0 if all(r["passed"] == "true" for r in rows) else 1)


def test_krein_table_columns_consistent(tmp_path):
    assert cli.main(["krein-table", "--out", str(tmp_path)]) == 0
    for row in read_csv(tmp_path / "krein-table.csv"):
        tau = complex(float(row["tau_re"]), float(row["tau_im"]))
        green = complex(float(row["green00_re"]), float(row["green00_im"]))
        assert abs(tau - green) <= 1e-12


def test_complex_columns_round_trip(tmp_path):
    cli.main(["krein-table", "--out", str(tmp_path), "--set", "z_list=[[0.1, 0.30000000000000004]]"])
    row = read_csv(tmp_path / "krein-table.csv")[0]
    assert float(row["z_im"]) == 0.30000000000000004


def test_failing_rows_give_exit_one(tmp_path):
    status = cli.main(["finite-verify", "--out", str(tmp_path), "--set", "n_seeds=2", "--set", "tol=1e-30"])
    assert status == 1


@pytest.mark.parametrize("args", [
    ["--set", "nonsense=1"],
    ["--set", "tol=-1"],
    ["--set", "z_list=[[1.0, 0.0]]"],
    ["--set", "missing_equals"],
    ["--set", "workers=abc"],
])
def test_config_errors_exit_two(tmp_path, args):
    assert cli.main(["finite-verify", "--out", str(tmp_path)] + args) == 2


def test_config_file_and_dump(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 5, "params": {"n_seeds": 3, "hermitian": True}}))
    assert cli.main(["finite-verify", "--config", str(path), "--seed", "9", "--dump-config"]) == 0
    dumped = json.loads(capsys.readouterr().out)
    assert dumped["seed"] == 9
    assert dumped["params"]["n_seeds"] == 3 and dumped["params"]["hermitian"] is True

    path.write_text(json.dumps({"kind": "bounds"}))
    assert cli.main(["finite-verify", "--config", str(path)]) == 2


def test_config_hash_ignores_key_order():
    a = ExperimentConfig("bounds", {"z_list": [[0, 4]], "ladder": [[2, 8]], "drive": {"period": 1.0, "cos": [0.1]}})
    b = ExperimentConfig("bounds", {"drive": {"cos": [0.1], "period": 1.0}, "ladder": [[2, 8]], "z_list": [[0, 4]]})
    assert a.config_hash() == b.config_hash()
    b.seed = 1
    assert a.config_hash() != b.config_hash()


def test_workers_do_not_change_output():
    cfg = ExperimentConfig.default("finite-verify")
    cfg.set("n_seeds", 6)
    serial = run(cfg).csv_text()
    cfg.workers = 3
    assert run(cfg).csv_text() == serial


def test_unknown_kind():
    with pytest.raises(ConfigError):
        ExperimentConfig.default("nope")
