import json
import os

import numpy as np
import pytest

from vflinfer.cli import main
from vflinfer.models import load_model


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_synth_writes_csv(workdir, capsys):
    code = main(
        "synth --n 50 --d 4 --c 2 --mix-strength 0.3 --seed 7 --out ds.csv".split()
    )
    assert code == 0
    lines = (workdir / "ds.csv").read_text().strip().splitlines()
    assert lines[0] == "f0,f1,f2,f3,label"
    assert len(lines) == 51
    assert "50 rows" in capsys.readouterr().out


def test_train_saves_model(workdir):
    (workdir / "cfg.json").write_text(
        json.dumps(
            {
                "dataset": {"kind": "synth", "n": 120, "d": 5, "c": 3},
                "model": {"kind": "tree", "max_depth": 3},
                "seed": 1,
            }
        )
    )
    assert main("train --config cfg.json --out model.json".split()) == 0
    model = load_model(workdir / "model.json")
    assert model.num_classes == 3


def test_attack_bound_report_pipeline(workdir, capsys):
    (workdir / "exp.json").write_text(
        json.dumps(
            {
                "dataset": {"kind": "synth", "n": 300, "d": 8, "c": 4, "mix_strength": 0.4},
                "model": {"kind": "logreg", "epochs": 25, "lr": 0.5},
                "attack": {"kind": "esa"},
                "target_fracs": [0.25, 0.5],
                "trials": 2,
                "seed": 3,
            }
        )
    )
    assert main("attack --config exp.json --out report.jsonl --format jsonl".split()) == 0
    report_lines = (workdir / "report.jsonl").read_text().strip().splitlines()
    assert len(report_lines) == 2 * 2 * 3  # fracs x trials x (esa + 2 baselines)
    first = json.loads(report_lines[0])
    assert "runtime_ms" not in first  # excluded so reruns are byte-identical

    assert main("report --report report.jsonl --out agg.csv --figures figs".split()) == 0
    agg = (workdir / "agg.csv").read_text().strip().splitlines()
    assert agg[0].startswith("dataset,model,attack,defense,d_target_frac")
    pngs = sorted(os.listdir(workdir / "figs"))
    assert pngs and all(name.endswith(".png") for name in pngs)

    # bound on a dataset produced by synth
    assert main("synth --n 80 --d 3 --c 2 --seed 0 --out tiny.csv".split()) == 0
    assert main("bound --csv tiny.csv".split()) == 0
    assert "mse_upper_bound=" in capsys.readouterr().out


def test_seed_override_changes_report(workdir):
    (workdir / "exp.json").write_text(
        json.dumps(
            {
                "dataset": {"kind": "synth", "n": 200, "d": 6, "c": 3},
                "model": {"kind": "logreg", "epochs": 10},
                "attack": {"kind": "esa"},
                "target_fracs": [0.3],
                "trials": 1,
                "seed": 3,
            }
        )
    )
    main("attack --config exp.json --out a.jsonl".split())
    main("attack --config exp.json --seed 99 --out b.jsonl".split())
    assert (workdir / "a.jsonl").read_bytes() != (workdir / "b.jsonl").read_bytes()


def test_validation_failures_exit_one(workdir, capsys):
    (workdir / "bad.json").write_text(json.dumps({"dataset": {"kind": "nope"}}))
    assert main("attack --config bad.json --out r.jsonl".split()) == 1
    assert "error:" in capsys.readouterr().err

    (workdir / "ragged.csv").write_text("a,label\n1,0\n1\n")
    assert main("bound --csv ragged.csv".split()) == 1


def test_missing_file_is_runtime_error(workdir):
    assert main("report --report missing.jsonl --out agg.csv".split()) == 2


def test_usage_error_exits_one(workdir, capsys):
    with pytest.raises(SystemExit) as err:
        main(["attack"])  # --config and --out are required
    assert err.value.code == 1
