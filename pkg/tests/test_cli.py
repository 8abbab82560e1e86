import io
import json
import os
import subprocess
import sys

import pytest

from intrinsic_metrics import cli
from intrinsic_metrics.cli import ConfigError, emit, main, parse_config, parse_config_text

SMALL = ["--reps", "4", "--subspaces", "8", "--volume_samples", "200"]


def test_parse_config_populates_fields():
    cfg = parse_config("theorem1 --n 4 --j 2 --N 100,200 --reps 50 --seed 7".split())
    assert cfg.command == "theorem1"
    assert cfg.params["n"] == 4 and cfg.params["j"] == 2
    assert cfg.params["N"] == (100, 200) and cfg.params["reps"] == 50 and cfg.seed == 7
    assert cfg.format == "csv" and cfg.output_path is None


def test_missing_required_key_exits_2(capsys):
    assert main("theorem1 --j 2 --N 100,200,400".split()) == 2
    assert "--n" in capsys.readouterr().err


def test_flag_overrides_file():
    cfg = parse_config("theorem1 --reps 9".split(), file_text="n=3\nj=1\nN=50,100,200\nreps=30  # comment\n")
    assert cfg.params["reps"] == 9 and cfg.params["n"] == 3


def test_file_overrides_defaults():
    cfg = parse_config(["validate"], file_text="samples = 5000\n")
    assert cfg.params["samples"] == 5000 and cfg.params["seed"] == 0


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError) as err:
        parse_config_text("colour=blue")
    msg = str(err.value)
    assert "colour" in msg and "reps" in msg and "seed" in msg


def test_malformed_value_names_the_key(capsys):
    assert main("theorem1 --n 3 --j 1 --N 50,100,200 --reps many".split()) == 2
    assert "reps" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    "theorem1 --n 3 --j 4 --N 50,100,200",
    "theorem1 --n 3 --j 1 --N 2,100,200",
    "optimize --n 2 --j 2 --N 3,4",
    "constants --n 0",
    "appendixB --N 3 --beta -1",
    "validate --threads 0",
    "validate --seed -1",
    "bogus",
])
def test_invalid_configs_exit_2(argv):
    assert main(argv.split()) == 2


def test_short_grid_is_rejected_before_work():
    assert main("theorem1 --n 3 --j 1 --N 100,200".split()) == 2


def test_theorem1_csv_rows_match_grid():
    out = io.StringIO()
    cfg = parse_config("theorem1 --n 3 --j 1 --N 50,100,200".split() + SMALL)
    emit(cli._run(cfg), cfg, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "N,mean,stderr,bound,ratio"
    assert len(lines) == 1 + 3
    assert all("\r" not in line for line in lines)


def test_rate_adds_comparison_columns():
    out = io.StringIO()
    cfg = parse_config("rate --n 3 --j 1 --N 50,100,200".split() + SMALL)
    emit(cli._run(cfg), cfg, out)
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("N,mean,stderr,bound,ratio,") and len(lines) == 4


def test_json_is_single_document():
    out = io.StringIO()
    cfg = parse_config("theorem1 --n 3 --j 1 --N 50,100,200 --format json".split() + SMALL)
    emit(cli._run(cfg), cfg, out)
    doc = json.loads(out.getvalue())
    assert doc["spec"]["parameters"]["seed"] == 0
    assert len(doc["rows"]) == 3 and set(doc["rows"][0]) == {"N", "mean", "stderr", "bound", "ratio"}


def test_sidecar_rerun_is_byte_identical(tmp_path):
    first = tmp_path / "a.csv"
    assert main(f"theorem1 --n 3 --j 1 --N 50,100,200 --seed 11 --output {first}".split() + SMALL) == 0
    side = json.loads((tmp_path / "a.csv.json").read_text())["parameters"]
    assert side["seed"] == 11
    lines = [f"{k}={','.join(map(str, v)) if isinstance(v, list) else v}"
             for k, v in side.items() if v is not None and k != "output"]
    conf = tmp_path / "rerun.conf"
    conf.write_text("\n".join(lines) + "\n")
    second = tmp_path / "b.csv"
    assert main(["theorem1", "--config", str(conf), "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_unwritable_path_exits_3(tmp_path):
    target = tmp_path / "missing_dir" / "out.csv"
    assert main(f"appendixB --N 3,5 --output {target}".split()) == 3


def test_unreadable_config_exits_2(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.conf")]) == 2


def test_constants_and_line_hull_outputs():
    out = io.StringIO()
    cfg = parse_config("constants --n 3 --j 2".split())
    emit(cli._run(cfg), cfg, out)
    names = [line.split(",")[0] for line in out.getvalue().splitlines()[1:]]
    assert {"omega_n", "d", "A", "flag"} <= set(names)
    out = io.StringIO()
    cfg = parse_config("appendixB --N 1,3,10".split())
    emit(cli._run(cfg), cfg, out)
    rows = [line.split(",") for line in out.getvalue().splitlines()[1:]]
    assert [r[2] for r in rows] == ["0", "1", "1.636363636"]


def test_optimize_emits_vertices():
    out = io.StringIO()
    cfg = parse_config("optimize --n 2 --j 2 --N 5 --budget 20".split())
    table = cli._run(cfg)
    emit(table, cfg, out)
    assert len(out.getvalue().splitlines()) == 1 + 5
    assert table.meta["objective"] <= table.meta["start_objective"]


def test_bad_thread_env_is_a_config_error(monkeypatch):
    monkeypatch.setenv("INTRINSIC_METRICS_THREADS", "-2")
    assert main(["appendixB", "--N", "3"]) == 2
    monkeypatch.setenv("INTRINSIC_METRICS_THREADS", "2")
    assert main(["appendixB", "--N", "3", "--output", os.devnull]) == 0


def test_module_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "intrinsic_metrics", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "theorem1" in proc.stdout
