from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import GOLDEN
from rzcod.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_VERIFY, load_config, main, validate_config, ConfigError
from rzcod.construction import build_h
from rzcod.formats import design_from_text, load_design, signed_from_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_h3_matches_golden(capsys):
    code, out, _ = run(capsys, "generate", "--a", "3")
    assert code == EXIT_OK
    assert design_from_text(out) == design_from_text((GOLDEN / "h3.txt").read_text())


def test_generate_json(capsys):
    code, out, _ = run(capsys, "generate", "--a", "2", "--family", "g", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["format"] == "rzcod-design"


@pytest.mark.parametrize("argv", [["generate", "--a", "0"], ["generate", "--a", "17"], ["generate"],
                                  ["verify"], ["bogus"], ["generate", "--a", "3", "--route", "nope"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_export_round_trip_and_verify(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RZCOD_OUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "export", "--a", "4")
    path = tmp_path / "h_a4_premultiply.txt"
    assert code == EXIT_OK and out.strip() == str(path)
    assert load_design(path.read_text()) == build_h(4)
    code, out, _ = run(capsys, "verify", "--input", str(path))
    assert code == EXIT_OK
    assert out.count("PASS") == 4
    code, _, _ = run(capsys, "export", "--input", str(path), "--format", "json")
    assert code == EXIT_OK and load_design((tmp_path / "h_a4_premultiply.json").read_text()) == build_h(4)


def test_export_signed_objects(tmp_path, capsys):
    for obj in ("q", "perm", "hadamard"):
        out = tmp_path / f"{obj}.txt"
        assert run(capsys, "export", "--a", "3", "--object", obj, "--out", str(out))[0] == EXIT_OK
        assert signed_from_text(out.read_text()).n == 8
    assert run(capsys, "export", "--a", "3", "--object", "q", "--format", "json")[0] == EXIT_USAGE


def test_corrupted_file_fails_orthogonality(tmp_path, capsys):
    text = (GOLDEN / "h3.txt").read_text().splitlines()
    text[1] = text[1].replace(" x1 ", "-x1 ", 1)
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(text) + "\n")
    code, out, _ = run(capsys, "verify", "--input", str(path))
    assert code == EXIT_VERIFY
    line = next(l for l in out.splitlines() if "orthogonality" in l)
    assert line.startswith("FAIL") and "Gram cell (0, " in line


def test_printed_h5_fails_verification(capsys):
    code, out, _ = run(capsys, "verify", "--input", str(GOLDEN / "h5.txt"))
    assert code == EXIT_VERIFY and out.startswith("FAIL  orthogonality")


def test_parse_error_exit(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("# scod n=2 k=2 scale_num=0\nx1 -x2*\nx2 q1\n")
    code, _, err = run(capsys, "verify", "--input", str(path))
    assert code == EXIT_PARSE and "(1, 1)" in err


def test_verify_all_routes(capsys):
    code, out, _ = run(capsys, "verify", "--a", "5", "--route", "all")
    assert code == EXIT_OK and "FAIL" not in out and out.count("PASS") == 7


def test_verify_g_family(capsys):
    code, out, _ = run(capsys, "verify", "--a", "4", "--family", "g")
    assert code == EXIT_OK and "N-set" in out


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--a", "4", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["metrics"][0]["zero_fraction"] == "3/8"
    code, out, _ = run(capsys, "analyze", "--input", str(GOLDEN / "yuen8.txt"), "--constellation-size", "16")
    assert code == EXIT_OK and "quarter-phase" in out


def test_tables_self_check(capsys):
    code, out, err = run(capsys, "tables", "--self-check")
    assert code == EXIT_OK and "Table III" in out and "self-check" in err
    code, out, _ = run(capsys, "tables", "--format", "json")
    assert len(json.loads(out)["table_i"]) == 7


def _config(tmp_path, **over):
    cfg = {"name": "tiny", "constellation": "QPSK", "power_mode": "average", "snr_db": [0, 4],
           "trials_per_point": 400, "target_errors": 50, "batch_size": 200, "rng_seed": 3,
           "designs": [{"family": "g", "a": 2}, {"family": "h", "a": 2}], "check": {"kind": "overlap"}}
    cfg.update(over)
    for k in [k for k, v in cfg.items() if v is None]:
        del cfg[k]
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_writes_records(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RZCOD_OUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "simulate", "--config", str(_config(tmp_path)), "--workers", "2")
    assert code == EXIT_OK and "PASS" in out
    recs = [json.loads(l) for l in (tmp_path / "tiny.jsonl").read_text().splitlines()]
    assert len(recs) == 4 and {r["design_id"] for r in recs} == {"g2", "h2"}
    again = tmp_path / "again.jsonl"
    run(capsys, "simulate", "--config", str(_config(tmp_path)), "--out", str(again))
    assert again.read_text() == (tmp_path / "tiny.jsonl").read_text()


def test_simulate_config_errors(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--config", str(_config(tmp_path, constellation=None)))
    assert code == EXIT_CONFIG and "constellation" in err
    code, _, err = run(capsys, "simulate", "--config", str(_config(tmp_path, snr_db=[4, 0], power_mode="max")))
    assert code == EXIT_CONFIG and "snr_db" in err and "power_mode" in err
    assert run(capsys, "simulate", "--config", "no_such_config")[0] == EXIT_CONFIG
    bad = tmp_path / "broken.json"
    bad.write_text("{")
    assert run(capsys, "simulate", "--config", str(bad))[0] == EXIT_CONFIG


@pytest.mark.parametrize("name", ["fig1_desk", "peak_a3", "peak_a5"])
def test_bundled_configs_validate(name):
    cfg = load_config(name)
    assert cfg["name"] == name
    with pytest.raises(ConfigError):
        validate_config({**cfg, "extra": 1})


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rzcod", "generate", "--a", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and "x1" in res.stdout
