import json
import subprocess
import sys

import pytest

from dfrelay.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main, read_config
from dfrelay.codebook import read_codebook


def test_solve_from_gains_file(tmp_path, capsys):
    f = tmp_path / "g.json"
    f.write_text(json.dumps({"lam_sd": [1.0], "lam_sr": [0.5], "lam_rd": [2.0]}))
    # P_t = 3 on one subcarrier: 10*log10(3) dB
    import math
    assert main(["solve", "--gains", str(f), "--snr-db", str(10 * math.log10(3)), "--scheme", "selective"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["sum_rate"] == pytest.approx(1.0)
    assert out["pairing"] == [0]


def test_solve_from_seed_to_file(tmp_path):
    out = tmp_path / "a.json"
    assert main(["solve", "--n", "3", "--seed", "4", "--scheme", "individual", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["scheme"] == "individual" and doc["budget"]["source"] == pytest.approx(0.75 * doc["budget"]["total"])


def test_usage_errors(capsys, tmp_path):
    assert main(["solve", "--bogus"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    assert main(["solve", "--scheme", "fancy"]) == EXIT_USAGE
    assert main(["sweep", "--trials", "0"]) == EXIT_USAGE
    assert main(["train-codebook", "--n", "2"]) == EXIT_USAGE
    cfg = tmp_path / "c.cfg"
    cfg.write_text("unknown_key = 3\n")
    assert main(["sweep", "--config", str(cfg)]) == EXIT_USAGE
    assert main(["oracle-compare", "--n", "9"]) == EXIT_USAGE


def test_runtime_errors(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert main(["solve", "--gains", str(f)]) == EXIT_USAGE
    assert main(["solve", "--gains", str(tmp_path / "absent.json")]) == EXIT_RUNTIME
    assert main(["sweep", "--trials", "1", "--snr-db", "0", "--out", str(tmp_path / "no" / "x.csv")]) == EXIT_RUNTIME


def test_convergence_budget_exit_code(tmp_path):
    # this instance has a genuine relaxation gap, so only the raw subgradient test could certify it
    code = main(["solve", "--n", "2", "--seed", "0", "--scheme", "individual", "--max-iter", "1",
                 "--out", str(tmp_path / "s.json")])
    assert code == EXIT_RUNTIME
    assert json.loads((tmp_path / "s.json").read_text())["converged"] is False


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# comment\nkind = snr\nsnr-db = 0, 5   # inline comment\ntrials = 2\nscheme = selective\nn = 2\n")
    assert read_config(cfg)["snr_db"] == "0, 5"
    out = tmp_path / "o.csv"
    assert main(["sweep", "--config", str(cfg), "--trials", "3", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert "# trials = 3" in text and "# snr_db = 0.0,5.0" in text
    assert len([line for line in text.splitlines() if not line.startswith("#")]) == 3


def test_oracle_compare_report(capsys):
    assert main(["oracle-compare", "--n", "2", "--trials", "5", "--scheme", "enhanced"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["trials"] == 5 and rep["weak_duality_violations"] == 0


def test_train_codebook_writes_file(tmp_path, capsys):
    out = tmp_path / "cb.txt"
    assert main(["train-codebook", "--n", "2", "--bits", "1", "--training-size", "40", "--out", str(out)]) == EXIT_OK
    C = read_codebook(out)
    assert C.bits == 1 and C.n == 2 and C.train_meta["training_size"] == 40


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dfrelay", "solve", "--n", "2", "--seed", "0"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["pairing"]
