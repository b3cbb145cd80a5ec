import subprocess
import sys

import numpy as np
import pytest

from trellis_prune import cli
from trellis_prune.cli import ExperimentConfig, main, read_table

SMALL = ["--D", "2", "--osf", "8"]

# frozen column rows, one per emitted table
GOLDEN = {
    "taps": "n,t,h",
    "trajectory": "sample,t,re,im,mag",
    "papr": "modulation,alpha,D,osf,eta,n_symbols,seed,es,papr_max_db,papr_ccdf_db",
    "prune-stats": "bin_lo,bin_hi,count_peak2,count_min2",
    "survivors": "survivors,count",
    "capacity": "modulation,alpha,D,osf,eta,method,es_n0_db,n_symbols,bits,std_err",
    "report": "eta,papr_db,rho",
}


def run(tmp_path, name, *args):
    out = tmp_path / f"{name}.csv"
    code = main([name, *args, "-o", str(out)])
    return code, out


def column_row(path):
    return next(ln for ln in path.read_text().splitlines() if not ln.startswith("#"))


def test_taps_schema_and_values(tmp_path):
    code, out = run(tmp_path, "taps", *SMALL, "--alpha", "0.35")
    assert code == 0
    assert column_row(out) == GOLDEN["taps"]
    rows = read_table(out)
    assert len(rows) == 2 * 2 * 8 + 1
    h = np.array([float(r["h"]) for r in rows])
    assert np.sum(h**2) == pytest.approx(1.0, abs=1e-9)


def test_header_embeds_config_and_seed(tmp_path):
    code, out = run(tmp_path, "papr", *SMALL, "--n-symbols", "2000", "--seed", "7")
    assert code == 0
    comments = [ln[2:] for ln in out.read_text().splitlines() if ln.startswith("#")]
    parsed = ExperimentConfig.from_text("\n".join(comments[1:]))
    assert parsed.seeds == [7] and parsed.D == 2 and parsed.n_symbols == 2000


def test_papr_rows_per_alpha_and_seed(tmp_path):
    code, out = run(tmp_path, "papr", *SMALL, "--modulation", "QAM16",
                    "--eta", "0,0.005,0.01,0.05,0.10", "--n-symbols", "5000")
    assert code == 0
    assert column_row(out) == GOLDEN["papr"]
    rows = read_table(out)
    assert len(rows) == 5
    assert [float(r["eta"]) for r in rows] == [0, 0.005, 0.01, 0.05, 0.10]
    assert all(r["modulation"] == "QAM16" for r in rows)

    code, out = run(tmp_path, "papr", *SMALL, "--alpha", "0.22,0.5", "--seed", "1,2",
                    "--eta", "0,0.1", "--n-symbols", "2000")
    assert code == 0
    assert len(read_table(out)) == 2 * 2 * 2


def test_trajectory_pruned_peak_is_smaller(tmp_path):
    common = ["--D", "3", "--osf", "16", "--n-symbols", "20000", "--seed", "3"]
    c0, plain = run(tmp_path, "trajectory", *common)
    code = main(["trajectory", *common, "--eta", "0.3", "-o", str(tmp_path / "pruned.csv")])
    assert c0 == 0 and code == 0
    assert column_row(plain) == GOLDEN["trajectory"]
    mag0 = max(float(r["mag"]) for r in read_table(plain))
    mag1 = max(float(r["mag"]) for r in read_table(tmp_path / "pruned.csv"))
    assert mag1 < mag0


def test_prune_stats_writes_both_tables(tmp_path):
    code, out = run(tmp_path, "prune-stats", *SMALL, "--eta", "0.1", "--bins", "20")
    assert code == 0
    assert column_row(out) == GOLDEN["prune-stats"]
    hist = read_table(out)
    assert len(hist) == 20
    assert sum(int(r["count_peak2"]) for r in hist) == 4**4
    surv_path = tmp_path / "prune-stats_survivors.csv"
    assert column_row(surv_path) == GOLDEN["survivors"]
    surv = read_table(surv_path)
    assert sum(int(r["count"]) for r in surv) == 4**3
    pruned = sum((4 - int(r["survivors"])) * int(r["count"]) for r in surv)
    assert pruned == int(0.1 * 256)
    assert "# achieved_eta = 0.09765625" in surv_path.read_text()


def test_capacity_methods(tmp_path):
    code, out = run(tmp_path, "capacity", *SMALL, "--eta", "0,0.1", "--es-n0-db", "0,10",
                    "--n-symbols", "2000")
    assert code == 0
    assert column_row(out) == GOLDEN["capacity"]
    rows = read_table(out)
    assert len(rows) == 4 and {r["method"] for r in rows} == {"ForwardLowerBound"}

    code, out = run(tmp_path, "capacity", *SMALL, "--method", "high-snr", "--eta", "0,0.1")
    assert code == 0
    rows = read_table(out)
    assert float(rows[0]["bits"]) == 2.0 and float(rows[1]["bits"]) < 2.0

    code, out = run(tmp_path, "capacity", *SMALL, "--method", "full", "--window", "8",
                    "--es-n0-db", "5", "--n-symbols", "2000")
    assert code == 0
    assert read_table(out)[0]["method"] == "Full"


def test_report_joins_tables(tmp_path):
    _, papr = run(tmp_path, "papr", *SMALL, "--eta", "0,0.1", "--n-symbols", "3000")
    _, cap = run(tmp_path, "capacity", *SMALL, "--eta", "0,0.1", "--es-n0-db", "4,12",
                 "--n-symbols", "3000")
    code, out = run(tmp_path, "report", "--papr-csv", str(papr), "--capacity-csv", str(cap))
    assert code == 0
    assert column_row(out) == GOLDEN["report"]
    rows = read_table(out)
    assert [float(r["eta"]) for r in rows] == [0.0, 0.1]
    assert float(rows[0]["rho"]) == 1.0
    bits = {(float(r["eta"]), float(r["es_n0_db"])): float(r["bits"]) for r in read_table(cap)}
    assert float(rows[1]["rho"]) == pytest.approx(bits[0.1, 12.0] / bits[0.0, 12.0], rel=1e-9)
    papr_rows = read_table(papr)
    assert float(rows[1]["papr_db"]) == pytest.approx(float(papr_rows[1]["papr_max_db"]))


@pytest.mark.parametrize("name,args", [
    ("papr", ["--eta", "0,0.05", "--n-symbols", "3000", "--seed", "4"]),
    ("capacity", ["--eta", "0.05", "--es-n0-db", "3", "--n-symbols", "2000"]),
    ("prune-stats", ["--eta", "0.05"]),
])
def test_byte_identical_reruns(tmp_path, name, args):
    out = tmp_path / "out.csv"
    assert main([name, *SMALL, *args, "-o", str(out)]) == 0
    first = out.read_bytes()
    out.unlink()
    assert main([name, *SMALL, *args, "-o", str(out)]) == 0
    assert out.read_bytes() == first


def test_parallel_sweep_matches_serial(tmp_path, monkeypatch):
    args = ["papr", *SMALL, "--alpha", "0.22,0.5", "--eta", "0,0.1", "--n-symbols", "2000"]
    out = tmp_path / "out.csv"
    assert main([*args, "-o", str(out)]) == 0
    serial = out.read_bytes()
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    assert main([*args, "-o", str(out)]) == 0
    assert out.read_bytes() == serial


def test_unknown_subcommand_prints_usage():
    res = subprocess.run([sys.executable, "-m", "trellis_prune", "bogus"],
                         capture_output=True, text=True)
    assert res.returncode != 0
    assert "usage" in res.stderr


@pytest.mark.parametrize("args,field", [
    (["--alpha", "1.5"], "alpha"),
    (["--osf", "1"], "osf"),
    (["--modulation", "PSK8"], "modulation"),
    (["--method", "exact"], "method"),
    (["--D", "two"], "D"),
    (["--split", "2"], "split"),
])
def test_invalid_config_names_field(tmp_path, capsys, args, field):
    code, _ = run(tmp_path, "papr", *args)
    assert code == 2
    assert f"'{field}'" in capsys.readouterr().err


def test_infeasible_eta_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "prune-stats", *SMALL, "--eta", "0.9")
    assert code == 3
    assert "at most 192" in capsys.readouterr().err
    code, _ = run(tmp_path, "prune-stats", *SMALL, "--eta", "1")
    assert code == 3


def test_config_file_with_flag_override(tmp_path):
    cfg = ExperimentConfig(modulation="QAM16", alpha=[0.22, 0.5], D=2, osf=8, eta=[0.0, 0.05],
                           es_n0_db=[-1.5, 3.0], n_symbols=3000, seeds=[1, 5], method="full",
                           report_es_n0_db=3.0)
    path = tmp_path / "exp.cfg"
    path.write_text(cfg.to_text())
    assert ExperimentConfig.from_text(path.read_text()) == cfg
    code, out = run(tmp_path, "taps", "--config", str(path), "--alpha", "0.35")
    assert code == 0
    assert "# alpha = 0.35" in out.read_text()
    assert "# modulation = QAM16" in out.read_text()


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError, match="bogus"):
        ExperimentConfig.from_text("bogus = 1\n")
