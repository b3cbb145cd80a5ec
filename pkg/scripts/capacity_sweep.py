"""Capacity and retention ratio of pruned QPSK over an Es/N0 grid.

Runs the full (windowed backward) estimator and the forward-only bound,
plus the noiseless limit, then joins PAPR and capacity into a
pruning / PAPR / retention table.
"""
import argparse
from pathlib import Path

from trellis_prune.cli import main as cli_main, read_table

ETAS = "0,0.01,0.05,0.1,0.3"


def run(*argv):
    code = cli_main(list(argv))
    if code:
        raise SystemExit(code)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--n-symbols", default="100000")
    ap.add_argument("--grid", default="0,2,4,6,8,10,12,15,20")
    ap.add_argument("--D", default="3")
    ap.add_argument("--seed", default="1")
    args = ap.parse_args()

    out = Path(args.out_dir)
    common = ["--modulation", "QPSK", "--D", args.D, "--eta", ETAS, "--seed", args.seed]
    run("capacity", *common, "--method", "full", "--es-n0-db", args.grid,
        "--n-symbols", args.n_symbols, "-o", str(out / "capacity_full.csv"))
    run("capacity", *common, "--method", "lower", "--es-n0-db", args.grid,
        "--n-symbols", args.n_symbols, "-o", str(out / "capacity_lower.csv"))
    run("capacity", *common, "--method", "high-snr", "-o", str(out / "capacity_limit.csv"))
    run("papr", *common, "--n-symbols", "1000000", "-o", str(out / "papr_qpsk_sweep.csv"))
    run("report", "--papr-csv", str(out / "papr_qpsk_sweep.csv"),
        "--capacity-csv", str(out / "capacity_full.csv"), "-o", str(out / "report.csv"))

    for r in read_table(out / "capacity_limit.csv"):
        print(f"eta={float(r['eta']):5.2f}  noiseless limit {float(r['bits']):.4f} bits")
    for r in read_table(out / "report.csv"):
        print(f"eta={float(r['eta']):5.2f}  papr {float(r['papr_db']):.3f} dB  rho {float(r['rho']):.4f}")


if __name__ == "__main__":
    main()
