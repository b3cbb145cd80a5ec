"""PAPR against pruning fraction for QPSK and 16-QAM.

Writes one CSV per modulation next to --out-dir and prints the reduction
relative to the unpruned run on the same inputs.
"""
import argparse
from pathlib import Path

from trellis_prune.cli import main as cli_main, read_table

ETAS = "0,0.005,0.01,0.05,0.1,0.3,0.5"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--n-symbols", default="1000000")
    ap.add_argument("--alpha", default="0.22,0.35,0.5")
    ap.add_argument("--D", default="3")
    ap.add_argument("--seed", default="1")
    args = ap.parse_args()

    out = Path(args.out_dir)
    for modulation in ("QPSK", "QAM16"):
        path = out / f"papr_{modulation.lower()}.csv"
        code = cli_main(["papr", "--modulation", modulation, "--alpha", args.alpha, "--D", args.D,
                         "--eta", ETAS, "--n-symbols", args.n_symbols, "--seed", args.seed,
                         "-o", str(path)])
        if code:
            raise SystemExit(code)
        rows = read_table(path)
        base = {(r["alpha"], r["seed"]): float(r["papr_max_db"]) for r in rows if float(r["eta"]) == 0}
        for r in rows:
            ref = base[r["alpha"], r["seed"]]
            lin = 1 - 10 ** ((float(r["papr_max_db"]) - ref) / 10)
            print(f"{modulation:5s} alpha={r['alpha']:5s} eta={float(r['eta']):6.3f} "
                  f"papr_max={float(r['papr_max_db']):6.3f} dB  reduction={100 * lin:5.1f}%")


if __name__ == "__main__":
    main()
