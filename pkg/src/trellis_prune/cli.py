"""Command-line driver: deterministic sweeps that write CSV tables.

Configuration comes from an optional ``key = value`` file; command-line
flags override file values. Every CSV starts with ``#`` comment lines
holding the full configuration.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import (estimate_capacity_full, estimate_lower_bound, high_snr_limit)
from .errors import ConfigurationError, InfeasibleError, NumericError, ResourceError
from .pruning import select_prune_set
from .simulate import encode, measure_papr, random_inputs, symbol_energy
from .trellis import build_trellis, compute_edge_metrics
from .waveform import build_constellation, build_pulse

log = logging.getLogger("trellis_prune")

SUBCOMMANDS = ("taps", "trajectory", "papr", "prune-stats", "capacity", "report")
METHODS = {"lower": "ForwardLowerBound", "full": "Full", "high-snr": "HighSnrLimit"}
WORKERS_ENV = "TRELLIS_PRUNE_WORKERS"

TAPS_COLUMNS = ["n", "t", "h"]
TRAJECTORY_COLUMNS = ["sample", "t", "re", "im", "mag"]
PAPR_COLUMNS = ["modulation", "alpha", "D", "osf", "eta", "n_symbols", "seed", "es",
                "papr_max_db", "papr_ccdf_db"]
METRIC_HIST_COLUMNS = ["bin_lo", "bin_hi", "count_peak2", "count_min2"]
SURVIVOR_COLUMNS = ["survivors", "count"]
CAPACITY_COLUMNS = ["modulation", "alpha", "D", "osf", "eta", "method", "es_n0_db",
                    "n_symbols", "bits", "std_err"]
REPORT_COLUMNS = ["eta", "papr_db", "rho"]


@dataclass
class ExperimentConfig:
    modulation: str = "QPSK"
    alpha: list[float] = field(default_factory=lambda: [0.35])
    D: int = 3
    osf: int = 16
    eta: list[float] = field(default_factory=lambda: [0.0])
    split: float = 0.5
    es_n0_db: list[float] = field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
    n_symbols: int = 1_000_000
    seeds: list[int] = field(default_factory=lambda: [0])
    method: str = "lower"
    window: int = 32
    bins: int = 50
    output: str = "-"
    papr_csv: str = ""
    capacity_csv: str = ""
    report_es_n0_db: float | None = None

    def validate(self) -> "ExperimentConfig":
        def bad(name, why):
            raise ConfigurationError(f"invalid config field '{name}': {why}")

        try:
            build_constellation(self.modulation)
        except ConfigurationError:
            bad("modulation", f"{self.modulation!r} is not QPSK or QAM16")
        if not self.alpha or any(not 0.0 <= a <= 1.0 for a in self.alpha):
            bad("alpha", "values must lie in [0, 1]")
        if self.D < 1:
            bad("D", "must be a positive integer")
        if self.osf < 2:
            bad("osf", "must be an integer >= 2")
        if not self.eta or any(not 0.0 <= e <= 1.0 for e in self.eta):
            bad("eta", "values must lie in [0, 1]")
        if not 0.0 <= self.split <= 1.0:
            bad("split", "must lie in [0, 1]")
        if self.n_symbols < 1:
            bad("n_symbols", "must be positive")
        if not self.seeds:
            bad("seeds", "need at least one seed")
        if self.method not in METHODS:
            bad("method", f"must be one of {sorted(METHODS)}")
        if self.window < 0:
            bad("window", "must be non-negative")
        if self.bins < 1:
            bad("bins", "must be positive")
        return self

    # -- text round trip ---------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(repr(x) for x in v)
            elif v is None:
                v = ""
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"config line is not 'key = value': {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
        return cls().update(values)

    def update(self, values: dict) -> "ExperimentConfig":
        types = {f.name: f.type for f in dataclasses.fields(self)}
        for key, val in values.items():
            if key not in types:
                raise ConfigurationError(f"unknown config field '{key}'")
            try:
                setattr(self, key, _parse_value(types[key], val))
            except ValueError as exc:
                raise ConfigurationError(f"invalid config field '{key}': {exc}") from None
        return self


def _parse_value(type_name: str, val):
    if not isinstance(val, str):
        return val
    if type_name == "list[float]":
        return [float(v) for v in val.split(",") if v.strip()]
    if type_name == "list[int]":
        return [int(v) for v in val.split(",") if v.strip()]
    if type_name == "int":
        return int(float(val)) if "e" in val.lower() else int(val)
    if type_name == "float":
        return float(val)
    if type_name == "float | None":
        return float(val) if val.strip() else None
    return val


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


class _Table:
    """CSV sink: header comments, column row, then data rows."""

    def __init__(self, columns, config: ExperimentConfig, subcommand: str, extra_comments=()):
        self.columns = list(columns)
        self.buf = io.StringIO()
        self.buf.write(f"# trellis_prune {__version__} {subcommand}\n")
        for line in config.to_text().splitlines():
            self.buf.write(f"# {line}\n")
        for line in extra_comments:
            self.buf.write(f"# {line}\n")
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(self.columns)

    def row(self, *values):
        self.writer.writerow([_fmt(v) for v in values])

    def write(self, path: str):
        text = self.buf.getvalue()
        if path in ("", "-"):
            sys.stdout.write(text)
        else:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                fh.write(text)


def read_table(path) -> list[dict]:
    """Rows of a CSV written by this tool, comments skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _map(fn, items):
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _model(cfg: ExperimentConfig, alpha: float):
    return build_trellis(build_constellation(cfg.modulation), build_pulse(alpha, cfg.D, cfg.osf))


def _single(cfg: ExperimentConfig, name: str):
    values = getattr(cfg, name)
    if len(values) != 1:
        raise ConfigurationError(f"invalid config field '{name}': this subcommand takes one value")
    return values[0]


# -- subcommands -------------------------------------------------------------

def cmd_taps(cfg: ExperimentConfig):
    pulse = build_pulse(_single(cfg, "alpha"), cfg.D, cfg.osf)
    table = _Table(TAPS_COLUMNS, cfg, "taps")
    for n, (t, h) in enumerate(zip(pulse.times, pulse.taps)):
        table.row(n, float(t), float(h))
    table.write(cfg.output)


def cmd_trajectory(cfg: ExperimentConfig):
    trellis = _model(cfg, _single(cfg, "alpha"))
    eta = _single(cfg, "eta")
    seed = _single(cfg, "seeds")
    prune = select_prune_set(compute_edge_metrics(trellis), eta, cfg.split) if eta > 0 else None
    sig = encode(trellis, prune, random_inputs(trellis.M, cfg.n_symbols, seed))
    if cfg.n_symbols <= 2 * sig.guard:
        raise ConfigurationError("invalid config field 'n_symbols': shorter than the guard")
    first = sig.guard * sig.osf
    body = sig.body()
    table = _Table(TRAJECTORY_COLUMNS, cfg, "trajectory")
    for i, z in enumerate(body):
        n = first + i
        table.row(n, n / sig.osf, z.real, z.imag, abs(z))
    table.write(cfg.output)


def _papr_rows(args):
    cfg, alpha = args
    trellis = _model(cfg, alpha)
    metrics = compute_edge_metrics(trellis)
    prunes = {eta: select_prune_set(metrics, eta, cfg.split) if eta > 0 else None
              for eta in cfg.eta}
    rows = []
    for seed in cfg.seeds:
        inputs = random_inputs(trellis.M, cfg.n_symbols, seed)
        for eta in cfg.eta:
            log.info("papr alpha=%s eta=%s seed=%s", alpha, eta, seed)
            sig = encode(trellis, prunes[eta], inputs)
            est = measure_papr(sig)
            rows.append((cfg.modulation, alpha, cfg.D, cfg.osf, eta, cfg.n_symbols, seed,
                         symbol_energy(sig), est.papr_max_db, est.papr_ccdf_db))
    return rows


def cmd_papr(cfg: ExperimentConfig):
    table = _Table(PAPR_COLUMNS, cfg, "papr")
    for rows in _map(_papr_rows, [(cfg, a) for a in cfg.alpha]):
        for r in rows:
            table.row(*r)
    table.write(cfg.output)


def cmd_prune_stats(cfg: ExperimentConfig):
    trellis = _model(cfg, _single(cfg, "alpha"))
    eta = _single(cfg, "eta")
    metrics = compute_edge_metrics(trellis)
    prune = select_prune_set(metrics, eta, cfg.split)

    top = float(max(metrics.peak2.max(), metrics.min2.max()))
    edges = np.linspace(0.0, top, cfg.bins + 1)
    c_peak, _ = np.histogram(metrics.peak2, bins=edges)
    c_min, _ = np.histogram(metrics.min2, bins=edges)
    hist = _Table(METRIC_HIST_COLUMNS, cfg, "prune-stats")
    for lo, hi, a, b in zip(edges[:-1], edges[1:], c_peak, c_min):
        hist.row(float(lo), float(hi), int(a), int(b))

    surv = np.bincount(prune.survivors_per_state(), minlength=trellis.M + 1)
    stats = _Table(SURVIVOR_COLUMNS, cfg, "prune-stats",
                   [f"achieved_eta = {_fmt(prune.achieved_eta)}",
                    f"pruned_edges = {prune.num_pruned}"])
    for k in range(1, trellis.M + 1):
        stats.row(k, int(surv[k]))

    hist.write(cfg.output)
    stats.write(survivors_path(cfg.output))


def survivors_path(output: str) -> str:
    if output in ("", "-"):
        return "-"
    p = Path(output)
    return str(p.with_name(f"{p.stem}_survivors{p.suffix or '.csv'}"))


def _capacity_rows(args):
    cfg, alpha = args
    trellis = _model(cfg, alpha)
    metrics = compute_edge_metrics(trellis) if any(e > 0 for e in cfg.eta) else None
    rows = []
    method = METHODS[cfg.method]
    for eta in cfg.eta:
        prune = select_prune_set(metrics, eta, cfg.split) if eta > 0 else None
        if cfg.method == "high-snr":
            est = high_snr_limit(trellis, prune)
            rows.append((cfg.modulation, alpha, cfg.D, cfg.osf, eta, method, est.es_n0_db,
                         0, est.bits_per_symbol, est.std_error))
            continue
        for snr in cfg.es_n0_db:
            for seed in cfg.seeds:
                log.info("capacity alpha=%s eta=%s snr=%s seed=%s", alpha, eta, snr, seed)
                if cfg.method == "full":
                    est = estimate_capacity_full(trellis, prune, snr, cfg.n_symbols,
                                                 cfg.window, seed)
                else:
                    est = estimate_lower_bound(trellis, prune, snr, cfg.n_symbols, seed)
                rows.append((cfg.modulation, alpha, cfg.D, cfg.osf, eta, method, snr,
                             cfg.n_symbols, est.bits_per_symbol, est.std_error))
    return rows


def cmd_capacity(cfg: ExperimentConfig):
    table = _Table(CAPACITY_COLUMNS, cfg, "capacity")
    for rows in _map(_capacity_rows, [(cfg, a) for a in cfg.alpha]):
        for r in rows:
            table.row(*r)
    table.write(cfg.output)


def cmd_report(cfg: ExperimentConfig):
    if not cfg.papr_csv or not cfg.capacity_csv:
        raise ConfigurationError("invalid config field 'papr_csv'/'capacity_csv': both are required")
    papr = read_table(cfg.papr_csv)
    cap = read_table(cfg.capacity_csv)
    if not papr or not cap:
        raise ConfigurationError("invalid config field 'papr_csv'/'capacity_csv': empty table")
    snrs = sorted({float(r["es_n0_db"]) for r in cap})
    snr = cfg.report_es_n0_db if cfg.report_es_n0_db is not None else snrs[-1]

    def by_eta(rows, key, keep):
        acc = {}
        for r in rows:
            if keep(r):
                acc.setdefault(float(r["eta"]), []).append(float(r[key]))
        return {k: float(np.mean(v)) for k, v in acc.items()}

    papr_db = by_eta(papr, "papr_max_db", lambda r: True)
    bits = by_eta(cap, "bits", lambda r: float(r["es_n0_db"]) == snr)
    if 0.0 not in bits:
        raise ConfigurationError("invalid config field 'capacity_csv': needs an eta=0 row at "
                                 f"es_n0_db={snr}")
    if bits[0.0] <= 0:
        raise NumericError("unpruned capacity is zero; retention ratio undefined")
    table = _Table(REPORT_COLUMNS, cfg, "report", [f"report_es_n0_db = {_fmt(snr)}"])
    for eta in sorted(set(papr_db) & set(bits)):
        table.row(eta, papr_db[eta], bits[eta] / bits[0.0])
    table.write(cfg.output)


COMMANDS = {
    "taps": cmd_taps,
    "trajectory": cmd_trajectory,
    "papr": cmd_papr,
    "prune-stats": cmd_prune_stats,
    "capacity": cmd_capacity,
    "report": cmd_report,
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--modulation")
    common.add_argument("--alpha", help="comma-separated roll-off factors")
    common.add_argument("--D", dest="D")
    common.add_argument("--osf")
    common.add_argument("--eta", help="comma-separated pruning fractions")
    common.add_argument("--split")
    common.add_argument("--es-n0-db", dest="es_n0_db", help="comma-separated Es/N0 grid in dB")
    common.add_argument("--n-symbols", dest="n_symbols")
    common.add_argument("--seed", "--seeds", dest="seeds", help="comma-separated seeds")
    common.add_argument("--method", help="lower | full | high-snr")
    common.add_argument("--window")
    common.add_argument("--bins")
    common.add_argument("-o", "--output")
    common.add_argument("--papr-csv", dest="papr_csv")
    common.add_argument("--capacity-csv", dest="capacity_csv")
    common.add_argument("--report-es-n0-db", dest="report_es_n0_db")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="trellis-prune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigurationError(f"invalid config field 'config': {exc}") from None
        cfg = ExperimentConfig.from_text(text)
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(cfg)
                 if getattr(args, f.name, None) is not None}
    return cfg.update(overrides).validate()


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        COMMANDS[args.subcommand](cfg)
    except (ConfigurationError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
