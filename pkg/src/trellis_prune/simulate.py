"""Signal generation through the (optionally pruned) encoder, AWGN, and PAPR."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConfigurationError, NumericError
from .pruning import PruneSet, remap_table
from .trellis import TrellisModel, edge_waveforms

CCDF_LEVEL = 1e-4


@dataclass(eq=False)
class Signal:
    samples: np.ndarray
    osf: int
    n_symbols: int
    guard: int
    symbols: np.ndarray | None = None  # realized (post-remap) symbol indices
    edges: np.ndarray | None = None  # traversed edge ids

    def __post_init__(self):
        if len(self.samples) != self.n_symbols * self.osf:
            raise ValueError("samples length must equal n_symbols * osf")

    def body(self) -> np.ndarray:
        """Samples with ``guard`` symbols removed at both ends."""
        g = self.guard * self.osf
        return self.samples[g:len(self.samples) - g]


@dataclass(frozen=True)
class ChannelParams:
    es_n0_db: float
    es: float
    seed: int = 0

    @property
    def n0(self) -> float:
        if not np.isfinite(self.es_n0_db):
            return 0.0
        return self.es / 10.0 ** (self.es_n0_db / 10.0)


@dataclass(frozen=True)
class PaprEstimate:
    papr_max: float
    papr_ccdf: float
    mean_power: float
    n_symbols: int

    @property
    def papr_max_db(self) -> float:
        return 10.0 * np.log10(self.papr_max)

    @property
    def papr_ccdf_db(self) -> float:
        return 10.0 * np.log10(self.papr_ccdf)


def random_inputs(M: int, n_symbols: int, seed) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, M, size=n_symbols)


@numba.njit(cache=True)
def _walk(table, inputs, M, modulus):
    n = inputs.shape[0]
    states = np.empty(n, dtype=np.int64)
    realized = np.empty(n, dtype=np.int64)
    s = 0
    for k in range(n):
        states[k] = s
        x = table[s * M + inputs[k]]
        realized[k] = x
        s = (s % modulus) * M + x
    return states, realized


def walk(trellis: TrellisModel, prune_set: PruneSet | None, inputs):
    """States entered and realized inputs along a path from the all-zero-index state.

    Returns ``(states, realized)`` where ``states[k]`` is the state before
    symbol ``k`` and ``realized[k]`` the input after remapping.
    """
    x = np.asarray(inputs, dtype=np.int64)
    if len(x) and (x.min() < 0 or x.max() >= trellis.M):
        raise IndexError(f"input indices must lie in [0, {trellis.M})")
    M = trellis.M
    modulus = trellis.num_states // M
    if prune_set is None:
        realized = x.copy()
        # state before k holds x[k-1], x[k-2], ... with the newest digit lowest
        padded = np.concatenate([np.zeros(trellis.memory, dtype=np.int64), realized])
        states = np.zeros(len(x), dtype=np.int64)
        for m in range(1, trellis.memory + 1):
            states += padded[trellis.memory - m:trellis.memory - m + len(x)] * M ** (m - 1)
        return states, realized
    table = remap_table(trellis, prune_set)
    return _walk(table, x, M, modulus)


def walk_states(trellis: TrellisModel, prune_set: PruneSet | None, inputs) -> np.ndarray:
    return walk(trellis, prune_set, inputs)[0]


def encode(trellis: TrellisModel, prune_set: PruneSet | None, inputs,
           guard: int | None = None) -> Signal:
    """Drive the encoder from the all-zero-index state and concatenate edge segments."""
    states, realized = walk(trellis, prune_set, inputs)
    edges = states * trellis.M + realized
    samples = np.empty((len(edges), trellis.osf), dtype=np.complex128)
    chunk = 1 << 16
    for start in range(0, len(edges), chunk):
        samples[start:start + chunk] = edge_waveforms(trellis, edges[start:start + chunk])
    if guard is None:
        guard = 2 * trellis.D
    return Signal(samples.ravel(), trellis.osf, len(edges), guard, realized, edges)


def measure_papr(signal: Signal) -> PaprEstimate:
    """Literal sample-max PAPR and the per-sample CCDF level at 1e-4."""
    if signal.n_symbols <= 2 * signal.guard:
        raise ConfigurationError("signal too short for its guard interval")
    p = np.abs(signal.body()) ** 2
    mean = float(p.mean())
    if not mean > 0:
        raise NumericError("signal has zero mean power")
    ratio = p / mean
    return PaprEstimate(
        papr_max=float(ratio.max()),
        papr_ccdf=float(np.quantile(ratio, 1.0 - CCDF_LEVEL)),
        mean_power=mean,
        n_symbols=signal.n_symbols,
    )


def add_awgn(signal: Signal, params: ChannelParams) -> Signal:
    """Circularly-symmetric complex Gaussian noise, variance n0 per sample."""
    n0 = params.n0
    if n0 < 0:
        raise ConfigurationError("noise variance must be non-negative")
    if n0 == 0:
        noisy = signal.samples.copy()
    else:
        rng = np.random.default_rng(params.seed)
        w = rng.standard_normal((len(signal.samples), 2)) * np.sqrt(n0 / 2.0)
        noisy = signal.samples + (w[:, 0] + 1j * w[:, 1])
    return Signal(noisy, signal.osf, signal.n_symbols, signal.guard, signal.symbols, signal.edges)


def symbol_energy(signal: Signal) -> float:
    """Mean over non-guard symbols of the per-symbol-period energy."""
    body = signal.body().reshape(-1, signal.osf)
    return float(np.mean(np.sum(np.abs(body) ** 2, axis=1)))


def calibrate_es(trellis: TrellisModel, prune_set: PruneSet | None,
                 n_symbols: int = 100_000, seed=0) -> float:
    """Average energy per symbol period for random uniform inputs."""
    if n_symbols < 10_000:
        raise ConfigurationError("calibration needs at least 10^4 symbols")
    inputs = random_inputs(trellis.M, n_symbols, seed)
    return symbol_energy(encode(trellis, prune_set, inputs))
