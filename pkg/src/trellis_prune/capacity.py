"""Monte Carlo information rates of the pruning channel.

Both estimators use genie feedback (the true past inputs) and i.i.d.
uniform inputs, and report ``log2 M - mean(-log2 P(X_k | ...))``.
"""
from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np

from .decoder import FULL_STATE_GUARD, forward_log_app_batch, full_log_app_batch
from .errors import ConfigurationError, NumericError, ResourceError
from .pruning import PruneSet, effective_edges, stationary_distribution
from .simulate import ChannelParams, add_awgn, calibrate_es, encode, random_inputs
from .trellis import TrellisModel

FULL = "Full"
FORWARD_LOWER_BOUND = "ForwardLowerBound"
HIGH_SNR_LIMIT = "HighSnrLimit"

DEFAULT_WINDOW = 32
_LOG2E = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class CapacityEstimate:
    bits_per_symbol: float
    std_error: float
    n_symbols: int
    method: str
    es_n0_db: float


@dataclass(frozen=True)
class RetentionRatio:
    rho: float
    std_error: float
    pruned: CapacityEstimate
    unpruned: CapacityEstimate


def mean_and_stderr(values: np.ndarray, max_lag: int) -> tuple[float, float]:
    """Sample mean and its standard error, inflated for short-range correlation.

    The variance of the mean is scaled by ``1 + 2 * sum(r_l)`` over lags
    ``1..max_lag``, floored at 1.
    """
    v = np.asarray(values, dtype=np.float64)
    n = len(v)
    mean = float(v.mean())
    var = float(v.var(ddof=1)) if n > 1 else 0.0
    factor = 1.0
    if var > 0 and n > max_lag + 1:
        c = v - mean
        acf = [np.dot(c[:-lag], c[lag:]) / (n * var) for lag in range(1, max_lag + 1)]
        factor = max(1.0, 1.0 + 2.0 * float(np.sum(acf)))
    return mean, float(np.sqrt(var * factor / n))


@dataclass(eq=False)
class ChannelRun:
    """One seeded pass through encoder and AWGN, kept for both estimators."""

    inputs: np.ndarray
    states: np.ndarray
    y: np.ndarray
    n0: float
    es: float


def simulate_channel(trellis: TrellisModel, prune_set: PruneSet | None, es_n0_db: float,
                     n_symbols: int, seed: int) -> ChannelRun:
    ss = np.random.SeedSequence(seed)
    s_in, s_cal, s_noise = ss.spawn(3)
    es = calibrate_es(trellis, prune_set, max(n_symbols, 10_000), s_cal)
    inputs = random_inputs(trellis.M, n_symbols, s_in)
    sig = encode(trellis, prune_set, inputs)
    params = ChannelParams(es_n0_db, es, s_noise)
    noisy = add_awgn(sig, params)
    states = sig.edges // trellis.M
    return ChannelRun(inputs, states, noisy.samples.reshape(-1, trellis.osf), params.n0, es)


def _estimate(trellis: TrellisModel, log_app: np.ndarray, run: ChannelRun, method: str,
              es_n0_db: float) -> CapacityEstimate:
    burn = 2 * trellis.D
    n = len(run.inputs)
    if n <= 2 * burn + 1:
        raise ConfigurationError("n_symbols too small for the burn-in")
    idx = np.arange(burn, n - burn)
    info = -log_app[idx, run.inputs[idx]] * _LOG2E
    mean, se = mean_and_stderr(info, burn)
    bits = np.log2(trellis.M) - mean
    if not np.isfinite(bits):
        raise NumericError("non-finite capacity estimate")
    return CapacityEstimate(float(bits), se, len(idx), method, float(es_n0_db))


def estimate_lower_bound(trellis: TrellisModel, prune_set: PruneSet | None, es_n0_db: float,
                         n_symbols: int = 100_000, seed: int = 0) -> CapacityEstimate:
    """Achievable rate of the forward-only decoder (conditions on past outputs only)."""
    if n_symbols < 1000:
        raise ConfigurationError("n_symbols must be at least 1000")
    run = simulate_channel(trellis, prune_set, es_n0_db, n_symbols, seed)
    log_app = forward_log_app_batch(trellis, prune_set, run.states, run.y, run.n0)
    return _estimate(trellis, log_app, run, FORWARD_LOWER_BOUND, es_n0_db)


def estimate_capacity_full(trellis: TrellisModel, prune_set: PruneSet | None, es_n0_db: float,
                           n_symbols: int = 100_000, window: int = DEFAULT_WINDOW,
                           seed: int = 0, max_states: int = FULL_STATE_GUARD) -> CapacityEstimate:
    """Capacity estimate with future outputs folded in through a look-ahead window."""
    if trellis.num_states > max_states:
        raise ResourceError(
            f"{trellis.num_states} states exceed the full-BCJR guard of {max_states}; "
            "use estimate_lower_bound"
        )
    if n_symbols < 1000:
        raise ConfigurationError("n_symbols must be at least 1000")
    run = simulate_channel(trellis, prune_set, es_n0_db, n_symbols, seed)
    if window == 0:
        log_app = forward_log_app_batch(trellis, prune_set, run.states, run.y, run.n0)
    else:
        log_app = full_log_app_batch(trellis, prune_set, run.states, run.y, run.n0, window,
                                     max_states=max_states)
    return _estimate(trellis, log_app, run, FULL, es_n0_db)


def edge_entropies(trellis: TrellisModel, prune_set: PruneSet | None) -> np.ndarray:
    """Entropy in bits of the traversed-edge distribution leaving each state."""
    M = trellis.M
    eff = effective_edges(trellis, prune_set).reshape(-1, M) % M
    counts = np.zeros((trellis.num_states, M))
    np.add.at(counts, (np.repeat(np.arange(trellis.num_states), M), eff.ravel()), 1.0)
    p = counts / M
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=1)


def high_snr_limit(trellis: TrellisModel, prune_set: PruneSet | None,
                   stationary: np.ndarray | None = None, **kwargs) -> CapacityEstimate:
    """Noiseless limit: stationary average of the per-state edge-distribution entropy."""
    if stationary is None:
        stationary = stationary_distribution(trellis, prune_set, **kwargs)
    pi = np.asarray(stationary, dtype=np.float64)
    # fsum ratio keeps the unpruned case exactly log2 M
    bits = math.fsum(pi * edge_entropies(trellis, prune_set)) / math.fsum(pi)
    return CapacityEstimate(bits, 0.0, 0, HIGH_SNR_LIMIT, float("inf"))


def retention_ratio(pruned: CapacityEstimate, unpruned: CapacityEstimate) -> RetentionRatio:
    """Fraction of the unpruned rate kept after pruning, with delta-method error."""
    if pruned.method != unpruned.method or pruned.es_n0_db != unpruned.es_n0_db:
        raise ConfigurationError("retention ratio needs estimates of the same method and SNR")
    den = unpruned.bits_per_symbol
    if den <= 0 or den <= 3 * unpruned.std_error:
        raise NumericError("unpruned rate is indistinguishable from zero")
    rho = pruned.bits_per_symbol / den
    rel = np.hypot(pruned.std_error / den, rho * unpruned.std_error / den)
    return RetentionRatio(float(rho), float(rel), pruned, unpruned)
