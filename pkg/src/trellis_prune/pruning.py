"""Pruned-edge selection, survivor bookkeeping and input remapping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InfeasibleError, NumericError
from .trellis import EdgeMetrics, TrellisModel

NEAREST_SURVIVING_WAVEFORM = "NearestSurvivingWaveform"

EXACT_STATE_LIMIT = 1 << 20


@dataclass(eq=False)
class PruneSet:
    """Pruned edges as a boolean mask over edge ids.

    ``pruned[e]`` is True for a removed edge. The remap table is filled in
    lazily the first time a trellis asks for it.
    """

    pruned: np.ndarray
    M: int
    requested_eta: float
    split: float = 0.5
    remap_rule: str = NEAREST_SURVIVING_WAVEFORM
    _remap: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_edges(self) -> int:
        return len(self.pruned)

    @property
    def num_pruned(self) -> int:
        return int(np.count_nonzero(self.pruned))

    @property
    def achieved_eta(self) -> float:
        return self.num_pruned / self.num_edges

    def survivors_per_state(self) -> np.ndarray:
        return self.M - self.pruned.reshape(-1, self.M).sum(axis=1)

    def pruned_ids(self) -> np.ndarray:
        return np.flatnonzero(self.pruned)

    def __contains__(self, edge) -> bool:
        return bool(self.pruned[edge])


def prune_set_from_edges(num_edges: int, M: int, edges, requested_eta=None) -> PruneSet:
    """Build a prune set from an explicit list of edge ids (for hand-built models)."""
    mask = np.zeros(num_edges, dtype=bool)
    mask[np.asarray(edges, dtype=np.int64)] = True
    if np.any(mask.reshape(-1, M).all(axis=1)):
        raise InfeasibleError("some state would lose every outgoing edge")
    eta = mask.sum() / num_edges if requested_eta is None else requested_eta
    return PruneSet(mask, M, float(eta), split=float("nan"))


def _ranked(order: np.ndarray, chunk: int = 1 << 16):
    for start in range(0, len(order), chunk):
        yield from order[start:start + chunk].tolist()


def select_prune_set(metrics: EdgeMetrics, eta: float, split: float = 0.5) -> PruneSet:
    """Greedy peak / zero-crossing pruning.

    ``floor(eta * num_edges)`` edges are removed. Picks alternate between the
    descending-``peak2`` ranking and the ascending-``min2`` ranking so that
    after ``t`` picks exactly ``floor(split * t)`` came from the peak side;
    the prune set for a smaller eta is then always a prefix of the one for a
    larger eta. Candidates already pruned, or whose state is down to one
    surviving edge, are skipped. Ties go to the lower edge id.
    """
    if not 0.0 <= eta <= 1.0:
        raise ConfigurationError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= split <= 1.0:
        raise ConfigurationError(f"split must lie in [0, 1], got {split}")
    M, num_edges = metrics.M, metrics.num_edges
    num_states = num_edges // M
    quota = math.floor(eta * num_edges)
    max_prunable = num_states * (M - 1)
    if quota > max_prunable:
        raise InfeasibleError(
            f"eta={eta} needs {quota} pruned edges but at most {max_prunable} "
            f"(eta={max_prunable / num_edges:.6g}) keep a survivor in every state",
            max_achievable=max_prunable / num_edges,
        )

    pruned = bytearray(num_edges)
    survivors = [M] * num_states
    if quota:
        by_peak = _ranked(np.argsort(-metrics.peak2, kind="stable"))
        by_zero = _ranked(np.argsort(metrics.min2, kind="stable"))
        n_peak = 0
        for t in range(1, quota + 1):
            want_peak = math.floor(split * t)
            source = by_peak if want_peak > n_peak else by_zero
            n_peak = want_peak
            for e in source:
                s = e // M
                if not pruned[e] and survivors[s] > 1:
                    pruned[e] = 1
                    survivors[s] -= 1
                    break
    mask = np.frombuffer(bytes(pruned), dtype=np.uint8).astype(bool)
    return PruneSet(mask, M, float(eta), float(split))


def remap_table(trellis: TrellisModel, prune_set: PruneSet) -> np.ndarray:
    """Effective input for every (state, input), indexed by edge id.

    Survivors map to themselves. A pruned edge maps to the surviving input of
    the same state whose segment is closest in squared Euclidean distance.
    Two segments leaving one state differ only through the newest symbol, so
    that distance is ``|g_x - g_y|^2 * sum(h[:osf]^2)`` and the search runs
    over constellation distances.
    """
    if prune_set._remap is not None:
        return prune_set._remap
    M = trellis.M
    if prune_set.num_edges != trellis.num_edges or prune_set.M != M:
        raise ConfigurationError("prune set does not belong to this trellis")
    dtype = np.uint8 if M <= 256 else np.int32
    table = np.tile(np.arange(M, dtype=dtype), trellis.num_states)
    pruned = prune_set.pruned_ids()
    if len(pruned):
        head = trellis.contrib[0]
        dist = np.sum(np.abs(head[:, None, :] - head[None, :, :]) ** 2, axis=2)
        alive = ~prune_set.pruned.reshape(-1, M)
        chunk = 1 << 16
        for start in range(0, len(pruned), chunk):
            ids = pruned[start:start + chunk]
            states, inputs = np.divmod(ids, M)
            cost = np.where(alive[states], dist[inputs], np.inf)
            table[ids] = np.argmin(cost, axis=1)
    table.setflags(write=False)
    prune_set._remap = table
    return table


def remap(trellis: TrellisModel, prune_set: PruneSet, state: int, symbol: int) -> int:
    if not (0 <= state < trellis.num_states and 0 <= symbol < trellis.M):
        raise IndexError("state or input id out of range")
    return int(remap_table(trellis, prune_set)[state * trellis.M + symbol])


def effective_edges(trellis: TrellisModel, prune_set: PruneSet | None) -> np.ndarray:
    """Edge actually traversed for each (state, input), indexed by nominal edge id."""
    base = np.arange(trellis.num_edges, dtype=np.int64)
    if prune_set is None:
        return base
    table = remap_table(trellis, prune_set).astype(np.int64)
    return base - base % trellis.M + table


def _collapsed_next_states(trellis: TrellisModel, prune_set: PruneSet | None) -> np.ndarray:
    eff = effective_edges(trellis, prune_set)
    return eff % trellis.num_states


def stationary_distribution(trellis: TrellisModel, prune_set: PruneSet | None, *,
                            mode: str = "auto", tol: float = 1e-12,
                            max_iter: int = 100_000, n_walk: int = 10**7,
                            seed: int = 0) -> np.ndarray:
    """Stationary law of the encoder state under i.i.d. uniform inputs.

    ``exact`` runs power iteration on the lazy chain ``(I + P) / 2`` from the
    all-zero-index state, so it converges to the law of the recurrent class
    reached from there even when that class is periodic. ``empirical``
    counts visits along a seeded random walk of ``n_walk`` symbols.
    """
    if mode == "auto":
        mode = "exact" if trellis.num_states <= EXACT_STATE_LIMIT else "empirical"
    M, K = trellis.M, trellis.num_states
    nxt = _collapsed_next_states(trellis, prune_set)
    if mode == "exact":
        if K > EXACT_STATE_LIMIT:
            raise ConfigurationError(f"exact mode needs num_states <= {EXACT_STATE_LIMIT}")
        pi = np.zeros(K)
        pi[0] = 1.0
        for _ in range(max_iter):
            moved = np.bincount(nxt, weights=np.repeat(pi / M, M), minlength=K)
            new = 0.5 * (pi + moved)
            change = np.abs(new - pi).sum()
            pi = new
            if change < tol:
                return pi / pi.sum()
        raise NumericError(f"power iteration did not converge in {max_iter} iterations")
    if mode == "empirical":
        from .simulate import random_inputs, walk_states

        inputs = random_inputs(M, n_walk, seed)
        states = walk_states(trellis, prune_set, inputs)
        counts = np.bincount(states, minlength=K)
        return counts / counts.sum()
    raise ConfigurationError(f"unknown stationary mode {mode!r}")


def reachable_states(trellis: TrellisModel, prune_set: PruneSet | None) -> np.ndarray:
    """Mask of states reachable from the all-zero-index state."""
    M = trellis.M
    nxt = _collapsed_next_states(trellis, prune_set).reshape(-1, M)
    seen = np.zeros(trellis.num_states, dtype=bool)
    seen[0] = True
    frontier = np.array([0])
    while len(frontier):
        cand = np.unique(nxt[frontier].ravel())
        cand = cand[~seen[cand]]
        seen[cand] = True
        frontier = cand
    return seen
