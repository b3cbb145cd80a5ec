"""The pulse-shaping filter viewed as an M-ary convolutional encoder.

States are never materialized. A state id packs the last ``2D-1`` symbol
indices as base-M digits with the most recent symbol in the least
significant digit, and an edge id is ``state * M + input``. Base-M digit
``m`` of an edge id is therefore the symbol ``g[j-m]`` that multiplies
taps ``h[m*osf : (m+1)*osf]`` in the current symbol period.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceError
from .waveform import Constellation, PulseShape

DEFAULT_MAX_EDGES = 16**6

# Peak working-set (complex samples) per chunk of the metric scan.
_METRIC_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class TrellisModel:
    constellation: Constellation
    pulse: PulseShape
    memory: int
    num_states: int
    num_edges: int
    # contrib[m, x, q] = points[x] * h[q + m*osf]
    contrib: np.ndarray

    @property
    def M(self) -> int:
        return self.constellation.M

    @property
    def osf(self) -> int:
        return self.pulse.osf

    @property
    def D(self) -> int:
        return self.pulse.D

    @property
    def span(self) -> int:
        """Symbols contributing to one output period (memory + 1 = 2D)."""
        return self.memory + 1


@dataclass(frozen=True, eq=False)
class EdgeMetrics:
    """Per-edge extremes of the squared output magnitude over one symbol period."""

    peak2: np.ndarray
    min2: np.ndarray
    M: int

    @property
    def num_edges(self) -> int:
        return len(self.peak2)

    @property
    def num_states(self) -> int:
        return self.num_edges // self.M


def build_trellis(constellation: Constellation, pulse: PulseShape,
                  max_edges: int = DEFAULT_MAX_EDGES) -> TrellisModel:
    M = constellation.M
    memory = 2 * pulse.D - 1
    num_edges = M ** (memory + 1)
    if num_edges > max_edges:
        raise ResourceError(
            f"trellis with M={M}, D={pulse.D} has {num_edges} edges, "
            f"above the guard of {max_edges} edges"
        )
    osf = pulse.osf
    h = np.asarray(pulse.taps)[: (memory + 1) * osf].reshape(memory + 1, osf)
    contrib = constellation.points[None, :, None] * h[:, None, :]
    contrib.setflags(write=False)
    return TrellisModel(constellation, pulse, memory, M**memory, num_edges, contrib)


def _check_ids(trellis: TrellisModel, state, symbol) -> None:
    s = np.asarray(state)
    x = np.asarray(symbol)
    if np.any(s < 0) or np.any(s >= trellis.num_states):
        raise IndexError(f"state id out of range [0, {trellis.num_states})")
    if np.any(x < 0) or np.any(x >= trellis.M):
        raise IndexError(f"input index out of range [0, {trellis.M})")


def next_state(trellis: TrellisModel, state, symbol):
    """Shift-register update; works elementwise on arrays."""
    _check_ids(trellis, state, symbol)
    return (state % (trellis.num_states // trellis.M)) * trellis.M + symbol


def edge_id(trellis: TrellisModel, state, symbol):
    _check_ids(trellis, state, symbol)
    return state * trellis.M + symbol


def split_edge(trellis: TrellisModel, edge):
    """Inverse of :func:`edge_id`: returns ``(state, input)``."""
    return divmod(edge, trellis.M)


def state_digits(trellis: TrellisModel, state) -> list[int]:
    """Symbol indices held by a state, most recent first."""
    digits = []
    for _ in range(trellis.memory):
        state, d = divmod(int(state), trellis.M)
        digits.append(d)
    return digits


def edge_waveforms(trellis: TrellisModel, edges) -> np.ndarray:
    """Output segments for an array of edge ids, shape ``edges.shape + (osf,)``."""
    e = np.asarray(edges, dtype=np.int64)
    out = np.zeros(e.shape + (trellis.osf,), dtype=np.complex128)
    rem = e.copy()
    for m in range(trellis.span):
        rem, digit = np.divmod(rem, trellis.M)
        out += trellis.contrib[m, digit]
    return out


def edge_waveform(trellis: TrellisModel, state: int, symbol: int) -> np.ndarray:
    """Samples of the edge's output over one symbol period, at tau = q/osf."""
    _check_ids(trellis, state, symbol)
    return edge_waveforms(trellis, int(state) * trellis.M + int(symbol))


def _digit_sum_table(trellis: TrellisModel, first: int, count: int) -> np.ndarray:
    """Partial waveforms over digits ``first..first+count-1`` for every digit combination."""
    table = np.zeros((1, trellis.osf), dtype=np.complex128)
    for m in range(first + count - 1, first - 1, -1):
        # earlier loop digits are more significant in the combined index
        table = (table[:, None, :] + trellis.contrib[m][None, :, :]).reshape(-1, trellis.osf)
    return table


def compute_edge_metrics(trellis: TrellisModel) -> EdgeMetrics:
    """Max and min of |s|^2 over each edge's segment, streaming over all edges."""
    M, span, osf = trellis.M, trellis.span, trellis.osf
    n_low = 0
    while n_low < span and M ** (n_low + 1) * osf <= _METRIC_CHUNK // 4:
        n_low += 1
    n_low = max(n_low, 1)
    low = _digit_sum_table(trellis, 0, n_low)
    high = _digit_sum_table(trellis, n_low, span - n_low)
    n_low_ids = low.shape[0]

    peak2 = np.empty(trellis.num_edges)
    min2 = np.empty(trellis.num_edges)
    rows = max(1, _METRIC_CHUNK // (n_low_ids * osf))
    for start in range(0, high.shape[0], rows):
        block = high[start:start + rows]
        w = block[:, None, :] + low[None, :, :]
        p = w.real**2 + w.imag**2
        lo, hi = start * n_low_ids, (start + len(block)) * n_low_ids
        peak2[lo:hi] = p.max(axis=2).ravel()
        min2[lo:hi] = p.min(axis=2).ravel()
    return EdgeMetrics(peak2, min2, M)

