"""Decision-feedback-aided BCJR over the pruning channel.

With the past inputs fed back, the encoder state before symbol k is known,
so the forward recursion collapses to a single state and only the branch
metric and (optionally) the backward recursion remain. Everything runs in
the log domain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError, ResourceError
from .pruning import PruneSet, effective_edges
from .trellis import TrellisModel, edge_waveforms

PAST_ONLY = "PastOnly"
PAST_AND_FUTURE = "PastAndFuture"

FULL_STATE_GUARD = 1 << 12


@dataclass(frozen=True, eq=False)
class AppVector:
    probs: np.ndarray
    conditioning: str

    def log2_prob(self, x: int) -> float:
        p = self.probs[x]
        return float(np.log2(p)) if p > 0 else -np.inf


@dataclass(frozen=True, eq=False)
class ObservationBlock:
    y: np.ndarray
    n0: float


def _log_prior(M: int, prior) -> np.ndarray:
    if prior is None:
        return np.full(M, -np.log(M))
    p = np.asarray(prior, dtype=np.float64)
    if p.shape != (M,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ConfigurationError("prior must be a length-M probability vector")
    with np.errstate(divide="ignore"):
        return np.log(p)


def _normalize_log(logp: np.ndarray, axis=-1) -> np.ndarray:
    top = np.max(logp, axis=axis, keepdims=True)
    w = np.exp(logp - top)
    return w / w.sum(axis=axis, keepdims=True)


def _check_n0(n0: float) -> None:
    if not n0 > 0:
        raise NumericError("n0 must be positive; noiseless decoding needs exact matching")


def edge_log_likelihood(trellis: TrellisModel, prune_set: PruneSet | None,
                        state: int, symbol: int, obs: ObservationBlock) -> float:
    """``-||y - w||^2 / n0`` for the segment actually sent when ``symbol`` is offered at ``state``."""
    _check_n0(obs.n0)
    e = effective_edges(trellis, prune_set)[state * trellis.M + symbol]
    w = edge_waveforms(trellis, e)
    return float(-np.sum(np.abs(np.asarray(obs.y) - w) ** 2) / obs.n0)


def forward_log_metrics(trellis: TrellisModel, prune_set: PruneSet | None,
                        states, y_blocks, n0: float, eff: np.ndarray | None = None) -> np.ndarray:
    """Branch log-likelihoods for every input at each known state, shape ``(N, M)``."""
    _check_n0(n0)
    states = np.asarray(states, dtype=np.int64)
    y = np.asarray(y_blocks).reshape(len(states), trellis.osf)
    if eff is None:
        eff = effective_edges(trellis, prune_set)
    M = trellis.M
    out = np.empty((len(states), M))
    chunk = max(1, (1 << 20) // (M * trellis.osf))
    for start in range(0, len(states), chunk):
        s = states[start:start + chunk]
        w = edge_waveforms(trellis, eff[s[:, None] * M + np.arange(M)])
        r = y[start:start + chunk, None, :] - w
        out[start:start + chunk] = -np.sum(r.real**2 + r.imag**2, axis=2) / n0
    return out


def forward_app(trellis: TrellisModel, prune_set: PruneSet | None, known_state: int,
                obs: ObservationBlock, prior=None) -> AppVector:
    """APP of the current input from the current observation block and the fed-back state.

    Includes the input prior, so a degenerate prior is reproduced exactly.
    Cost per symbol is independent of the number of states.
    """
    ll = forward_log_metrics(trellis, prune_set, [known_state], obs.y, obs.n0)[0]
    probs = _normalize_log(ll + _log_prior(trellis.M, prior))
    return AppVector(probs, PAST_ONLY)


def forward_log_app_batch(trellis: TrellisModel, prune_set: PruneSet | None,
                          states, y_blocks, n0: float, prior=None) -> np.ndarray:
    """Log-APPs ``log P(X_k = x | Y_1^k, X_1^{k-1})`` for a genie-fed sequence, shape ``(N, M)``."""
    ll = forward_log_metrics(trellis, prune_set, states, y_blocks, n0) + _log_prior(trellis.M, prior)
    top = ll.max(axis=1, keepdims=True)
    return ll - top - np.log(np.exp(ll - top).sum(axis=1, keepdims=True))


def _check_full_guard(trellis: TrellisModel, max_states: int) -> None:
    if trellis.num_states > max_states:
        raise ResourceError(
            f"backward recursion over {trellis.num_states} states exceeds the guard of "
            f"{max_states}; use forward_app / the forward lower bound instead"
        )


class _Backward:
    """Shared pieces of the log-domain backward recursion for one model."""

    def __init__(self, trellis: TrellisModel, prune_set: PruneSet | None, n0: float, prior=None):
        _check_n0(n0)
        self.trellis = trellis
        self.n0 = n0
        M = trellis.M
        eff = effective_edges(trellis, prune_set)
        self.eff = eff
        self.next_of = (eff % trellis.num_states).reshape(-1, M)
        self.log_prior = _log_prior(M, prior)
        base = edge_waveforms(trellis, np.arange(trellis.num_edges))
        self.waves_conj = np.conj(base).T.copy()
        self.wave_energy = np.sum(np.abs(base) ** 2, axis=1)

    def gammas(self, y: np.ndarray) -> np.ndarray:
        """Branch log-likelihoods ``(L, num_states, M)`` for observation rows ``y``."""
        y = np.atleast_2d(y)
        cross = (y @ self.waves_conj).real
        d = np.sum(np.abs(y) ** 2, axis=1)[:, None] - 2.0 * cross + self.wave_energy[None, :]
        g = -d[:, self.eff] / self.n0
        return g.reshape(len(y), self.trellis.num_states, self.trellis.M)

    def step(self, gamma_t: np.ndarray, beta_next: np.ndarray) -> np.ndarray:
        """One backward step; result renormalized to max 0."""
        t = gamma_t + self.log_prior + beta_next[self.next_of]
        top = t.max(axis=1, keepdims=True)
        b = top[:, 0] + np.log(np.exp(t - top).sum(axis=1))
        return b - b.max()


def full_dfa_bcjr(trellis: TrellisModel, prune_set: PruneSet | None, obs_sequence, n0: float,
                  known_prefix, k: int | None = None, prior=None,
                  max_states: int = FULL_STATE_GUARD) -> AppVector:
    """APP of input ``k`` (0-based) given all observations and the true inputs before it.

    ``obs_sequence`` holds one row of ``osf`` samples per symbol, starting
    from the all-zero-index state. ``known_prefix`` are the nominal inputs
    ``X_0..X_{k-1}``; they are remapped exactly as the encoder would.
    """
    _check_full_guard(trellis, max_states)
    y = np.asarray(obs_sequence).reshape(-1, trellis.osf)
    N = len(y)
    prefix = np.asarray(known_prefix, dtype=np.int64)
    k = len(prefix) if k is None else k
    if k != len(prefix) or not 0 <= k < N:
        raise ConfigurationError("known_prefix must hold exactly the k inputs before target k < N")
    bw = _Backward(trellis, prune_set, n0, prior)
    M = trellis.M
    s = 0
    for x in prefix:
        s = int(bw.eff[s * M + x]) % trellis.num_states
    beta = np.zeros(trellis.num_states)
    for t in range(N - 1, k, -1):
        beta = bw.step(bw.gammas(y[t])[0], beta)
    g = bw.gammas(y[k])[0, s]
    logp = g + bw.log_prior + beta[bw.next_of[s]]
    return AppVector(_normalize_log(logp), PAST_AND_FUTURE)


def full_log_app_batch(trellis: TrellisModel, prune_set: PruneSet | None, states, y_blocks,
                       n0: float, window: int, prior=None,
                       max_states: int = FULL_STATE_GUARD) -> np.ndarray:
    """Windowed DFA-BCJR log-APPs for a genie-fed sequence, shape ``(N, M)``.

    Symbols are processed in blocks of ``max(window, 1)``; one backward pass
    per block starts ``window`` symbols past the block end, so every symbol
    conditions on at least ``window`` future observations (fewer only at the
    end of the sequence). ``window=0`` reproduces the forward-only APPs.
    """
    _check_full_guard(trellis, max_states)
    if window < 0:
        raise ConfigurationError("window must be non-negative")
    states = np.asarray(states, dtype=np.int64)
    y = np.asarray(y_blocks).reshape(len(states), trellis.osf)
    N, M = len(states), trellis.M
    bw = _Backward(trellis, prune_set, n0, prior)
    out = np.empty((N, M))
    block = max(window, 1)
    for a in range(0, N, block):
        b = min(a + block, N)
        end = min(b + window, N)
        gam = bw.gammas(y[a:end])
        beta = np.zeros(trellis.num_states)
        betas = {}
        for t in range(end - 1, a, -1):
            beta = bw.step(gam[t - a], beta)
            if t <= b:
                betas[t] = beta
        for k in range(a, b):
            s = states[k]
            nb = betas.get(k + 1)
            fut = 0.0 if nb is None else nb[bw.next_of[s]]
            logp = gam[k - a, s] + bw.log_prior + fut
            top = logp.max()
            out[k] = logp - top - np.log(np.exp(logp - top).sum())
    return out


def decode_forward(trellis: TrellisModel, prune_set: PruneSet | None, y_blocks, n0: float,
                   feedback: str = "genie", true_inputs=None, prior=None):
    """Forward-only decoding of a whole block.

    ``feedback="genie"`` feeds the true inputs back; ``"hard"`` feeds back
    the argmax of each APP, so decision errors propagate through the state.
    Returns ``(log_apps, decisions)``.
    """
    y = np.asarray(y_blocks).reshape(-1, trellis.osf)
    N, M = len(y), trellis.M
    eff = effective_edges(trellis, prune_set)
    if feedback == "genie":
        if true_inputs is None:
            raise ConfigurationError("genie feedback needs the true inputs")
        from .simulate import walk_states

        states = walk_states(trellis, prune_set, true_inputs)
        logp = forward_log_app_batch(trellis, prune_set, states, y, n0, prior)
        return logp, logp.argmax(axis=1)
    if feedback != "hard":
        raise ConfigurationError(f"unknown feedback mode {feedback!r}")
    lp = _log_prior(M, prior)
    logp = np.empty((N, M))
    decisions = np.empty(N, dtype=np.int64)
    s = 0
    for k in range(N):
        ll = forward_log_metrics(trellis, prune_set, [s], y[k], n0, eff)[0] + lp
        top = ll.max()
        logp[k] = ll - top - np.log(np.exp(ll - top).sum())
        decisions[k] = int(np.argmax(ll))
        s = int(eff[s * M + decisions[k]]) % trellis.num_states
    return logp, decisions
