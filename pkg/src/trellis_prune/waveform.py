"""Constellations and the truncated causal root-raised-cosine pulse.

Time is measured in symbol periods (T = 1) and the ideal Nyquist bandwidth
is W = 1/2, so the roll-off is the only free pulse parameter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

SYMBOL_PERIOD = 1.0
NYQUIST_BANDWIDTH = 0.5

# 2-bit Gray code -> PAM level, indexed by the bit pair value
_GRAY_PAM4 = np.array([-3.0, -1.0, 3.0, 1.0])


@dataclass(frozen=True, eq=False)
class Constellation:
    """An M-ary symbol alphabet; symbol index ``i`` maps to ``points[i]``."""

    kind: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def M(self) -> int:
        return len(self.points)

    @property
    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def min_distance(self) -> float:
        d = np.abs(self.points[:, None] - self.points[None, :])
        return float(d[~np.eye(self.M, dtype=bool)].min())


def build_constellation(kind: str) -> Constellation:
    """Gray-labelled, unit-average-energy QPSK or 16-QAM.

    QPSK: index bits (b1, b0) select the in-phase and quadrature signs.
    16-QAM: the high bit pair picks the in-phase level, the low pair the
    quadrature level, each through a 2-bit Gray map onto {-3, -1, 1, 3}.
    """
    key = str(kind).upper().replace("-", "")
    if key == "QPSK":
        idx = np.arange(4)
        re = 1.0 - 2.0 * (idx >> 1)
        im = 1.0 - 2.0 * (idx & 1)
        return Constellation("QPSK", (re + 1j * im) / np.sqrt(2.0))
    if key in ("QAM16", "16QAM"):
        idx = np.arange(16)
        re = _GRAY_PAM4[idx >> 2]
        im = _GRAY_PAM4[idx & 3]
        return Constellation("QAM16", (re + 1j * im) / np.sqrt(10.0))
    raise ConfigurationError(f"unsupported constellation kind {kind!r}; use QPSK or QAM16")


def _rrc_singular_limit(alpha: float, W: float) -> float:
    # value at t = +-1/(8 alpha W), obtained by L'Hopital on the 0/0 form
    phi = np.pi / (4.0 * alpha)
    return alpha * np.sqrt(W) * ((1 + 2 / np.pi) * np.sin(phi) + (1 - 2 / np.pi) * np.cos(phi))


def rrc_value(t, alpha: float, W: float = NYQUIST_BANDWIDTH, *, eps: float = 1e-9):
    """Root-raised-cosine pulse p(t), continuous through its removable singularities.

    Accepts a scalar or an array of times; returns the same shape.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha}")
    if W <= 0:
        raise ConfigurationError(f"W must be positive, got {W}")
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)

    at_zero = np.abs(t) < eps
    if alpha > 0:
        t_sing = 1.0 / (8.0 * alpha * W)
        at_sing = np.abs(np.abs(t) - t_sing) < eps
    else:
        at_sing = np.zeros_like(at_zero)
    regular = ~(at_zero | at_sing)

    tr = t[regular]
    x = 2.0 * np.pi * W * tr
    body = np.sin(x * (1.0 - alpha)) / x + (4.0 * alpha / np.pi) * np.cos(x * (1.0 + alpha))
    out[regular] = np.sqrt(2.0 * W) * body / (1.0 - (8.0 * alpha * W * tr) ** 2)
    out[at_zero] = np.sqrt(2.0 * W) * (1.0 - alpha + 4.0 * alpha / np.pi)
    if at_sing.any():
        out[at_sing] = _rrc_singular_limit(alpha, W)
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class PulseShape:
    """Sampled causal RRC: ``taps[n] = scale * p(n/osf - D)`` for n = 0..2*D*osf."""

    alpha: float
    D: int
    osf: int
    taps: np.ndarray
    scale: float

    T = SYMBOL_PERIOD
    W = NYQUIST_BANDWIDTH

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.taps)) / self.osf

    @property
    def span(self) -> int:
        """Filter length in symbol periods (2D)."""
        return 2 * self.D


def build_pulse(alpha: float, D: int, osf: int) -> PulseShape:
    """Sample the delayed, truncated RRC on a left-aligned grid and normalize to unit energy."""
    if int(D) != D or D < 1:
        raise ConfigurationError(f"D must be a positive integer, got {D}")
    if int(osf) != osf or osf < 2:
        raise ConfigurationError(f"osf must be an integer >= 2, got {osf}")
    D, osf = int(D), int(osf)
    n = np.arange(2 * D * osf + 1)
    # offsets from the centre are computed as integers so symmetric taps are exact
    raw = rrc_value((n - D * osf) / osf, alpha)
    scale = 1.0 / np.sqrt(np.sum(raw**2))
    taps = raw * scale
    taps.setflags(write=False)
    return PulseShape(float(alpha), D, osf, taps, float(scale))
