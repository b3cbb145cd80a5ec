"""Trellis pruning for PAPR reduction of Nyquist-filtered QPSK and 16-QAM."""

__version__ = "0.1.0"

from .capacity import (CapacityEstimate, RetentionRatio, estimate_capacity_full,
                       estimate_lower_bound, high_snr_limit, retention_ratio)
from .decoder import (AppVector, ObservationBlock, edge_log_likelihood, forward_app,
                      full_dfa_bcjr)
from .errors import ConfigurationError, InfeasibleError, NumericError, ResourceError
from .pruning import PruneSet, remap, select_prune_set, stationary_distribution
from .simulate import (ChannelParams, PaprEstimate, Signal, add_awgn, calibrate_es, encode,
                       measure_papr)
from .trellis import (EdgeMetrics, TrellisModel, build_trellis, compute_edge_metrics,
                      edge_waveform, next_state)
from .waveform import Constellation, PulseShape, build_constellation, build_pulse, rrc_value
