"""Trellis coded quantization (TCQ) limited feedback for massive MISO downlinks.

Differential TCQ tracks temporally correlated channels by re-centring and
shrinking the PSK source constellation at every trellis stage; spatially
correlated channels are quantized directly with a fixed ``1/sqrt(M)`` scale.
"""

from ._backend import BACKEND
from .channels import (
    GaussMarkovProcess,
    SpatialModel,
    exp_correlation_matrix,
    gauss_markov_step,
    load_channel_trace,
    save_channel_trace,
    spatial_channel,
    temporal_coefficient,
)
from .constellation import (
    differential_scale,
    initial_scale,
    psk_points,
    spatial_scale,
    stage_constellations,
    transform_point,
)
from .errors import ConfigError, ContractError, DegenerateGeometryError, TcqError, TraceFormatError
from .precoding import beamforming_gain, mf_precoders, sinr_per_user, spectral_efficiency, zf_precoders
from .quantizer import (
    DifferentialSession,
    QuantizationResult,
    normalize_cdi,
    quantize_memoryless,
    quantize_spatial,
    reconstruct,
    session_bs_step,
    session_user_step,
    viterbi_quantize,
)
from .trellis import Trellis, build_8psk_trellis, build_qpsk_trellis, conv_encode, transitions

__version__ = "0.1.0"
