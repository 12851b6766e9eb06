"""Precoded turbo equalization over impulsive power-line channels."""

__version__ = "0.1.0"

from .channel import (
    DiscreteChannel,
    MultipathParams,
    PulseShape,
    default_time_grid,
    discretize,
    equivalent_impulse_response,
    frequency_response,
    raised_cosine_impulse,
    synthesize_discrete_channel,
    vvf_4path_params,
)
from .errors import (
    ComplexityError,
    ConfigError,
    DegenerateChannelError,
    NumericalDegeneracyError,
    ResolutionError,
)
from .exit_chart import (
    ExitCurve,
    MixtureMi,
    TunnelReport,
    generate_apriori,
    inner_exit_curve,
    j_function,
    j_inverse,
    mi_histogram,
    mi_mixture,
    outer_exit_curve,
    tunnel_check,
)
from .noise import (
    MixtureNoiseParams,
    derive_seed,
    effective_variance,
    pdf,
    sample,
    sample_labeled,
    snr_to_params,
)
from .siso import (
    LLR_CLAMP,
    GaussianMetric,
    MixtureMetric,
    bcjr_decode,
    branch_metric,
    decode_outer,
)
from .system import (
    FrameResult,
    Interleaver,
    SystemConfig,
    TurboSystem,
    receive,
    run_frame,
    transmit,
)
from .trellis import (
    BinaryPolynomial,
    Trellis,
    bit_to_symbol,
    build_isi_trellis,
    build_precoded_isi_trellis,
    build_precoder,
    build_rsc_trellis,
    channel_output,
    deprecode,
    encode_rsc,
    precode,
)
