"""Quantizers of a channel output that keep as much information about the input as possible."""

from .core import (
    AbsoluteContinuityError,
    JointDistribution,
    Pmf,
    Posterior,
    Quantizer,
    apply_quantizer,
    binary_entropy,
    conditional_entropy,
    entropy,
    inv_binary_entropy,
    kl_divergence,
    log_loss_distortion,
    mutual_information,
    posterior,
    quantized_mi,
)
from .exact import (
    GuardError,
    Method,
    OptResult,
    binary_dp_values,
    brute_force_divergence_quantizer,
    brute_force_quantizer,
    merge_equal_posteriors,
    optimal_binary_quantizer,
)
from .construct import (
    GeometricPlan,
    OneHotPlan,
    double_quantize,
    geometric_quantizer,
    greedy_top_quantizer,
    map_quantizer,
    one_hot_quantizer,
    quantizer_entropy,
    randomized_map_mi,
)

__version__ = "0.1.0"
