"""Secrecy-rate maximization for IRS-assisted downlinks with one-bit DACs.

Two solvers jointly pick the one-bit precoder and the IRS phase shifts: a
weighted-MMSE block-coordinate method wrapped in a penalty dual scheme
(``wmmse_pdd``) and a smoothed exact-penalty gradient descent on the product
manifold (``epprgd``).  Brute-force oracles, baselines, and a seeded
Monte-Carlo harness round out the package.
"""

from . import epprgd, experiments, manifold, oracle, wmmse_pdd
from .channel import (
    ChannelSet,
    SystemConfig,
    generate_channels,
    inject_csi_error,
    path_loss,
    rician_matrix,
    steering_vector,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .secrecy import (
    IrsPhases,
    OneBitPrecoder,
    alphabet_scale,
    composite_channel,
    one_bit_membership,
    quantize_one_bit,
    rate,
    secrecy_rate,
)
from .trace import SolverTrace

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "SystemConfig",
    "generate_channels",
    "inject_csi_error",
    "path_loss",
    "rician_matrix",
    "steering_vector",
    "IrsPhases",
    "OneBitPrecoder",
    "alphabet_scale",
    "composite_channel",
    "one_bit_membership",
    "quantize_one_bit",
    "rate",
    "secrecy_rate",
    "SolverTrace",
    "KERNEL_BACKEND",
    "epprgd",
    "experiments",
    "manifold",
    "oracle",
    "wmmse_pdd",
]
