"""One-bit transmit alphabet, composite channels, and the secrecy objective.

The transmit vector lives in the QPSK-like set ``{±a ± ja}^M`` with
``a = sqrt(1/(2M))``, so every feasible precoder has unit norm and constant
per-antenna envelope.  All solvers and oracles in this package score
candidates through the functions here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .channel import ChannelSet

#: Feasibility tolerance used by the validating containers.
FEAS_TOL = 1e-12


def alphabet_scale(m: int) -> float:
    """Per-axis amplitude ``a = sqrt(1/(2M))`` of the one-bit alphabet."""
    if m < 1:
        raise ValueError("alphabet needs at least one antenna")
    return float(np.sqrt(1.0 / (2.0 * m)))


@dataclass(frozen=True)
class OneBitPrecoder:
    """Validated one-bit transmit vector (every entry in ``{±a ± ja}``)."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=complex)
        object.__setattr__(self, "x", x)
        a = alphabet_scale(x.shape[0])
        if np.max(np.abs(np.abs(x.real) - a)) > FEAS_TOL or np.max(
            np.abs(np.abs(x.imag) - a)
        ) > FEAS_TOL:
            raise ValueError("entries are not on the one-bit alphabet")
        if abs(np.linalg.norm(x) - 1.0) > FEAS_TOL:
            raise ValueError("one-bit vector must have unit norm")

    def __len__(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class IrsPhases:
    """Validated unit-modulus IRS reflection coefficients."""

    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=complex)
        object.__setattr__(self, "theta", theta)
        if theta.size and np.max(np.abs(np.abs(theta) - 1.0)) > FEAS_TOL:
            raise ValueError("IRS phases must be unit modulus")

    def __len__(self) -> int:
        return self.theta.shape[0]


def _as_array(v: Union[np.ndarray, OneBitPrecoder, IrsPhases]) -> np.ndarray:
    if isinstance(v, OneBitPrecoder):
        return v.x
    if isinstance(v, IrsPhases):
        return v.theta
    return np.asarray(v)


def quantize_one_bit(s: Union[np.ndarray, OneBitPrecoder]) -> OneBitPrecoder:
    """Element-wise one-bit quantization of real and imaginary parts.

    Zero maps to the positive side on both axes, making the quantizer
    deterministic everywhere.
    """
    s = _as_array(s)
    a = alphabet_scale(s.shape[0])
    re = np.where(s.real >= 0, a, -a)
    im = np.where(s.imag >= 0, a, -a)
    return OneBitPrecoder(re + 1j * im)


def composite_channel(
    h_direct: np.ndarray,
    h_irs_rx: np.ndarray,
    h_ai: np.ndarray,
    theta: Union[np.ndarray, IrsPhases],
) -> np.ndarray:
    """Effective channel ``h_irs_rx @ diag(theta) @ h_ai + h_direct``."""
    theta = _as_array(theta)
    if h_irs_rx.shape[1] != theta.shape[0] or h_ai.shape[0] != theta.shape[0]:
        raise ValueError(
            f"IRS sizes disagree: {h_irs_rx.shape} / diag({theta.shape[0]}) / {h_ai.shape}"
        )
    if theta.shape[0] == 0:
        return h_direct.copy()
    return h_irs_rx @ (theta[:, None] * h_ai) + h_direct


def effective_channels(
    channels: ChannelSet, theta: Union[np.ndarray, IrsPhases]
) -> tuple[np.ndarray, np.ndarray]:
    """Bob's and Eve's noise-scaled effective channels for given phases."""
    h_b = composite_channel(channels.h_ab, channels.h_ib, channels.h_ai, theta)
    h_e = composite_channel(channels.h_ae, channels.h_ie, channels.h_ai, theta)
    return h_b, h_e


def rate(h_eff: np.ndarray, x: Union[np.ndarray, OneBitPrecoder]) -> float:
    """Achievable rate ``log2(1 + ||h_eff @ x||^2)`` in bits."""
    y = h_eff @ _as_array(x)
    return float(np.log2(1.0 + np.real(np.vdot(y, y))))


def secrecy_rate(
    channels: ChannelSet,
    x: Union[np.ndarray, OneBitPrecoder],
    theta: Union[np.ndarray, IrsPhases],
) -> float:
    """Clamped rate difference ``max(0, R_bob - R_eve)`` in bits."""
    h_b, h_e = effective_channels(channels, theta)
    return max(0.0, rate(h_b, x) - rate(h_e, x))


class Membership(NamedTuple):
    ok: bool
    violation: float


def one_bit_membership(x: Union[np.ndarray, OneBitPrecoder], tol: float = 1e-9) -> Membership:
    """Continuous test for alphabet membership.

    A vector is in the alphabet iff its norm is one and both real and
    imaginary parts of every entry lie within ``[-a, a]``; the returned
    violation is the largest breach of those constraints (0 when feasible).
    """
    x = _as_array(x)
    a = alphabet_scale(x.shape[0])
    norm_violation = abs(float(np.real(np.vdot(x, x))) - 1.0)
    box_violation = max(
        float(np.max(np.abs(x.real)) - a),
        float(np.max(np.abs(x.imag)) - a),
        0.0,
    )
    violation = max(norm_violation, box_violation)
    return Membership(violation <= tol, violation)
