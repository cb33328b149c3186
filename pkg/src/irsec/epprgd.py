"""Time-efficient solver: smoothed exact penalty + manifold gradient descent.

The box constraints on the precoder are moved into the objective as hinge
penalties, smoothed with the log-sum-exp upper bound so the whole cost is
differentiable.  What remains is an unconstrained problem on the product of
the complex unit sphere and the circle torus, solved by projected-gradient
descent with an Armijo backtracking step.  The outer loop grows the penalty
weight while any box residual exceeds the violation threshold and keeps
shrinking the smoothing parameter, stopping once the residuals are within
threshold and the smoothing has bottomed out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import ChannelSet, complex_gaussian
from .manifold import ManifoldPoint, TangentVector, armijo_search, project_tangent
from .secrecy import (
    IrsPhases,
    OneBitPrecoder,
    alphabet_scale,
    one_bit_membership,
    quantize_one_bit,
    secrecy_rate,
)
from .trace import ArmijoRecord, SolverTrace


@dataclass(frozen=True)
class EpprgdSettings:
    """Penalty growth, smoothing decay, and iteration caps.

    The initial penalty weight is deliberately small: while the box walls are
    weak the objective is free to move the precoder across quadrants, and the
    growth factor hardens them only once the inner solves stop violating the
    threshold.  The line search warm-starts each trial step at twice the
    previously accepted step (``alpha0`` seeds the first iteration), which
    cuts the backtracking cost by an order of magnitude.

    ``max_inner = 0`` resolves at run time to ``max(1000, 12 * (M + N_i))``:
    gradient descent needs an iteration budget that grows with the variable
    count.
    """

    rho_r0: float = 0.1
    c_r: float = 5.0
    tau: float = 1e-5
    u0: float = 0.1
    u_min: float = 1e-6
    eps_r0: float = 1e-6
    max_inner: int = 0
    max_outer: int = 15
    alpha0: float = 1.0
    contraction: float = 0.5
    max_backtracks: int = 60
    alpha_cap: float = 1e3

    def inner_cap(self, dim: int) -> int:
        if self.max_inner > 0:
            return self.max_inner
        return max(1000, 12 * dim)

    def __post_init__(self) -> None:
        if self.c_r <= 1.0:
            raise ValueError("penalty growth factor must exceed 1")
        if not 0.0 < self.u_min < self.u0:
            raise ValueError("smoothing floor must satisfy 0 < u_min < u0")
        if self.rho_r0 <= 0 or self.tau <= 0 or self.eps_r0 <= 0:
            raise ValueError("penalty, threshold, and tolerance must be positive")


def penalty_terms(x: np.ndarray) -> np.ndarray:
    """The 4M signed box residuals of a precoder candidate.

    Grouped per entry as (re - a, im - a, -re - a, -im - a); all residuals
    are <= 0 exactly on the box, and their maximum is 0 exactly on the
    one-bit alphabet once the unit-norm constraint holds.
    """
    x = np.asarray(getattr(x, "x", x), dtype=complex)
    return kernels.box_residuals(x, alphabet_scale(x.shape[0]))


@dataclass
class SmoothedObjective:
    """Secrecy log-ratio plus smoothed box penalty at fixed weights.

    ``rho_r`` scales the penalty, ``u`` the log-sum-exp smoothing; the value
    tends to the exact-penalty cost as ``u -> 0``.
    """

    channels: ChannelSet
    rho_r: float
    u: float

    def __post_init__(self) -> None:
        if self.rho_r <= 0 or self.u <= 0:
            raise ValueError("penalty and smoothing parameters must be positive")

    def _receive(self, point: ManifoldPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ch = self.channels
        s = ch.h_ai @ point.x
        ts = point.theta * s
        bx = ch.h_ib @ ts + ch.h_ab @ point.x
        ex = ch.h_ie @ ts + ch.h_ae @ point.x
        return s, bx, ex

    def log_ratio(self, point: ManifoldPoint) -> float:
        """Eve-over-Bob log ratio (natural log): the unpenalized cost."""
        _, bx, ex = self._receive(point)
        num = 1.0 + float(np.real(np.vdot(ex, ex)))
        den = 1.0 + float(np.real(np.vdot(bx, bx)))
        return float(np.log(num / den))

    def value(self, point: ManifoldPoint) -> float:
        a = alphabet_scale(point.x.shape[0])
        return self.log_ratio(point) + self.rho_r * kernels.smoothed_box_penalty(
            point.x, a, self.u
        )

    def euclidean_gradient(self, point: ManifoldPoint) -> tuple[np.ndarray, np.ndarray]:
        """Ambient gradient pair under the ``Re{<grad, d>}`` convention."""
        ch = self.channels
        s, bx, ex = self._receive(point)
        qb = 1.0 / (1.0 + float(np.real(np.vdot(bx, bx))))
        qe = 1.0 / (1.0 + float(np.real(np.vdot(ex, ex))))
        ub = qb * (ch.h_ib.conj().T @ bx)
        ue = qe * (ch.h_ie.conj().T @ ex)
        diff = ue - ub
        gx = 2.0 * (
            ch.h_ai.conj().T @ (point.theta.conj() * diff)
            + qe * (ch.h_ae.conj().T @ ex)
            - qb * (ch.h_ab.conj().T @ bx)
        )
        a = alphabet_scale(point.x.shape[0])
        gx = gx + self.rho_r * kernels.smoothed_box_penalty_grad(point.x, a, self.u)
        gtheta = 2.0 * np.conj(s) * diff
        return gx, gtheta

    def riemannian_gradient(self, point: ManifoldPoint) -> TangentVector:
        return project_tangent(point, self.euclidean_gradient(point))


def smoothed_value(obj: SmoothedObjective, point: ManifoldPoint) -> float:
    return obj.value(point)


def euclidean_gradient(
    obj: SmoothedObjective, point: ManifoldPoint
) -> tuple[np.ndarray, np.ndarray]:
    return obj.euclidean_gradient(point)


def riemannian_gradient(obj: SmoothedObjective, point: ManifoldPoint) -> TangentVector:
    return obj.riemannian_gradient(point)


def exact_penalty(x: np.ndarray) -> float:
    """Unsmoothed hinge penalty ``sum max(0, residual)`` of the box terms."""
    return float(np.sum(np.maximum(penalty_terms(x), 0.0)))


def default_init(channels: ChannelSet, rng: np.random.Generator) -> ManifoldPoint:
    """Feasible start: quantized Gaussian precoder and random phases."""
    x0 = quantize_one_bit(complex_gaussian((channels.m,), rng)).x
    theta0 = np.exp(2j * np.pi * rng.random(channels.n_i))
    return ManifoldPoint(x0, theta0)


def prgd_inner(
    obj: SmoothedObjective,
    point: ManifoldPoint,
    eps_r: float,
    settings: EpprgdSettings,
    record: bool = True,
    armijo_log: list[ArmijoRecord] | None = None,
) -> tuple[ManifoldPoint, SolverTrace]:
    """Gradient steps with Armijo backtracking until the decrease stalls.

    The trace objective is non-increasing by the line-search acceptance rule;
    a vanishing gradient or an exhausted backtracking budget ends the loop.
    """
    if eps_r <= 0:
        raise ValueError("inner tolerance must be positive")
    trace = SolverTrace(solver="prgd_inner")
    start = time.perf_counter()
    cap = settings.inner_cap(point.x.shape[0] + point.theta.shape[0])
    g_old = obj.value(point)
    alpha_prev = 0.5 * settings.alpha0  # first trial step is exactly alpha0
    for k in range(1, cap + 1):
        grad = obj.riemannian_gradient(point)
        if grad.norm() <= 1e-12:
            trace.converged = True
            break
        result = armijo_search(
            obj.value,
            point,
            grad,
            alpha0=min(2.0 * alpha_prev, settings.alpha_cap),
            contraction=settings.contraction,
            max_backtracks=settings.max_backtracks,
            f0=g_old,
        )
        if result.stalled:
            trace.stalled = True
            break
        point = result.point
        g_new = result.value
        alpha_prev = result.alpha
        trace.inner_iterations = k
        if armijo_log is not None:
            armijo_log.append(
                ArmijoRecord(g_old, g_new, result.alpha, grad.norm_sq())
            )
        if record:
            channels = getattr(obj, "channels", None)
            trace.append(
                k,
                g_new,
                float(np.max(penalty_terms(point.x))),
                secrecy_rate(channels, quantize_one_bit(point.x).x, point.theta)
                if channels is not None
                else float("nan"),
                time.perf_counter() - start,
            )
        if abs(g_old - g_new) <= eps_r * max(abs(g_old), 1e-300):
            g_old = g_new
            trace.converged = True
            break
        g_old = g_new
    return point, trace


def solve(
    channels: ChannelSet,
    settings: EpprgdSettings | None = None,
    init: ManifoldPoint | None = None,
    init_seed: int = 0,
) -> tuple[OneBitPrecoder, IrsPhases, SolverTrace]:
    """Run the penalty/smoothing schedule and return the snapped pair.

    Terminates once the largest box residual is within ``tau`` and the
    smoothing parameter has dropped to ``u_min``; hitting the outer cap first
    returns the current pair with ``converged=False``.
    """
    settings = settings or EpprgdSettings()
    if init is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(init_seed)))
        point = default_init(channels, rng)
    else:
        point = init

    trace = SolverTrace(solver="epprgd")
    start = time.perf_counter()
    rho_r = settings.rho_r0
    u = settings.u0
    eps_r = settings.eps_r0
    for outer in range(1, settings.max_outer + 1):
        obj = SmoothedObjective(channels, rho_r, u)
        point, inner = prgd_inner(
            obj,
            point,
            eps_r,
            settings,
            record=False,
            armijo_log=trace.armijo_records,
        )
        trace.inner_iterations += inner.inner_iterations
        error_r = float(np.max(penalty_terms(point.x)))
        if error_r > settings.tau:
            rho_r *= settings.c_r
        u *= 0.2
        eps_r *= 0.1
        trace.append(
            outer,
            obj.log_ratio(point),
            error_r,
            secrecy_rate(channels, quantize_one_bit(point.x).x, point.theta),
            time.perf_counter() - start,
        )
        trace.final_smoothing = u
        if error_r <= settings.tau and u <= settings.u_min:
            trace.converged = True
            break

    trace.snap_violation = one_bit_membership(point.x).violation
    return (
        quantize_one_bit(point.x),
        IrsPhases(point.theta),
        trace,
    )
