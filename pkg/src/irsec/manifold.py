"""Geometry kernel for the product of the complex unit sphere and circle torus.

Points pair a unit-norm precoder block with a unit-modulus phase block.  The
metric is the direct sum of the real parts of the blockwise Hermitian inner
products; tangent projection, normalization retraction, and a backtracking
line search are provided for any smooth objective on the product manifold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

FEAS_TOL = 1e-12


class DegenerateRetractionError(RuntimeError):
    """A retraction candidate collapsed to zero and cannot be normalized."""


@dataclass(frozen=True)
class ManifoldPoint:
    """Feasible iterate: ``x`` on the unit sphere, ``theta`` on the torus."""

    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=complex)
        theta = np.asarray(self.theta, dtype=complex)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "theta", theta)
        if abs(np.linalg.norm(x) - 1.0) > FEAS_TOL:
            raise ValueError("sphere block must have unit norm")
        if theta.size and np.max(np.abs(np.abs(theta) - 1.0)) > FEAS_TOL:
            raise ValueError("circle block must be unit modulus")


@dataclass(frozen=True)
class TangentVector:
    """Direction attached to some base point; blocks mirror ManifoldPoint."""

    dx: np.ndarray
    dtheta: np.ndarray

    def norm_sq(self) -> float:
        return float(
            np.real(np.vdot(self.dx, self.dx)) + np.real(np.vdot(self.dtheta, self.dtheta))
        )

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))


def project_tangent(
    point: ManifoldPoint, ambient: tuple[np.ndarray, np.ndarray]
) -> TangentVector:
    """Metric projection of an ambient pair onto the tangent space at ``point``.

    Sphere block: remove the radial component ``Re{v^H x} x``.  Circle block:
    remove, per element, the component along ``theta_n``.
    """
    v, w = ambient
    dx = v - np.real(np.vdot(v, point.x)) * point.x
    dtheta = w - np.real(np.conj(w) * point.theta) * point.theta
    return TangentVector(dx, dtheta)


def tangency_error(point: ManifoldPoint, tv: TangentVector) -> float:
    """Largest violation of the tangent-space conditions at ``point``."""
    sphere = abs(float(np.real(np.vdot(tv.dx, point.x))))
    circle = (
        float(np.max(np.abs(np.real(np.conj(tv.dtheta) * point.theta))))
        if point.theta.size
        else 0.0
    )
    return max(sphere, circle)


def retract(point: ManifoldPoint, step: TangentVector, alpha: float) -> ManifoldPoint:
    """Move ``-alpha * step`` in the ambient space and renormalize per block."""
    if alpha < 0:
        raise ValueError("step size must be >= 0")
    cand_x = point.x - alpha * step.dx
    cand_theta = point.theta - alpha * step.dtheta
    nx = np.linalg.norm(cand_x)
    if nx == 0.0:
        raise DegenerateRetractionError("sphere candidate collapsed to zero")
    mags = np.abs(cand_theta)
    if cand_theta.size and np.min(mags) == 0.0:
        raise DegenerateRetractionError("circle candidate entry collapsed to zero")
    return ManifoldPoint(cand_x / nx, cand_theta / mags if cand_theta.size else cand_theta)


class ArmijoResult(NamedTuple):
    alpha: float
    point: ManifoldPoint
    value: float
    stalled: bool


def armijo_search(
    objective: Callable[[ManifoldPoint], float],
    point: ManifoldPoint,
    grad: TangentVector,
    alpha0: float = 1.0,
    contraction: float = 0.5,
    max_backtracks: int = 50,
    f0: float | None = None,
) -> ArmijoResult:
    """Backtracking line search along the negative gradient.

    Accepts the first ``alpha = alpha0 * contraction^k`` whose retracted point
    satisfies ``f(new) - f(point) <= -alpha/2 * ||grad||^2``.  When all
    backtracks fail the point is returned unchanged with ``alpha = 0`` and the
    stall flag set.
    """
    if alpha0 <= 0:
        raise ValueError("initial step must be positive")
    if not 0.0 < contraction < 1.0:
        raise ValueError("contraction must lie in (0, 1)")
    if f0 is None:
        f0 = objective(point)
    gn2 = grad.norm_sq()
    alpha = alpha0
    for _ in range(max_backtracks + 1):
        try:
            candidate = retract(point, grad, alpha)
        except DegenerateRetractionError:
            alpha *= contraction
            continue
        f_new = objective(candidate)
        if f_new - f0 <= -0.5 * alpha * gn2:
            return ArmijoResult(alpha, candidate, f_new, False)
        alpha *= contraction
    return ArmijoResult(0.0, point, f0, True)
