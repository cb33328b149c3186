"""Performance-focused solver: weighted-MMSE surrogate + penalty dual method.

The log-ratio secrecy objective is rewritten with auxiliary MMSE weights and
a receive filter so that every variable block has a closed-form minimizer.
Copies ``t`` (of the precoder) and ``phi`` (of the phases) carry the box and
unit-modulus constraints; an augmented Lagrangian couples them to the
originals.  The inner loop cycles the six block updates to a fixed tolerance,
the outer loop either refines the dual variables (when the copies nearly
agree) or shrinks the penalty parameter, until the maximum constraint
violation falls below the stopping threshold.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import ChannelSet, complex_gaussian
from .secrecy import (
    IrsPhases,
    OneBitPrecoder,
    alphabet_scale,
    effective_channels,
    one_bit_membership,
    quantize_one_bit,
    secrecy_rate,
)
from .trace import SolverTrace


class DegenerateSubproblemError(RuntimeError):
    """A block subproblem lost its unique minimizer (zero right-hand side)."""


@dataclass(frozen=True)
class PddSettings:
    """Penalty schedule and iteration caps for the double loop."""

    rho0: float = 1.0
    c: float = 0.6
    eta0: float = 1.0
    eta_min: float = 1e-5
    eps0: float = 1e-3
    max_inner: int = 500
    max_outer: int = 30

    def __post_init__(self) -> None:
        if not 0.0 < self.c < 1.0:
            raise ValueError("penalty shrink factor must lie in (0, 1)")
        if self.eta_min <= 0 or self.eps0 <= 0 or self.rho0 <= 0:
            raise ValueError("thresholds and initial penalty must be positive")


@dataclass
class PddState:
    """Full variable set of the split problem plus duals and penalty."""

    w_b: float
    w_e: float
    v: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    t: np.ndarray
    phi: np.ndarray
    dual_t: np.ndarray
    dual_phi: np.ndarray
    rho: float

    def copy(self) -> "PddState":
        return PddState(
            self.w_b,
            self.w_e,
            self.v.copy(),
            self.x.copy(),
            self.theta.copy(),
            self.t.copy(),
            self.phi.copy(),
            self.dual_t.copy(),
            self.dual_phi.copy(),
            self.rho,
        )

    def feasibility_error(self) -> float:
        """Largest violation of the state invariants (weights, norms, box)."""
        a = alphabet_scale(self.x.shape[0])
        err = max(
            abs(float(np.linalg.norm(self.x)) - 1.0),
            float(np.max(np.abs(np.abs(self.phi) - 1.0))) if self.phi.size else 0.0,
            float(np.max(np.abs(self.t.real)) - a),
            float(np.max(np.abs(self.t.imag)) - a),
        )
        if self.w_b <= 0 or self.w_e <= 0:
            err = max(err, float("inf"))
        return err


def default_init(
    channels: ChannelSet, rho: float, rng: np.random.Generator
) -> PddState:
    """Feasible start: quantized Gaussian precoder, random phases, zero duals."""
    m = channels.m
    n_i = channels.n_i
    n_b = channels.h_ab.shape[0]
    x0 = quantize_one_bit(complex_gaussian((m,), rng)).x
    theta0 = np.exp(2j * np.pi * rng.random(n_i))
    return PddState(
        w_b=1.0,
        w_e=1.0,
        v=np.zeros(n_b, dtype=complex),
        x=x0,
        theta=theta0,
        t=x0.copy(),
        phi=theta0.copy(),
        dual_t=np.zeros(m, dtype=complex),
        dual_phi=np.zeros(n_i, dtype=complex),
        rho=rho,
    )


# ---------------------------------------------------------------------------
# objective


def _mse(state: PddState, h_b: np.ndarray) -> float:
    e = 1.0 - np.vdot(state.v, h_b @ state.x)
    return float(np.abs(e) ** 2 + np.real(np.vdot(state.v, state.v)))


def _objective_f(state: PddState, h_b: np.ndarray, h_e: np.ndarray) -> float:
    ex = h_e @ state.x
    return float(
        state.w_b * _mse(state, h_b)
        - np.log(state.w_b)
        + state.w_e * (1.0 + np.real(np.vdot(ex, ex)))
        - np.log(state.w_e)
    )


def _lagrangian(state: PddState, h_b: np.ndarray, h_e: np.ndarray) -> float:
    pen_t = state.t - state.x + state.rho * state.dual_t
    pen_phi = state.phi - state.theta + state.rho * state.dual_phi
    return _objective_f(state, h_b, h_e) + (
        np.real(np.vdot(pen_t, pen_t)) + np.real(np.vdot(pen_phi, pen_phi))
    ) / (2.0 * state.rho)


def augmented_lagrangian(state: PddState, channels: ChannelSet) -> float:
    """Objective plus scaled penalties on the two consensus splits."""
    if state.rho <= 0:
        raise ValueError("penalty parameter must be positive")
    h_b, h_e = effective_channels(channels, state.theta)
    return _lagrangian(state, h_b, h_e)


# ---------------------------------------------------------------------------
# block updates


def _update_w(state: PddState, h_b: np.ndarray, h_e: np.ndarray) -> tuple[float, float]:
    ex = h_e @ state.x
    e_b = max(_mse(state, h_b), 1e-300)
    return 1.0 / e_b, 1.0 / (1.0 + float(np.real(np.vdot(ex, ex))))


def _update_v(state: PddState, h_b: np.ndarray) -> np.ndarray:
    bx = h_b @ state.x
    return bx / (1.0 + np.real(np.vdot(bx, bx)))


def sphere_quadratic_min(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Global minimizer of ``x^H A x - 2 Re{b^H x}`` on the unit sphere.

    ``A`` must be Hermitian PSD.  Returns the minimizer and the multiplier
    ``lam`` of the stationarity system ``(A + lam I) x = b``; ``lam`` is the
    unique root of ``||x(lam)|| = 1`` above ``-mu_min``, located by bisection.
    The rank-deficient corner case (right-hand side orthogonal to the bottom
    eigenspace with interior norm below one) is completed with a bottom-space
    component of the right length.
    """
    if not np.any(b):
        raise DegenerateSubproblemError("zero right-hand side in sphere subproblem")
    mu, u_mat = np.linalg.eigh(A)
    mu = np.maximum(mu, 0.0)
    c = u_mat.conj().T @ b
    csq = np.abs(c) ** 2
    mu_min = float(mu[0])
    scale = max(1.0, float(mu[-1]))
    bottom = (mu - mu_min) <= 1e-12 * scale
    overlap = float(np.sum(csq[bottom]))

    if overlap <= 1e-24 * float(np.sum(csq)):
        # No pull along the bottom eigenspace: check for the interior corner case.
        den = mu[~bottom] - mu_min
        interior = float(np.sum(csq[~bottom] / den**2)) if np.any(~bottom) else 0.0
        if interior < 1.0:
            x = u_mat[:, ~bottom] @ (c[~bottom] / den) if np.any(~bottom) else 0.0
            x = x + np.sqrt(1.0 - interior) * u_mat[:, 0]
            return x, -mu_min

    # Denominators are mu + lam; the kernel solves for den = mu + 1 + lam_k.
    lam_k = kernels.unit_norm_shift_root(mu, csq, 0.5, -mu_min - 1.0)
    lam = lam_k + 1.0
    return u_mat @ (c / (mu + lam)), lam


def _sphere_min_factor(
    factor: np.ndarray, rhs: np.ndarray, rho: float
) -> tuple[np.ndarray, float]:
    """Unit-norm solution of ``(2*rho*A + (1+2*rho*lam) I) x = rhs``, ``A = factor^H factor``.

    Works in the row space of ``factor`` (a handful of rows), so the cost is
    linear in the vector length instead of cubic.  Equivalent to
    ``sphere_quadratic_min(A, rhs/(2*rho))`` with ``lam`` in the shifted
    parametrization of the stationarity system above.
    """
    m = rhs.shape[0]
    if not np.any(rhs):
        raise DegenerateSubproblemError("zero right-hand side in sphere subproblem")
    gram = factor @ factor.conj().T
    nu, w_mat = np.linalg.eigh(gram)
    np.maximum(nu, 0.0, out=nu)
    top = float(nu[-1]) if nu.size else 0.0
    keep = nu > 1e-14 * max(top, 1e-300)
    nu_k = nu[keep]
    k = nu_k.size
    if k:
        u_mat = factor.conj().T @ (w_mat[:, keep] / np.sqrt(nu_k)[None, :])
        c = u_mat.conj().T @ rhs
        csq = c.real**2 + c.imag**2
    else:
        u_mat = np.zeros((m, 0), dtype=complex)
        c = np.zeros(0, dtype=complex)
        csq = np.zeros(0)
    total = float(np.real(np.vdot(rhs, rhs)))

    has_null = k < m
    n_terms = k + 1 if has_null else k
    mu = np.zeros(n_terms)
    csqv = np.empty(n_terms)
    mu[:k] = nu_k
    csqv[:k] = csq
    if has_null:
        csqv[k] = max(total - float(np.sum(csq)), 0.0)
        mu_min = 0.0
    else:
        mu_min = float(nu_k[0])

    bottom = (mu - mu_min) <= 1e-12 * max(1.0, top)
    overlap = float(np.sum(csqv[bottom]))
    if overlap <= 1e-24 * total:
        den0 = 2.0 * rho * (mu[~bottom] - mu_min)
        interior = float(np.sum(csqv[~bottom] / den0**2)) if np.any(~bottom) else 0.0
        if interior < 1.0:
            lam = -(1.0 + 2.0 * rho * mu_min) / (2.0 * rho)
            kept_bottom = bottom[:k]
            x = np.zeros(m, dtype=complex)
            if np.any(~kept_bottom):
                x = u_mat[:, ~kept_bottom] @ (
                    c[~kept_bottom] / (2.0 * rho * (nu_k[~kept_bottom] - mu_min))
                )
            x = x + np.sqrt(1.0 - interior) * _bottom_direction(
                u_mat, kept_bottom, has_null, m
            )
            return x, lam

    lo = -(1.0 + 2.0 * rho * mu_min) / (2.0 * rho)
    lam = kernels.unit_norm_shift_root(mu, csqv, rho, lo)
    if not k:
        return rhs / (1.0 + 2.0 * rho * lam), lam
    den_k = 2.0 * rho * nu_k + 1.0 + 2.0 * rho * lam
    if has_null:
        c0 = 1.0 + 2.0 * rho * lam
        return rhs / c0 + u_mat @ (c / den_k - c / c0), lam
    return u_mat @ (c / den_k), lam


def _bottom_direction(
    u_mat: np.ndarray, kept_bottom: np.ndarray, has_null: bool, m: int
) -> np.ndarray:
    """A deterministic unit vector in the bottom eigenspace."""
    if not has_null:
        return u_mat[:, kept_bottom][:, 0]
    span = u_mat[:, ~kept_bottom] if u_mat.size else np.zeros((m, 0), complex)
    # Basis vector least represented in the row space, orthogonalized.
    proj = np.sum(np.abs(span) ** 2, axis=1) if span.size else np.zeros(m)
    k = int(np.argmin(proj))
    v = np.zeros(m, dtype=complex)
    v[k] = 1.0
    if span.size:
        v = v - span @ (span.conj().T @ v)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise DegenerateSubproblemError("failed to complete the bottom eigenspace")
    return v / nv


def _x_factor(state: PddState, h_b: np.ndarray, h_e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Low-rank factor of the precoder quadratic form, and its linear term."""
    hv = h_b.conj().T @ state.v
    factor = np.empty((1 + h_e.shape[0], h_e.shape[1]), dtype=complex)
    np.multiply(np.sqrt(state.w_b), hv.conj(), out=factor[0])
    np.multiply(np.sqrt(state.w_e), h_e, out=factor[1:])
    return factor, state.w_b * hv


def _update_x(
    state: PddState, h_b: np.ndarray, h_e: np.ndarray, relax_box: bool
) -> np.ndarray:
    factor, b = _x_factor(state, h_b, h_e)
    if relax_box:
        # No proximal pull: (A + lam_t I) x = b, recovered with rho = 1/2.
        x, _ = _sphere_min_factor(factor, b, 0.5)
        return x
    rhs = state.t + state.rho * state.dual_t + 2.0 * state.rho * b
    if not np.any(rhs):
        raise DegenerateSubproblemError("zero right-hand side in precoder update")
    x, _ = _sphere_min_factor(factor, rhs, state.rho)
    return x


def _theta_terms(
    state: PddState, channels: ChannelSet
) -> tuple[np.ndarray, np.ndarray]:
    """Low-rank factor of the phase quadratic form, and the linear term."""
    s = channels.h_ai @ state.x
    r = channels.h_ib.conj().T @ state.v
    factor = np.empty((1 + channels.h_ie.shape[0], s.shape[0]), dtype=complex)
    np.multiply(np.sqrt(state.w_b) * r.conj(), s, out=factor[0])
    np.multiply(np.sqrt(state.w_e) * channels.h_ie, s[None, :], out=factor[1:])
    alpha = np.vdot(state.v, channels.h_ab @ state.x)
    z = channels.h_ae @ state.x
    sr = s * np.conj(r)
    d = (
        state.w_b * np.conj(alpha) * sr
        + state.w_e * s * np.conj(channels.h_ie.conj().T @ z)
        - state.w_b * sr
    )
    return factor, d


def _update_theta(state: PddState, channels: ChannelSet) -> np.ndarray:
    n_i = state.theta.shape[0]
    if n_i == 0:
        return state.theta.copy()
    factor, d = _theta_terms(state, channels)
    rhs = state.phi + state.rho * state.dual_phi - 2.0 * state.rho * np.conj(d)
    # Solve (I + 2*rho*F^H F) theta = rhs in the row space of F (Woodbury).
    fr = factor @ rhs
    small = np.eye(factor.shape[0]) + 2.0 * state.rho * (factor @ factor.conj().T)
    return rhs - 2.0 * state.rho * (factor.conj().T @ np.linalg.solve(small, fr))


def _update_t(state: PddState) -> np.ndarray:
    a = alphabet_scale(state.x.shape[0])
    target = state.x - state.rho * state.dual_t
    return np.clip(target.real, -a, a) + 1j * np.clip(target.imag, -a, a)


def _update_phi(state: PddState) -> np.ndarray:
    target = state.theta - state.rho * state.dual_phi
    mags = np.abs(target)
    # Zero targets leave the previous (already unit-modulus) entry in place.
    return np.where(mags > 0, target / np.where(mags > 0, mags, 1.0), state.phi)


# Public block-update surface: each returns its block's exact minimizer for
# the current remaining variables.


def update_w(state: PddState, channels: ChannelSet) -> tuple[float, float]:
    h_b, h_e = effective_channels(channels, state.theta)
    return _update_w(state, h_b, h_e)


def update_v(state: PddState, channels: ChannelSet) -> np.ndarray:
    h_b, _ = effective_channels(channels, state.theta)
    return _update_v(state, h_b)


def update_x(state: PddState, channels: ChannelSet) -> np.ndarray:
    h_b, h_e = effective_channels(channels, state.theta)
    return _update_x(state, h_b, h_e, relax_box=False)


def update_theta(state: PddState, channels: ChannelSet) -> np.ndarray:
    return _update_theta(state, channels)


def update_t(state: PddState) -> np.ndarray:
    return _update_t(state)


def update_phi(state: PddState) -> np.ndarray:
    return _update_phi(state)


# ---------------------------------------------------------------------------
# loops


def _consensus_error(state: PddState) -> float:
    err_t = float(np.max(np.abs(state.t - state.x))) if state.t.size else 0.0
    err_phi = (
        float(np.max(np.abs(state.phi - state.theta))) if state.phi.size else 0.0
    )
    return max(err_t, err_phi)


def _snapped_rate(state: PddState, channels: ChannelSet) -> float:
    theta = state.theta
    if theta.size:
        mags = np.abs(theta)
        theta = np.where(mags > 0, theta / np.where(mags > 0, mags, 1.0), 1.0)
    return secrecy_rate(channels, quantize_one_bit(state.x).x, theta)


def inner_bcd(
    state: PddState,
    channels: ChannelSet,
    eps: float,
    max_inner: int = 500,
    relax_box: bool = False,
    record: bool = True,
) -> tuple[PddState, SolverTrace]:
    """Cycle the six block updates until the relative decrease falls below eps.

    The augmented Lagrangian is non-increasing across every full cycle because
    each block is set to its unique global minimizer.
    """
    if eps <= 0:
        raise ValueError("inner tolerance must be positive")
    state = state.copy()
    trace = SolverTrace(solver="inner_bcd")
    start = time.perf_counter()
    h_b, h_e = effective_channels(channels, state.theta)
    l_old = _lagrangian(state, h_b, h_e)
    for cycle in range(1, max_inner + 1):
        state.w_b, state.w_e = _update_w(state, h_b, h_e)
        state.v = _update_v(state, h_b)
        state.x = _update_x(state, h_b, h_e, relax_box)
        state.theta = _update_theta(state, channels)
        h_b, h_e = effective_channels(channels, state.theta)
        if relax_box:
            state.t = state.x.copy()
        else:
            state.t = _update_t(state)
        state.phi = _update_phi(state)
        l_new = _lagrangian(state, h_b, h_e)
        trace.inner_iterations = cycle
        if record:
            trace.append(
                cycle,
                l_new,
                _consensus_error(state),
                _snapped_rate(state, channels),
                time.perf_counter() - start,
            )
        if abs(l_old - l_new) <= eps * max(abs(l_old), 1e-300):
            trace.converged = True
            break
        l_old = l_new
    return state, trace


def _safe_unimod(theta: np.ndarray) -> np.ndarray:
    if not theta.size:
        return theta
    mags = np.abs(theta)
    return np.where(mags > 0, theta / np.where(mags > 0, mags, 1.0), 1.0)


def _outer_loop(
    channels: ChannelSet,
    settings: PddSettings,
    state: PddState,
    relax_box: bool,
    solver_name: str,
) -> tuple[PddState, SolverTrace]:
    trace = SolverTrace(solver=solver_name)
    start = time.perf_counter()
    eps = settings.eps0
    eta = settings.eta0
    for outer in range(1, settings.max_outer + 1):
        state, inner = inner_bcd(
            state,
            channels,
            eps,
            max_inner=settings.max_inner,
            relax_box=relax_box,
            record=False,
        )
        trace.inner_iterations += inner.inner_iterations
        error = _consensus_error(state)
        if error < eta:
            if not relax_box:
                state.dual_t = state.dual_t + (state.t - state.x) / state.rho
            state.dual_phi = state.dual_phi + (state.phi - state.theta) / state.rho
        else:
            state.rho *= settings.c
        eta = 0.2 * error
        eps = 0.1 * eps
        h_b, h_e = effective_channels(channels, state.theta)
        trace.append(
            outer,
            _lagrangian(state, h_b, h_e),
            error,
            _snapped_rate(state, channels)
            if not relax_box
            else secrecy_rate(channels, state.x, _safe_unimod(state.theta)),
            time.perf_counter() - start,
        )
        if error <= settings.eta_min:
            trace.converged = True
            break
    return state, trace


def _make_init(
    channels: ChannelSet,
    settings: PddSettings,
    init: PddState | None,
    init_seed: int,
) -> PddState:
    if init is not None:
        return init.copy()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(init_seed)))
    return default_init(channels, settings.rho0, rng)


def solve(
    channels: ChannelSet,
    settings: PddSettings | None = None,
    init: PddState | None = None,
    init_seed: int = 0,
) -> tuple[OneBitPrecoder, IrsPhases, SolverTrace]:
    """Run the double loop and return the snapped feasible pair with its trace.

    The outer loop tightens the dual variables when the consensus error beats
    the running threshold and shrinks the penalty otherwise; both thresholds
    decay every iteration.  If the iteration cap is hit before the violation
    target, the best pair found is returned with ``converged=False``.
    """
    settings = settings or PddSettings()
    state = _make_init(channels, settings, init, init_seed)
    state, trace = _outer_loop(channels, settings, state, False, "wmmse_pdd")

    trace.snap_violation = one_bit_membership(state.x).violation
    x = quantize_one_bit(state.x)
    theta = IrsPhases(_safe_unimod(state.theta))
    return x, theta, trace


def solve_relaxed(
    channels: ChannelSet,
    settings: PddSettings | None = None,
    init: PddState | None = None,
    init_seed: int = 0,
) -> tuple[np.ndarray, IrsPhases, SolverTrace]:
    """Box-free variant: the precoder keeps only the unit-norm constraint.

    The consensus copy of the precoder is pinned to the precoder itself, so
    the outer error tracks only the phase split.  Returns the relaxed
    (non-quantized) precoder; the projection baseline snaps it afterwards.
    """
    settings = settings or PddSettings()
    state = _make_init(channels, settings, init, init_seed)
    state, trace = _outer_loop(channels, settings, state, True, "relaxed_pdd")
    theta = IrsPhases(_safe_unimod(state.theta))
    return state.x, theta, trace
