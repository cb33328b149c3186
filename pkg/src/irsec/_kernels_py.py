"""NumPy implementations of the solver hot kernels.

Mirrors the compiled ``irsec._kernels`` extension one-to-one; used as the
fallback backend when the extension is not built (see ``irsec.kernels``).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def box_residuals(x: np.ndarray, a: float) -> np.ndarray:
    """Signed box-constraint residuals of a complex vector.

    For each entry the four residuals are, in order:
    ``re - a``, ``im - a``, ``-re - a``, ``-im - a``.  All are <= 0 exactly
    when the entry lies inside the centered square box of half-width ``a``.

    Returns a flat float64 array of length ``4 * len(x)`` grouped per entry.
    """
    re = np.real(x)
    im = np.imag(x)
    out = np.empty((x.shape[0], 4))
    out[:, 0] = re - a
    out[:, 1] = im - a
    out[:, 2] = -re - a
    out[:, 3] = -im - a
    return out.ravel()


def _softplus(c: np.ndarray, u: float) -> np.ndarray:
    # u*log(1 + exp(c/u)) evaluated as max(c,0) + u*log1p(exp(-|c|/u)): the
    # exponent is always <= 0 so this never overflows.
    return np.maximum(c, 0.0) + u * np.log1p(np.exp(-np.abs(c) / u))


def smoothed_box_penalty(x: np.ndarray, a: float, u: float) -> float:
    """Log-sum-exp smoothed hinge penalty of the box residuals.

    Computes ``sum_i u*log(1 + exp(c_i/u))`` over all 4M residuals; tends to
    ``sum_i max(0, c_i)`` as ``u -> 0``.
    """
    return float(np.sum(_softplus(box_residuals(x, a), u)))


def _logistic(t: np.ndarray) -> np.ndarray:
    # Stable 1/(1+exp(-t)) for large |t|.
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def smoothed_box_penalty_grad(x: np.ndarray, a: float, u: float) -> np.ndarray:
    """Gradient of ``smoothed_box_penalty`` as a complex vector.

    Entry m is ``d/d(re_m) + 1j * d/d(im_m)`` of the penalty sum.
    """
    re = np.real(x)
    im = np.imag(x)
    g_re = _logistic((re - a) / u) - _logistic((-re - a) / u)
    g_im = _logistic((im - a) / u) - _logistic((-im - a) / u)
    return g_re + 1j * g_im


def unit_norm_shift_root(
    mu: np.ndarray,
    csq: np.ndarray,
    rho: float,
    lo: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """Bisection root of ``g(lam) = sum csq / (2*rho*mu + 1 + 2*rho*lam)^2 = 1``.

    ``mu`` are the (nonnegative) eigenvalues of the quadratic-form matrix and
    ``csq`` the squared magnitudes of the right-hand side in that eigenbasis.
    ``g`` is strictly decreasing for ``lam > lo``, so the root is unique once
    it is bracketed; the upper bracket is found by doubling.
    """

    def g(lam: float) -> float:
        den = 2.0 * rho * mu + 1.0 + 2.0 * rho * lam
        return float(np.sum(csq / (den * den)))

    hi = max(1.0, lo + 1.0)
    while g(hi) >= 1.0:
        hi = 2.0 * hi - lo
    lam = 0.5 * (lo + hi)
    for _ in range(max_iter):
        val = g(lam)
        if abs(val - 1.0) <= tol:
            break
        if val > 1.0:
            lo = lam
        else:
            hi = lam
        lam = 0.5 * (lo + hi)
    return lam
