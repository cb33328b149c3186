"""Brute-force and numerical-differentiation oracles.

These deliberately re-derive every quantity with their own small-scale code
paths (explicit diagonal matrices, chunked enumeration, central differences)
so they can certify the solvers without sharing their evaluation code.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .channel import ChannelSet

#: Hard cap on the enumeration size: 4^12 candidates.
MAX_ENUM_ANTENNAS = 12
#: Largest joint phase-grid size before coordinate ascent takes over.
MAX_GRID_CANDIDATES = 10**6

_CHUNK = 1 << 16

# Quadrant order fixing the lexicographic candidate enumeration.
_QUADRANTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


class BudgetExceededError(ValueError):
    """The requested exhaustive search is larger than the oracle allows."""


def _own_effective(channels: ChannelSet, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Independent composite-channel assembly via an explicit diagonal matrix.
    theta = np.asarray(getattr(theta, "theta", theta))
    big_theta = np.diag(theta)
    h_b = channels.h_ib @ big_theta @ channels.h_ai + channels.h_ab
    h_e = channels.h_ie @ big_theta @ channels.h_ai + channels.h_ae
    return h_b, h_e


def _own_secrecy(h_b: np.ndarray, h_e: np.ndarray, x: np.ndarray) -> float:
    yb = h_b @ x
    ye = h_e @ x
    num = 1.0 + float(np.sum(np.abs(yb) ** 2))
    den = 1.0 + float(np.sum(np.abs(ye) ** 2))
    return max(0.0, float(np.log2(num / den)))


def candidate_precoder(index: int, m: int) -> np.ndarray:
    """The ``index``-th one-bit vector in lexicographic quadrant order."""
    a = np.sqrt(1.0 / (2.0 * m))
    digits = (index // 4 ** np.arange(m - 1, -1, -1)) % 4
    return a * _QUADRANTS[digits]


def enumerate_precoders(
    channels: ChannelSet, theta: np.ndarray
) -> tuple[np.ndarray, float]:
    """Exact secrecy-rate maximizer over all one-bit precoders at fixed phases.

    Enumerates the full ``4^M`` candidate set in chunks; ties resolve to the
    lexicographically first maximizer, making golden values reproducible.
    """
    m = channels.h_ab.shape[1]
    if m > MAX_ENUM_ANTENNAS:
        raise BudgetExceededError(
            f"enumeration over 4^{m} candidates refused (cap M={MAX_ENUM_ANTENNAS})"
        )
    h_b, h_e = _own_effective(channels, theta)
    a = np.sqrt(1.0 / (2.0 * m))
    total = 4**m
    powers = 4 ** np.arange(m - 1, -1, -1, dtype=np.int64)

    best_rate = -np.inf
    best_index = -1
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % 4
        cands = a * _QUADRANTS[digits]  # (chunk, M)
        yb = cands @ h_b.T  # (chunk, N_b)
        ye = cands @ h_e.T
        num = 1.0 + np.sum(np.abs(yb) ** 2, axis=1)
        den = 1.0 + np.sum(np.abs(ye) ** 2, axis=1)
        rates = np.maximum(0.0, np.log2(num / den))
        k = int(np.argmax(rates))  # argmax returns the first maximizer
        if rates[k] > best_rate:
            best_rate = float(rates[k])
            best_index = int(idx[k])
    return candidate_precoder(best_index, m), best_rate


def grid_search_phases(
    channels: ChannelSet,
    x: np.ndarray,
    levels: int,
    mode: str = "auto",
    max_passes: int = 20,
) -> tuple[np.ndarray, float]:
    """Best unit-modulus phases on a uniform grid ``{exp(2*pi*j*k/levels)}``.

    Joint enumeration when ``levels^N_i`` fits the budget, otherwise cyclic
    coordinate ascent over the same per-element grid (deterministic all-ones
    start, first-maximizer ties).
    """
    x = np.asarray(getattr(x, "x", x))
    n_i = channels.h_ai.shape[0]
    if levels < 1:
        raise ValueError("levels must be >= 1")
    grid = np.exp(2j * np.pi * np.arange(levels) / levels)

    if n_i == 0:
        theta = np.zeros(0, dtype=complex)
        h_b, h_e = _own_effective(channels, theta)
        return theta, _own_secrecy(h_b, h_e, x)

    joint_size = float(levels) ** n_i
    if mode == "auto":
        mode = "joint" if joint_size <= MAX_GRID_CANDIDATES else "coordinate"
    if mode == "joint" and joint_size > MAX_GRID_CANDIDATES:
        raise BudgetExceededError(
            f"joint grid of {levels}^{n_i} candidates exceeds {MAX_GRID_CANDIDATES}"
        )
    if mode not in ("joint", "coordinate"):
        raise ValueError(f"unknown mode {mode!r}")

    if mode == "joint":
        best_rate = -np.inf
        best = None
        for flat in range(int(joint_size)):
            digits = (flat // levels ** np.arange(n_i - 1, -1, -1)) % levels
            theta = grid[digits]
            h_b, h_e = _own_effective(channels, theta)
            r = _own_secrecy(h_b, h_e, x)
            if r > best_rate:
                best_rate = r
                best = theta
        return best, float(best_rate)

    # Coordinate ascent: sweep each element over the grid until a full pass
    # yields no improvement.
    theta = np.ones(n_i, dtype=complex)
    h_b, h_e = _own_effective(channels, theta)
    best_rate = _own_secrecy(h_b, h_e, x)
    for _ in range(max_passes):
        improved = False
        for n in range(n_i):
            current = theta[n]
            for g in grid:
                if g == current:
                    continue
                theta[n] = g
                h_b, h_e = _own_effective(channels, theta)
                r = _own_secrecy(h_b, h_e, x)
                if r > best_rate + 1e-15:
                    best_rate = r
                    current = g
                    improved = True
            theta[n] = current
        if not improved:
            break
    return theta, float(best_rate)


def finite_difference(
    f: Callable[[np.ndarray], float], point: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient of a scalar function of a real vector."""
    if h <= 0:
        raise ValueError("step must be positive")
    point = np.asarray(point, dtype=float)
    grad = np.empty_like(point)
    for i in range(point.size):
        p_plus = point.copy()
        p_minus = point.copy()
        p_plus[i] += h
        p_minus[i] -= h
        f_plus = f(p_plus)
        f_minus = f(p_minus)
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise FloatingPointError("objective returned a non-finite value")
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def complex_to_real(*blocks: np.ndarray) -> np.ndarray:
    """Flatten complex blocks into one real coordinate vector."""
    parts = []
    for b in blocks:
        parts.append(np.real(b))
        parts.append(np.imag(b))
    return np.concatenate(parts)


def real_to_complex(vec: np.ndarray, *sizes: int) -> tuple[np.ndarray, ...]:
    """Inverse of ``complex_to_real`` for blocks of the given lengths."""
    out = []
    offset = 0
    for n in sizes:
        re = vec[offset : offset + n]
        im = vec[offset + n : offset + 2 * n]
        out.append(re + 1j * im)
        offset += 2 * n
    return tuple(out)
