"""Channel generation for the IRS-assisted downlink.

Every link combines a large-scale power-law path loss with small-scale
fading: the direct Alice-Bob / Alice-Eve links are Rayleigh, the three
IRS-related links are Rician with a line-of-sight component built from the
node geometry.  Effective (noise-scaled) channels absorb the transmit power
and the receiver noise power, so the downstream rate expressions carry unit
noise.

Randomness is injected through ``numpy.random.Generator`` instances backed by
the counter-based Philox bit generator.  Each link draws from its own
sub-stream (derived by ``SeedSequence`` spawning), so a channel realization
does not depend on the order in which links are materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

Coord = tuple[float, float]

# Fixed sub-stream index per link; part of the reproducibility contract.
_LINK_STREAMS = {"ab": 0, "ae": 1, "ai": 2, "ib": 3, "ie": 4}


def db_to_linear(x_db: float) -> float:
    """dB (or dBm) to linear scale."""
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scenario scalars: array sizes, powers, geometry, fading parameters.

    Powers are in dBm, distances in meters, path-loss exponents
    dimensionless.  ``seed`` pins every random draw of the scenario.
    """

    m: int = 128
    n_b: int = 16
    n_e: int = 16
    n_i: int = 256
    p_dbm: float = 30.0
    sigma_b_dbm: float = -50.0
    sigma_e_dbm: float = -50.0
    pos_alice: Coord = (0.0, 0.0)
    pos_irs: Coord = (50.0, 0.0)
    pos_bob: Coord = (55.0, 2.0)
    pos_eve: Coord = (45.0, 2.0)
    nu_ai: float = 2.2
    nu_ib: float = 2.5
    nu_ie: float = 2.5
    nu_ab: float = 3.5
    nu_ae: float = 3.5
    rician_factor: float = 5.0
    c0_db: float = -30.0
    d0: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.n_b < 1 or self.n_e < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.n_i < 0:
            raise ValueError("IRS element count must be >= 0")
        if self.d0 <= 0:
            raise ValueError("reference distance must be positive")
        if self.rician_factor < 0:
            raise ValueError("Rician factor must be >= 0")

    @property
    def p_lin(self) -> float:
        """Transmit power in linear mW; strictly positive by construction."""
        return db_to_linear(self.p_dbm)

    @property
    def sigma_b_lin(self) -> float:
        return db_to_linear(self.sigma_b_dbm)

    @property
    def sigma_e_lin(self) -> float:
        return db_to_linear(self.sigma_e_dbm)

    @classmethod
    def full_scale(cls, **overrides) -> "SystemConfig":
        """Default large-array scenario (long runs)."""
        return cls(**overrides)

    @classmethod
    def desk_scale(cls, **overrides) -> "SystemConfig":
        """Small scenario for tests and quick experiments; same geometry."""
        base = dict(m=16, n_i=32, n_b=4, n_e=4)
        base.update(overrides)
        return cls(**base)

    def with_(self, **overrides) -> "SystemConfig":
        return replace(self, **overrides)


@dataclass
class ChannelSet:
    """Raw and noise-scaled channel matrices of one realization.

    Scaled matrices satisfy ``h_xy = sqrt(P / sigma_y^2) * h_xy_raw``; the
    Alice-IRS channel is shared by both receivers and carries no noise
    scaling of its own.
    """

    h_ab_raw: np.ndarray
    h_ae_raw: np.ndarray
    h_ai: np.ndarray
    h_ib_raw: np.ndarray
    h_ie_raw: np.ndarray
    h_ab: np.ndarray = field(default=None)  # type: ignore[assignment]
    h_ae: np.ndarray = field(default=None)  # type: ignore[assignment]
    h_ib: np.ndarray = field(default=None)  # type: ignore[assignment]
    h_ie: np.ndarray = field(default=None)  # type: ignore[assignment]

    @classmethod
    def from_raw(
        cls,
        h_ab_raw: np.ndarray,
        h_ae_raw: np.ndarray,
        h_ai: np.ndarray,
        h_ib_raw: np.ndarray,
        h_ie_raw: np.ndarray,
        p_lin: float,
        sigma_b_lin: float,
        sigma_e_lin: float,
    ) -> "ChannelSet":
        sb = np.sqrt(p_lin / sigma_b_lin)
        se = np.sqrt(p_lin / sigma_e_lin)
        return cls(
            h_ab_raw=h_ab_raw,
            h_ae_raw=h_ae_raw,
            h_ai=h_ai,
            h_ib_raw=h_ib_raw,
            h_ie_raw=h_ie_raw,
            h_ab=sb * h_ab_raw,
            h_ae=se * h_ae_raw,
            h_ib=sb * h_ib_raw,
            h_ie=se * h_ie_raw,
        )

    @property
    def m(self) -> int:
        return self.h_ab.shape[1]

    @property
    def n_i(self) -> int:
        return self.h_ai.shape[0]

    def all_finite(self) -> bool:
        return all(
            np.all(np.isfinite(h))
            for h in (self.h_ab_raw, self.h_ae_raw, self.h_ai, self.h_ib_raw, self.h_ie_raw)
        )

    def zero_irs(self) -> "ChannelSet":
        """Copy with all IRS-related links zeroed (no-IRS baseline)."""
        z = np.zeros_like
        return ChannelSet(
            h_ab_raw=self.h_ab_raw,
            h_ae_raw=self.h_ae_raw,
            h_ai=z(self.h_ai),
            h_ib_raw=z(self.h_ib_raw),
            h_ie_raw=z(self.h_ie_raw),
            h_ab=self.h_ab,
            h_ae=self.h_ae,
            h_ib=z(self.h_ib),
            h_ie=z(self.h_ie),
        )


def path_loss(d: float, nu: float, c0_db: float = -30.0, d0: float = 1.0) -> float:
    """Power-law large-scale gain ``10^(c0_db/10) * (d/d0)^(-nu)``."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if d0 <= 0:
        raise ValueError(f"reference distance must be positive, got {d0}")
    return db_to_linear(c0_db) * (d / d0) ** (-nu)


def steering_vector(angle: float, count: int) -> np.ndarray:
    """Uniform linear array response with half-wavelength spacing.

    Element k is ``exp(j*pi*k*sin(angle))``; all entries unit modulus.
    """
    if count < 1:
        raise ValueError("array size must be >= 1")
    k = np.arange(count)
    return np.exp(1j * np.pi * k * np.sin(angle))


def complex_gaussian(shape: tuple, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. circular complex normal entries with unit variance each."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rician_matrix(
    los: np.ndarray, rician_factor: float, rng: np.random.Generator
) -> np.ndarray:
    """Mix a deterministic LoS matrix with i.i.d. scattering.

    Returns ``sqrt(k/(1+k)) * los + sqrt(1/(1+k)) * G`` with ``G`` standard
    circular complex Gaussian; ``k = 0`` gives pure scattering.
    """
    if rician_factor < 0:
        raise ValueError("Rician factor must be >= 0")
    w_los = np.sqrt(rician_factor / (1.0 + rician_factor))
    w_nlos = np.sqrt(1.0 / (1.0 + rician_factor))
    return w_los * los + w_nlos * complex_gaussian(los.shape, rng)


def _distance(p: Coord, q: Coord) -> float:
    return float(np.hypot(q[0] - p[0], q[1] - p[1]))


def _los_matrix(pos_tx: Coord, pos_rx: Coord, count_tx: int, count_rx: int) -> np.ndarray:
    # Departure angle from the geometry; arrival angle is its supplement.
    iota_t = float(np.arctan2(pos_rx[1] - pos_tx[1], pos_rx[0] - pos_tx[0]))
    iota_r = np.pi - iota_t
    a_r = steering_vector(iota_r, count_rx)
    a_t = steering_vector(iota_t, count_tx)
    return np.outer(a_r, a_t.conj())


def _link_rngs(seed_source: Union[int, np.random.SeedSequence, np.random.Generator, None],
               config_seed: int) -> dict:
    """One independent Philox generator per link, in a fixed stream order."""
    if seed_source is None:
        seed_source = config_seed
    if isinstance(seed_source, np.random.Generator):
        children = seed_source.spawn(len(_LINK_STREAMS))
        return {name: children[i] for name, i in _LINK_STREAMS.items()}
    if not isinstance(seed_source, np.random.SeedSequence):
        seed_source = np.random.SeedSequence(seed_source)
    children = seed_source.spawn(len(_LINK_STREAMS))
    return {
        name: np.random.Generator(np.random.Philox(children[i]))
        for name, i in _LINK_STREAMS.items()
    }


def generate_channels(
    config: SystemConfig,
    rng: Union[int, np.random.SeedSequence, np.random.Generator, None] = None,
) -> ChannelSet:
    """Draw one channel realization for the configured scenario.

    ``rng`` may be a seed, a ``SeedSequence``, a ``Generator`` (split into
    per-link sub-streams), or ``None`` to use ``config.seed``.  The result is
    bit-identical for identical ``(config, seed)``.
    """
    rngs = _link_rngs(rng, config.seed)

    d_ab = _distance(config.pos_alice, config.pos_bob)
    d_ae = _distance(config.pos_alice, config.pos_eve)
    g_ab = np.sqrt(path_loss(d_ab, config.nu_ab, config.c0_db, config.d0))
    g_ae = np.sqrt(path_loss(d_ae, config.nu_ae, config.c0_db, config.d0))

    h_ab_raw = g_ab * complex_gaussian((config.n_b, config.m), rngs["ab"])
    h_ae_raw = g_ae * complex_gaussian((config.n_e, config.m), rngs["ae"])

    if config.n_i > 0:
        d_ai = _distance(config.pos_alice, config.pos_irs)
        d_ib = _distance(config.pos_irs, config.pos_bob)
        d_ie = _distance(config.pos_irs, config.pos_eve)
        g_ai = np.sqrt(path_loss(d_ai, config.nu_ai, config.c0_db, config.d0))
        g_ib = np.sqrt(path_loss(d_ib, config.nu_ib, config.c0_db, config.d0))
        g_ie = np.sqrt(path_loss(d_ie, config.nu_ie, config.c0_db, config.d0))
        k = config.rician_factor
        h_ai = g_ai * rician_matrix(
            _los_matrix(config.pos_alice, config.pos_irs, config.m, config.n_i), k, rngs["ai"]
        )
        h_ib_raw = g_ib * rician_matrix(
            _los_matrix(config.pos_irs, config.pos_bob, config.n_i, config.n_b), k, rngs["ib"]
        )
        h_ie_raw = g_ie * rician_matrix(
            _los_matrix(config.pos_irs, config.pos_eve, config.n_i, config.n_e), k, rngs["ie"]
        )
    else:
        h_ai = np.zeros((0, config.m), dtype=complex)
        h_ib_raw = np.zeros((config.n_b, 0), dtype=complex)
        h_ie_raw = np.zeros((config.n_e, 0), dtype=complex)

    return ChannelSet.from_raw(
        h_ab_raw,
        h_ae_raw,
        h_ai,
        h_ib_raw,
        h_ie_raw,
        config.p_lin,
        config.sigma_b_lin,
        config.sigma_e_lin,
    )


def inject_csi_error(
    channel: np.ndarray, delta_e: float, rng: np.random.Generator
) -> np.ndarray:
    """Add estimation noise at a target normalized MSE.

    The additive error is i.i.d. circular Gaussian with per-entry variance
    ``delta_e * ||H||_F^2 / K`` (``K`` = number of entries), so
    ``E||E||_F^2 = delta_e * ||H||_F^2``.
    """
    if delta_e < 0:
        raise ValueError("NMSE fraction must be >= 0")
    if delta_e == 0 or channel.size == 0:
        return channel.copy()
    sigma2 = delta_e * float(np.sum(np.abs(channel) ** 2)) / channel.size
    return channel + np.sqrt(sigma2) * complex_gaussian(channel.shape, rng)


def estimated_channels(
    channels: ChannelSet,
    delta_e: float,
    rng: np.random.Generator,
    p_lin: float,
    sigma_b_lin: float,
    sigma_e_lin: float,
) -> ChannelSet:
    """Copy of ``channels`` with estimation error injected on Eve's links.

    Optimization consumes the perturbed set; rates are then evaluated on the
    true one.
    """
    return ChannelSet.from_raw(
        channels.h_ab_raw,
        inject_csi_error(channels.h_ae_raw, delta_e, rng),
        channels.h_ai,
        channels.h_ib_raw,
        inject_csi_error(channels.h_ie_raw, delta_e, rng),
        p_lin,
        sigma_b_lin,
        sigma_e_lin,
    )
