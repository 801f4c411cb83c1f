"""Discrete WSSUS channel statistics, realizations and propagated pulses.

Delays are integer samples and Dopplers are cycles per sample. A path
``(tau, nu)`` maps an input ``x[t]`` to ``x[t - tau] * exp(2j*pi*nu*t)``,
with ``t`` measured from the reference time zero (the center of symbol 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .numerology import Numerology
from .pulses import PrototypeFilter

__all__ = [
    "ScatteringStats",
    "ChannelRealization",
    "brick_scattering",
    "ideal_channel",
    "draw_realization",
    "draw_gains",
    "shifted_pulse_matrix",
    "apply_channel",
]


@dataclass(frozen=True, eq=False)
class ScatteringStats:
    """Diagonal scattering function: one ``(tau, nu, power)`` triple per path."""

    taus: np.ndarray
    nus: np.ndarray
    powers: np.ndarray
    tau_max: float
    nu_max: float

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float).ravel()
        nus = np.asarray(self.nus, dtype=float).ravel()
        powers = np.asarray(self.powers, dtype=float).ravel()
        if not (taus.size == nus.size == powers.size) or taus.size == 0:
            raise ConfigError("taus, nus and powers must be non-empty and equally long")
        if np.any(taus != np.round(taus)):
            raise ConfigError("path delays must be integer samples")
        if np.any(powers < 0) or abs(powers.sum() - 1.0) > 1e-9:
            raise ConfigError("path powers must be non-negative and sum to 1")
        if np.any(np.abs(taus) > self.tau_max + 1e-12) or np.any(np.abs(nus) > self.nu_max + 1e-12):
            raise ConfigError("paths lie outside the declared (tau_max, nu_max) box")
        object.__setattr__(self, "taus", taus.astype(int))
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def from_paths(cls, paths, tau_max=None, nu_max=None) -> "ScatteringStats":
        """Build from ``[(tau, nu, power), ...]``; powers are normalized."""
        arr = np.asarray(paths, dtype=float).reshape(-1, 3)
        powers = arr[:, 2] / arr[:, 2].sum()
        tau_max = np.abs(arr[:, 0]).max() if tau_max is None else tau_max
        nu_max = np.abs(arr[:, 1]).max() if nu_max is None else nu_max
        return cls(arr[:, 0], arr[:, 1], powers, float(tau_max), float(nu_max))

    @property
    def n_paths(self) -> int:
        return self.powers.size

    @property
    def max_delay(self) -> int:
        return int(np.abs(self.taus).max())

    def to_dict(self) -> dict:
        return {"tau_max": self.tau_max, "nu_max": self.nu_max,
                "paths": [{"tau": int(t), "nu": float(v), "power": float(p)}
                          for t, v, p in zip(self.taus, self.nus, self.powers)]}

    @classmethod
    def from_dict(cls, d: dict) -> "ScatteringStats":
        paths = [(p["tau"], p["nu"], p["power"]) for p in d["paths"]]
        return cls.from_paths(paths, d.get("tau_max"), d.get("nu_max"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "ScatteringStats":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    gains: np.ndarray


def brick_scattering(tau_max: float, nu_max: float, grid=(8, 8)) -> ScatteringStats:
    """Equal-power paths on a uniform grid over the delay-Doppler rectangle.

    Delays are spread evenly over ``[-tau_max, tau_max]`` and rounded to
    integer samples. A zero-width axis collapses to a single point.
    """
    n_tau, n_nu = grid
    if n_tau < 1 or n_nu < 1:
        raise ConfigError("grid dimensions must be >= 1")
    if tau_max < 0 or nu_max < 0:
        raise ConfigError("tau_max and nu_max must be non-negative")
    if tau_max == 0:
        n_tau = 1
    if nu_max == 0:
        n_nu = 1
    taus = np.rint(np.linspace(-tau_max, tau_max, n_tau)) if n_tau > 1 else np.zeros(1)
    nus = np.linspace(-nu_max, nu_max, n_nu) if n_nu > 1 else np.zeros(1)
    tt, vv = np.meshgrid(taus, nus, indexing="ij")
    P = tt.size
    return ScatteringStats(tt.ravel(), vv.ravel(), np.full(P, 1.0 / P), float(tau_max), float(nu_max))


def ideal_channel() -> ScatteringStats:
    return brick_scattering(0, 0, (1, 1))


def draw_gains(stats: ScatteringStats, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent gain vectors, shape ``(size, P)``."""
    shape = (size, stats.n_paths)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z * np.sqrt(stats.powers / 2)


def draw_realization(stats: ScatteringStats, seed: int | np.random.SeedSequence) -> ChannelRealization:
    """Circularly-symmetric complex Gaussian gains with variances ``stats.powers``."""
    rng = np.random.default_rng(seed)
    return ChannelRealization(draw_gains(stats, 1, rng)[0])


def _propagated(pulse: PrototypeFilter, offset: int, start: int, length: int,
                taus: np.ndarray, nus: np.ndarray) -> np.ndarray:
    """Columns ``pulse[t - offset - tau_p] * exp(2j*pi*nu_p*t)`` over ``t`` in the span."""
    t = start + np.arange(length)
    cols = np.empty((length, taus.size), dtype=complex)
    for p, (d, v) in enumerate(zip(taus, nus)):
        cols[:, p] = pulse.span(start - offset - d, length)
    return cols * np.exp(2j * np.pi * np.outer(t, nus))


def shifted_pulse_matrix(g: PrototypeFilter, num: Numerology, m: int, n: int,
                         stats: ScatteringStats, rx: PrototypeFilter | int) -> np.ndarray:
    """Propagated copies of ``g_{m,n}`` observed on the receive span.

    Column ``p`` holds ``g_{m,n}[t - tau_p] * exp(2j*pi*nu_p*t)`` for the
    times ``t`` covered by ``rx`` (a receive pulse, or a span length that
    is centered like a pulse of that length).

    Returns:
        Complex matrix of shape ``(L_R, P)``.
    """
    if abs(m) >= num.M:
        raise ConfigError(f"|m| must be < M = {num.M}")
    if isinstance(rx, PrototypeFilter):
        start, length = rx.first, rx.length
    else:
        length = int(rx)
        start = -(length // 2)
    cols = _propagated(g, n * num.N, start, length, stats.taus, stats.nus)
    # subcarrier phase follows the pulse-local time t - nN - tau_p
    t = start + np.arange(length)
    local = t[:, None] - n * num.N - stats.taus[None, :]
    return cols * np.exp(2j * np.pi * m * (local % num.M) / num.M)


def apply_channel(samples: np.ndarray, origin: int, stats: ScatteringStats,
                  gains: np.ndarray) -> tuple[np.ndarray, int]:
    """Pass a sampled signal through a realization of the channel.

    Args:
        samples: Signal, shape ``(..., L)``; leading axes are independent
            frames and must match the leading axes of ``gains``.
        origin: Array index of time zero.
        gains: Path gains, shape ``(..., P)``.

    Returns:
        The received samples, extended by the maximum delay on both sides,
        and the new origin index.
    """
    D = stats.max_delay
    L = samples.shape[-1]
    out_len = L + 2 * D
    t = np.arange(out_len) - (origin + D)
    out = np.zeros(samples.shape[:-1] + (out_len,), dtype=complex)
    for p, (d, v) in enumerate(zip(stats.taus, stats.nus)):
        shifted = np.zeros_like(out)
        shifted[..., D + d:D + d + L] = samples
        out += gains[..., p, None] * shifted * np.exp(2j * np.pi * v * t)
    return out, origin + D
