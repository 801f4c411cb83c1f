"""Uncoded Monte-Carlo link simulation over random channel realizations.

Each frame carries random QAM symbols on all ``M`` subcarriers, passes a
fresh channel realization and white noise, and is demodulated with the
receive pulse. Statistics are taken on the symbols whose interfering
neighbours were all transmitted, so the measured SINR is directly
comparable with the statistical SINR of the pulse pair.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ScatteringStats, apply_channel, draw_gains
from .errors import ConfigError
from .numerology import Numerology
from .pulses import PrototypeFilter, cross_ambiguity
from .transceiver import FrameSignal, SymbolGrid, demodulate, modulate

__all__ = [
    "Constellation",
    "LinkConfig",
    "LinkReport",
    "qam_points",
    "run_link",
    "evm_to_sinr",
    "sinr_to_evm",
]

CHUNK = 256


class Constellation(str, enum.Enum):
    QPSK = "QPSK"
    QAM16 = "16QAM"
    QAM64 = "64QAM"
    QAM256 = "256QAM"

    @property
    def order(self) -> int:
        return {"QPSK": 4, "16QAM": 16, "64QAM": 64, "256QAM": 256}[self.value]


def qam_points(kind: Constellation | str) -> np.ndarray:
    """Square QAM alphabet with unit average power."""
    order = Constellation(kind).order
    side = int(math.isqrt(order))
    levels = np.arange(-side + 1, side, 2, dtype=float)
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


@dataclass(frozen=True)
class LinkConfig:
    """Simulation settings.

    Attributes:
        snr_db: Inverse per-sample noise variance in dB (unit-power pulses
            and symbols). ``None`` disables noise.
        n_symbols: Symbols per frame; by default just enough for one
            symbol with a complete set of interferers.
    """

    constellation: Constellation = Constellation.QPSK
    snr_db: float | None = 30.0
    n_frames: int = 1000
    seed: int = 0
    n_symbols: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "constellation", Constellation(self.constellation))
        if self.n_frames < 1:
            raise ConfigError("n_frames must be >= 1")
        if self.n_symbols is not None and self.n_symbols < 1:
            raise ConfigError("n_symbols must be >= 1")


@dataclass(frozen=True)
class LinkReport:
    ser: float
    evm_percent: float
    measured_sinr_db: float
    n_frames: int
    n_measured: int

    def to_dict(self) -> dict:
        return asdict(self)


def evm_to_sinr(evm: float) -> float:
    """SINR in dB for an EVM given as a fraction (``EVM^2 = 1/SINR``)."""
    if not evm > 0:
        raise ConfigError("EVM must be positive")
    return -20.0 * math.log10(evm)


def sinr_to_evm(sinr_db: float) -> float:
    return 10 ** (-sinr_db / 20)


def _reach(g: PrototypeFilter, gamma: PrototypeFilter, N: int, d: int) -> int:
    """Largest symbol offset whose shifted transmit pulse can meet the receiver."""
    left = gamma.first - (g.first + g.length - 1) - d
    right = gamma.first + gamma.length - 1 - g.first + d
    return max(0, -(-max(-left, right) // N))


def _channel_coefficients(g, gamma, num: Numerology, stats: ScatteringStats,
                          gains: np.ndarray, n_idx: np.ndarray) -> np.ndarray:
    """Effective one-tap coefficients ``h[frame, m, n]`` for known path gains."""
    M, N = num.M, num.N
    amb = np.array([np.conj(cross_ambiguity(g, gamma, int(d), float(v)))
                    for d, v in zip(stats.taus, stats.nus)])
    m = np.arange(M)
    # path p contributes exp(-2j pi m tau_p / M) exp(2j pi nu_p n N) * amb_p
    sub = np.exp(-2j * np.pi * np.outer(stats.taus, m) / M)
    sym = np.exp(2j * np.pi * np.outer(stats.nus, n_idx * N))
    per_path = amb[:, None, None] * sub[:, :, None] * sym[:, None, :]
    return np.einsum("bp,pmn->bmn", gains, per_path)


def run_link(g: PrototypeFilter, gamma: PrototypeFilter, num: Numerology,
             stats: ScatteringStats | None, cfg: LinkConfig) -> LinkReport:
    """Simulate ``cfg.n_frames`` frames and measure SER, EVM and SINR.

    Args:
        stats: Scattering statistics; ``None`` means a distortion-free
            channel with white noise only.

    Equalization is one-tap zero forcing with the exact effective channel
    coefficient of each symbol. Measured SINR is the power of the useful
    term ``h*a`` over the power of ``a_hat - h*a``.
    """
    M, N = num.M, num.N
    D = 0 if stats is None else stats.max_delay
    reach = _reach(g, gamma, N, D)
    n_sym = cfg.n_symbols or 2 * reach + 1
    measured = np.arange(reach, n_sym - reach)
    if measured.size == 0:
        measured = np.arange(n_sym)
    pts = qam_points(cfg.constellation)
    sigma2 = 0.0 if cfg.snr_db is None else 10 ** (-cfg.snr_db / 10)
    seeds = np.random.SeedSequence(cfg.seed).spawn(-(-cfg.n_frames // CHUNK))

    sig_pow = res_pow = err_pow = ref_pow = 0.0
    errors = count = 0
    for k, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        B = min(CHUNK, cfg.n_frames - k * CHUNK)
        idx = rng.integers(0, pts.size, size=(B, M, n_sym))
        a = pts[idx]
        tx = modulate(SymbolGrid.full(a), g, num)
        if stats is None:
            samples, origin = tx.samples, tx.origin
            h = np.full((B, M, measured.size), np.conj(cross_ambiguity(g, gamma, 0, 0.0)))
        else:
            gains = draw_gains(stats, B, rng)
            samples, origin = apply_channel(tx.samples, tx.origin, stats, gains)
            h = _channel_coefficients(g, gamma, num, stats, gains, measured)
        # extend so every receive window sees noise
        lo = min(0, origin + gamma.first)
        hi = max(samples.shape[-1], origin + (n_sym - 1) * N + gamma.first + gamma.length)
        rx = np.zeros((B, hi - lo), dtype=complex)
        rx[:, -lo:-lo + samples.shape[-1]] = samples
        if sigma2 > 0:
            noise = rng.standard_normal(rx.shape) + 1j * rng.standard_normal(rx.shape)
            rx += noise * math.sqrt(sigma2 / 2)
        frame = FrameSignal(rx, num.Ts, origin - lo, M, N)
        a_hat = demodulate(frame, gamma, num, n_sym).symbols[..., measured]
        a_ref = a[..., measured]
        useful = h * a_ref
        sig_pow += float(np.sum(np.abs(useful) ** 2))
        res_pow += float(np.sum(np.abs(a_hat - useful) ** 2))
        eq = a_hat / h
        err_pow += float(np.sum(np.abs(eq - a_ref) ** 2))
        ref_pow += float(np.sum(np.abs(a_ref) ** 2))
        dec = np.argmin(np.abs(eq[..., None] - pts), axis=-1)
        errors += int(np.count_nonzero(dec != idx[..., measured]))
        count += a_ref.size
    sinr = 300.0 if res_pow == 0 else 10 * math.log10(sig_pow / res_pow)
    return LinkReport(errors / count, 100 * math.sqrt(err_pow / ref_pow), sinr, cfg.n_frames, count)
