"""Power spectral density, guard-band sizing and a memoryless PA model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ConfigError
from .numerology import Numerology
from .transceiver import FrameSignal

__all__ = [
    "PsdEstimate",
    "PaKind",
    "PaModel",
    "estimate_psd",
    "guard_subcarriers",
    "guard_overhead",
    "apply_pa",
    "centered_indices",
]


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Two-sided PSD in dB relative to the median in-band level.

    Attributes:
        freq_axis: Ascending frequencies in hertz.
        psd: Normalized PSD in dB (``-inf`` where the estimate is zero).
        band: In-band edges ``(f_lo, f_hi)`` in hertz.
        reference: Linear in-band median that maps to 0 dB, in power/Hz.
    """

    freq_axis: np.ndarray
    psd: np.ndarray
    band: tuple
    reference: float

    @property
    def linear(self) -> np.ndarray:
        """Un-normalized PSD in power per hertz."""
        return self.reference * 10 ** (self.psd / 10)


def centered_indices(active, M: int) -> np.ndarray:
    """Map subcarrier indices in ``[0, M)`` to signed offsets around DC."""
    a = np.asarray(active, dtype=int)
    return (a + M // 2) % M - M // 2


def estimate_psd(sig: FrameSignal, segment: int, overlap: float = 0.5, taper: str = "hann",
                 active=None) -> PsdEstimate:
    """Welch estimate of the two-sided PSD.

    Leading axes of ``sig.samples`` are independent frames; their
    periodograms are averaged.

    Args:
        segment: Segment length in samples.
        overlap: Fraction of overlap between segments, in ``[0, 1)``.
        taper: Any window name accepted by :func:`scipy.signal.get_window`.
        active: Occupied subcarriers; sets the band used for normalization.
            The whole spectrum counts as in-band when omitted.
    """
    if not 0 <= overlap < 1:
        raise ConfigError("overlap must lie in [0, 1)")
    x = np.asarray(sig.samples, dtype=complex)
    if x.shape[-1] < 2 * segment:
        raise ConfigError(f"signal of {x.shape[-1]} samples is shorter than two segments")
    fs = 1.0 / sig.Ts
    f, p = sps.welch(x, fs=fs, window=taper, nperseg=segment, noverlap=int(overlap * segment),
                     return_onesided=False, detrend=False, scaling="density", axis=-1)
    p = p.reshape(-1, f.size).mean(axis=0)
    f = np.fft.fftshift(f)
    p = np.fft.fftshift(p)
    F = fs / sig.M
    if active is None:
        band = (f[0], f[-1])
    else:
        k = centered_indices(active, sig.M)
        band = ((k.min() - 0.5) * F, (k.max() + 0.5) * F)
    inband = (f >= band[0]) & (f <= band[1])
    ref = float(np.median(p[inband]))
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10 * np.log10(p / ref) if ref > 0 else np.full_like(p, -np.inf)
    return PsdEstimate(f, db, band, ref)


def guard_subcarriers(psd: PsdEstimate, num: Numerology, mask_level: float = -50.0,
                      min_span: float = 64) -> int | None:
    """Single-side guard count after which the PSD stays below the mask.

    For each side the last frequency above ``mask_level`` is located and
    its distance from the band edge is rounded up to whole subcarrier
    spacings; the larger side is returned. ``None`` means the mask is
    still violated at the end of the analyzed span.
    """
    F = num.F
    lo, hi = psd.band
    if psd.freq_axis[-1] - hi < min_span * F or lo - psd.freq_axis[0] < min_span * F:
        raise ConfigError(f"PSD must extend {min_span:g} subcarriers beyond the band edges")
    if psd.reference <= 0:
        return 0
    over = psd.psd > mask_level
    f = psd.freq_axis
    guards = 0
    for side in (f > hi, f < lo):
        viol = over & side
        if not viol.any():
            continue
        dist = np.abs(f[viol] - (hi if side[-1] else lo)).max()
        if viol[-1] or viol[0]:
            return None
        guards = max(guards, math.ceil(dist / F - 1e-9))
    return guards


def guard_overhead(guards: int, occupied: int) -> float:
    """Two-sided guard overhead in percent of ``occupied`` subcarriers."""
    return 100.0 * 2 * guards / occupied


class PaKind(str, enum.Enum):
    IDEAL = "IDEAL"
    RAPP = "RAPP"


@dataclass(frozen=True)
class PaModel:
    """Memoryless amplitude compression.

    Attributes:
        kind: ``IDEAL`` (pass-through) or ``RAPP``.
        p: Rapp smoothness.
        backoff_db: Input back-off: mean input power sits this far below
            the saturation level.
    """

    kind: PaKind = PaKind.IDEAL
    p: float = 2.0
    backoff_db: float = 6.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PaKind(self.kind))
        if not self.p > 0:
            raise ConfigError("Rapp smoothness must be positive")


def apply_pa(sig: FrameSignal, pa: PaModel) -> FrameSignal:
    """Pass a frame through the amplifier model; length and origin are kept.

    The signal is scaled so that its mean power is ``backoff_db`` below
    saturation, compressed as ``x / (1 + |x|^(2p))^(1/(2p))`` and scaled
    back, so large back-off approaches the identity.
    """
    if pa.kind is PaKind.IDEAL:
        return sig
    x = np.asarray(sig.samples, dtype=complex)
    power = np.mean(np.abs(x) ** 2)
    if power == 0:
        return sig
    scale = 10 ** (-pa.backoff_db / 20) / math.sqrt(power)
    u = x * scale
    y = u / (1 + np.abs(u) ** (2 * pa.p)) ** (1 / (2 * pa.p))
    return sig.with_samples(y / scale)
