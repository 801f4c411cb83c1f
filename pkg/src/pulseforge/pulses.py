"""Prototype filters: construction, windows, localization and ambiguity.

Every pulse carries an explicit ``center_index``; sample ``k`` of
``coeffs`` sits at time ``(k - center_index) * Ts``. Pulses are built
non-causal and centered, which keeps ambiguity and orthogonality
computations symmetric. Constructors place the center at ``length // 2``.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erfc

from .errors import ConfigError
from .numerology import Numerology

__all__ = [
    "PrototypeFilter",
    "WindowKind",
    "WindowSpec",
    "LocalizationReport",
    "rect_pulse",
    "gaussian_pulse",
    "window",
    "cp_ofdm_pair",
    "zp_ofdm_pair",
    "wofdm_pulse",
    "localization",
    "cross_ambiguity",
    "save_pulse",
    "load_pulse",
]

POWER_TOL = 1e-12
GAUSS_TAIL_WARN = 1e-6
FREQ_PAD = 8


@dataclass(frozen=True, eq=False)
class PrototypeFilter:
    """Unit-power discrete pulse.

    Attributes:
        coeffs: Complex filter taps.
        center_index: Index of the sample at ``t = 0``.
        Ts: Sampling period in seconds.
    """

    coeffs: np.ndarray
    center_index: int
    Ts: float = 1.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center_index", int(self.center_index))
        if c.size < 1:
            raise ConfigError("pulse must have at least one coefficient")
        if not 0 <= self.center_index < c.size:
            raise ConfigError(f"center_index {self.center_index} outside [0, {c.size})")
        energy = float(np.vdot(c, c).real)
        if abs(energy - 1.0) > POWER_TOL:
            raise ConfigError(f"pulse energy is {energy!r}, expected unit power")

    @classmethod
    def from_samples(cls, samples, center_index: int | None = None,
                     Ts: float = 1.0) -> "PrototypeFilter":
        """Normalize arbitrary samples to unit power."""
        s = np.asarray(samples, dtype=complex).ravel()
        energy = np.vdot(s, s).real
        if energy <= 0:
            raise ConfigError("cannot normalize an all-zero pulse")
        if center_index is None:
            center_index = s.size // 2
        return cls(s / math.sqrt(energy), center_index, Ts)

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def length(self) -> int:
        return self.coeffs.size

    @property
    def first(self) -> int:
        """Time index (samples) of the first coefficient."""
        return -self.center_index

    @property
    def times(self) -> np.ndarray:
        """Integer sample times of the coefficients."""
        return np.arange(self.length) - self.center_index

    def span(self, start: int, length: int) -> np.ndarray:
        """Pulse values on the sample times ``start .. start+length-1``."""
        out = np.zeros(length, dtype=complex)
        lo = max(start, self.first)
        hi = min(start + length, self.first + self.length)
        if hi > lo:
            out[lo - start:hi - start] = self.coeffs[lo - self.first:hi - self.first]
        return out

    def padded(self, length: int) -> "PrototypeFilter":
        """Symmetric zero padding to ``length`` with a re-centered index."""
        if length < self.length:
            raise ConfigError("padded length is shorter than the pulse")
        c = length // 2
        return PrototypeFilter(self.span(-c, length), c, self.Ts)

    def cropped(self, length: int) -> "PrototypeFilter":
        """Centered window of ``length`` samples, renormalized."""
        c = length // 2
        return PrototypeFilter.from_samples(self.span(-c, length), c, self.Ts)

    def conj(self) -> "PrototypeFilter":
        return PrototypeFilter(self.coeffs.conj(), self.center_index, self.Ts)

    def inner(self, other: "PrototypeFilter") -> complex:
        """``<self, other> = sum self * conj(other)`` on the common time axis."""
        lo = min(self.first, other.first)
        hi = max(self.first + self.length, other.first + other.length)
        return complex(np.vdot(other.span(lo, hi - lo), self.span(lo, hi - lo)))

    def distance(self, other: "PrototypeFilter") -> float:
        """Euclidean distance on the common time axis."""
        lo = min(self.first, other.first)
        hi = max(self.first + self.length, other.first + other.length)
        return float(np.linalg.norm(self.span(lo, hi - lo) - other.span(lo, hi - lo)))


def rect_pulse(length: int, Ts: float = 1.0) -> PrototypeFilter:
    """Unit-power rectangle of ``length`` samples centered at ``length // 2``."""
    if length < 1:
        raise ConfigError("length must be >= 1")
    return PrototypeFilter(np.full(length, 1.0 / math.sqrt(length)), length // 2, Ts)


def gaussian_pulse(alpha: float, length: int, Ts: float = 1.0,
                   scale: float | None = None) -> PrototypeFilter:
    """Sampled Gaussian ``(2*alpha)**0.25 * exp(-pi*alpha*t**2)``.

    Args:
        alpha: Decay factor, larger is shorter in time.
        length: Number of samples, at least 8.
        Ts: Sampling period attached to the result.
        scale: Samples per unit of the normalized time ``t``. Defaults to
            ``sqrt(length)``; lattice designs pass a scale tied to
            the symbol period.

    The pulse is truncated to ``length`` samples and renormalized; a
    warning is issued when truncation drops more than 1e-6 of the energy.
    """
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    if length < 8:
        raise ConfigError("gaussian length must be >= 8")
    if scale is None:
        scale = math.sqrt(length)
    c = length // 2
    t = (np.arange(length) - c) / scale
    g = (2 * alpha) ** 0.25 * np.exp(-math.pi * alpha * t**2)
    # energy of |g|^2 outside the shorter half-support
    half = min(c, length - 1 - c) / scale
    lost = erfc(math.sqrt(2 * math.pi * alpha) * half)
    if lost > GAUSS_TAIL_WARN:
        warnings.warn(f"gaussian truncation drops {lost:.2e} of the pulse energy", stacklevel=2)
    return PrototypeFilter.from_samples(g, c, Ts)


class WindowKind(str, enum.Enum):
    RECT = "RECT"
    RC = "RC"
    RRC = "RRC"
    HANNING = "HANNING"


@dataclass(frozen=True)
class WindowSpec:
    """Taper description; ``beta`` is the roll-off for RC/RRC."""

    kind: WindowKind
    length: int
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.length < 1:
            raise ConfigError("window length must be >= 1")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"roll-off must lie in [0, 1], got {self.beta}")


def window(spec: WindowSpec) -> np.ndarray:
    """Real non-negative taper of ``spec.length`` samples.

    RC(beta) is flat over a fraction ``1 - beta`` of its length and falls
    with raised-cosine flanks over ``beta/2`` at each end, evaluated at
    sample midpoints. RRC is its pointwise square root. HANNING omits the
    zero end points.
    """
    L = spec.length
    if spec.kind is WindowKind.RECT:
        return np.ones(L)
    if spec.kind is WindowKind.HANNING:
        k = np.arange(1, L + 1)
        return 0.5 * (1.0 - np.cos(2 * np.pi * k / (L + 1)))
    x = np.abs((np.arange(L) + 0.5) / L - 0.5)
    w = np.ones(L)
    beta = spec.beta
    if beta > 0:
        edge = (1.0 - beta) / 2
        ramp = x > edge
        w[ramp] = 0.5 * (1.0 + np.cos(np.pi * (x[ramp] - edge) / (beta / 2)))
    if spec.kind is WindowKind.RRC:
        return np.sqrt(w)
    return w


def cp_ofdm_pair(num: Numerology) -> tuple[PrototypeFilter, PrototypeFilter]:
    """Half-prefixed/half-suffixed CP-OFDM transmit and receive rectangles.

    The transmit pulse spans ``N`` samples and the receive pulse the ``M``
    samples in its middle, so ``<gamma, g> = sqrt(M/N)``.
    """
    return rect_pulse(num.N, num.Ts), rect_pulse(num.M, num.Ts)


def zp_ofdm_pair(num: Numerology, n_zp: int) -> tuple[PrototypeFilter, PrototypeFilter]:
    """Zero-padded OFDM: transmit rectangle of ``N``, receive of ``N + n_zp``."""
    if n_zp < 0:
        raise ConfigError("zero-padding length must be >= 0")
    return rect_pulse(num.N, num.Ts), rect_pulse(num.N + n_zp, num.Ts)


def wofdm_pulse(num: Numerology, seed_window, design_length: int | None = None) -> PrototypeFilter:
    """Windowed-OFDM pulse: rectangle of ``N`` convolved with a seed window.

    Args:
        num: Lattice; only ``N`` is used.
        seed_window: A :class:`WindowSpec` (scaled to unit sum) or explicit
            coefficients that already sum to one.
        design_length: Optional total length after symmetric zero padding.

    The result has ``N + N0 - 1`` taps (before padding) with a flat
    midsection of ``N - N0 + 1`` samples.
    """
    if isinstance(seed_window, WindowSpec):
        w = window(seed_window)
        w = w / w.sum()
    else:
        w = np.asarray(seed_window, dtype=float).ravel()
        if abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError(f"seed window must sum to 1, sums to {w.sum()!r}")
    if w.size > num.N - num.M and num.N > num.M:
        warnings.warn("seed window longer than the prefix", stacklevel=2)
    g = PrototypeFilter.from_samples(np.convolve(np.ones(num.N), w), None, num.Ts)
    if design_length is not None:
        g = g.padded(design_length)
    return g


@dataclass(frozen=True)
class LocalizationReport:
    sigma_t: float
    sigma_f: float
    xi: float


def localization(p: PrototypeFilter) -> LocalizationReport:
    """Time/frequency spreads and the Heisenberg parameter of a pulse.

    Second moments are taken about the centers of gravity of ``|g|^2`` and
    ``|G|^2``. The spectrum is sampled with 8x zero padding over one
    Nyquist band centered on the spectral centroid.
    """
    e = np.abs(p.coeffs) ** 2
    t = p.times * p.Ts
    t0 = np.sum(t * e) / e.sum()
    sigma_t = math.sqrt(np.sum((t - t0) ** 2 * e) / e.sum())

    nfft = FREQ_PAD * p.length
    spec = np.abs(np.fft.fft(p.coeffs, nfft)) ** 2
    f = np.fft.fftfreq(nfft, d=p.Ts)
    fs = 1.0 / p.Ts
    # circular centroid, then unwrap frequencies around it
    phase = np.angle(np.sum(spec * np.exp(2j * np.pi * f / fs)))
    f0 = phase / (2 * np.pi) * fs
    fr = (f - f0 + fs / 2) % fs - fs / 2
    sigma_f = math.sqrt(np.sum(fr**2 * spec) / spec.sum())
    if sigma_t == 0 or sigma_f == 0:
        raise ConfigError("pulse has a degenerate second moment")
    xi = 1.0 / (4 * math.pi * sigma_t * sigma_f)
    return LocalizationReport(sigma_t, sigma_f, xi)


def cross_ambiguity(g: PrototypeFilter, gamma: PrototypeFilter, tau, nu):
    """Discrete cross-ambiguity ``sum_t gamma[t] conj(g[t - tau]) exp(-2j*pi*nu*t)``.

    Args:
        tau: Integer delay(s) in samples.
        nu: Doppler(s) in cycles per sample.

    Scalars give a complex number; array inputs give a
    ``(len(tau), len(nu))`` grid.
    """
    if not math.isclose(g.Ts, gamma.Ts):
        raise ConfigError("pulses must share the sampling period")
    taus = np.atleast_1d(np.asarray(tau))
    nus = np.atleast_1d(np.asarray(nu, dtype=float))
    if not np.all(taus == np.round(taus)):
        raise ConfigError("delays must be integer samples")
    taus = taus.astype(int)
    t = gamma.times
    phases = np.exp(-2j * np.pi * np.outer(t, nus))
    out = np.empty((taus.size, nus.size), dtype=complex)
    for i, d in enumerate(taus):
        prod = gamma.coeffs * np.conj(g.span(gamma.first - d, gamma.length))
        out[i] = prod @ phases
    if np.ndim(tau) == 0 and np.ndim(nu) == 0:
        return complex(out[0, 0])
    return out


def save_pulse(path, p: PrototypeFilter) -> tuple[Path, Path]:
    """Write ``index,real,imag`` CSV plus a ``.json`` sidecar."""
    path = Path(path)
    rows = "\n".join(f"{k},{z.real:.17g},{z.imag:.17g}" for k, z in enumerate(p.coeffs))
    path.write_text("index,real,imag\n" + rows + "\n")
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps({"Ts": p.Ts, "center_index": p.center_index}, indent=2))
    return path, sidecar


def load_pulse(path, normalize: bool = False) -> PrototypeFilter:
    """Read a pulse written by :func:`save_pulse`."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    order = np.argsort(data[:, 0])
    coeffs = data[order, 1] + 1j * data[order, 2]
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    center = int(meta.get("center_index", coeffs.size // 2))
    Ts = float(meta.get("Ts", 1.0))
    if normalize:
        return PrototypeFilter.from_samples(coeffs, center, Ts)
    return PrototypeFilter(coeffs, center, Ts)
