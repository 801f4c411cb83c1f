"""Time-frequency lattice definitions and numerology derivation.

A lattice is described by the FFT size ``M``, the number of samples per
symbol period ``N`` and the sampling period ``Ts``. Symbol period and
subcarrier spacing follow as ``T = N*Ts`` and ``F = 1/(M*Ts)`` so that the
lattice density is ``T*F = N/M``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "Numerology",
    "ChannelCharacteristics",
    "Quantization",
    "derive_cp_ofdm_numerology",
    "derive_tf_localized_numerology",
]

UNDERSPREAD_WARN = 0.1


@dataclass(frozen=True)
class Numerology:
    """Rectangular time-frequency lattice.

    Attributes:
        M: Subcarrier count / FFT size in samples.
        N: Samples per symbol period.
        Ts: Sampling period in seconds.
    """

    M: int
    N: int
    Ts: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or int(self.N) != self.N:
            raise ConfigError("M and N must be integers")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        if self.M < 1:
            raise ConfigError(f"M must be >= 1, got {self.M}")
        if self.N < self.M:
            raise ConfigError(f"N must be >= M (TF >= 1), got N={self.N}, M={self.M}")
        if not self.Ts > 0:
            raise ConfigError(f"Ts must be positive, got {self.Ts}")

    @property
    def T(self) -> float:
        return self.N * self.Ts

    @property
    def F(self) -> float:
        return 1.0 / (self.M * self.Ts)

    @property
    def TF(self) -> float:
        return self.N / self.M

    @property
    def Tcp(self) -> float:
        """Prefix duration ``T - 1/F`` in seconds."""
        return (self.N - self.M) * self.Ts

    @property
    def n_cp(self) -> int:
        return self.N - self.M

    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "Ts": self.Ts, "T": self.T,
                "F": self.F, "TF": self.TF, "Tcp": self.Tcp}


@dataclass(frozen=True)
class ChannelCharacteristics:
    """Maximum excess delay (s) and maximum Doppler shift (Hz)."""

    tau_max: float
    nu_max: float

    def __post_init__(self):
        if self.tau_max < 0 or self.nu_max < 0:
            raise ConfigError("tau_max and nu_max must be non-negative")
        spread = self.tau_max * self.nu_max
        if spread > UNDERSPREAD_WARN:
            warnings.warn(
                f"channel is not underspread: tau_max*nu_max = {spread:.3g}",
                stacklevel=2,
            )


@dataclass(frozen=True)
class Quantization:
    """Relative errors left after snapping a lattice to integer samples.

    ``ratio_error`` is ``(T/F) / (tau_max/nu_max) - 1`` and ``tf_error``
    is ``(N/M) / TF_requested - 1``.
    """

    ratio_error: float
    tf_error: float


def _samples(x: float) -> int:
    # tolerate float noise when x is an integer in exact arithmetic
    r = round(x)
    if abs(x - r) <= 1e-9 * abs(x):
        return int(r)
    return int(math.ceil(x))


def derive_cp_ofdm_numerology(chars: ChannelCharacteristics, F: float, Ts: float,
                              tf_cap: float = 2.0) -> Numerology:
    """CP-OFDM numerology whose prefix covers the maximum excess delay.

    ``M`` follows from the caller's subcarrier spacing and sampling period;
    ``N`` is the smallest integer with ``(N - M)*Ts >= tau_max``. Rounding
    always goes up so the prefix bound is never violated.

    Raises:
        ConfigError: if ``1/(F*Ts)`` is not an integer or the resulting
            ``N/M`` exceeds ``tf_cap``.
    """
    if not (F > 0 and Ts > 0):
        raise ConfigError("F and Ts must be positive")
    m_float = 1.0 / (F * Ts)
    M = round(m_float)
    if M < 1 or abs(m_float - M) > 1e-6 * m_float:
        raise ConfigError(f"1/(F*Ts) = {m_float:.6g} is not an integer FFT size")
    N = M + _samples(chars.tau_max / Ts)
    if N / M > tf_cap:
        raise ConfigError(
            f"tau_max = {chars.tau_max:g} s needs TF = {N / M:.4g} > cap {tf_cap:g}")
    if N == M:
        warnings.warn("tau_max = 0 gives a prefix-free lattice (TF = 1)", stacklevel=2)
    return Numerology(M=M, N=N, Ts=Ts)


def _joint_log_error(N, M, Ts, ratio, TF):
    N = np.asarray(N, dtype=float)
    M = np.asarray(M, dtype=float)
    return np.abs(np.log(N * M * Ts**2 / ratio)) + np.abs(np.log(N / M / TF))


def derive_tf_localized_numerology(chars: ChannelCharacteristics, TF: float, Ts: float,
                                   max_size: int = 4096) -> tuple[Numerology, Quantization]:
    """Numerology matched to the channel's delay/Doppler ratio.

    The ideal continuous values are ``T = sqrt(TF*tau/nu)`` and
    ``F = sqrt(TF*nu/tau)``. The integer pair ``(N, M)`` minimizes the sum
    of absolute log errors of ``T/F`` against ``tau/nu`` and of ``N/M``
    against ``TF`` among the integer neighbours of the ideal point, subject
    to ``N > M``.

    Returns:
        The quantized numerology and its residual relative errors.
    """
    if not TF > 1:
        raise ConfigError(f"TF must exceed 1, got {TF}")
    if chars.nu_max <= 0:
        raise ConfigError("nu_max = 0 leaves T/F undefined; use derive_cp_ofdm_numerology")
    if chars.tau_max <= 0:
        raise ConfigError("tau_max must be positive")
    ratio = chars.tau_max / chars.nu_max
    T = math.sqrt(TF * ratio)
    F = math.sqrt(TF / ratio)
    m0 = 1.0 / (F * Ts)
    n0 = T / Ts
    if m0 < 1 or n0 > max_size:
        raise ConfigError(f"ideal lattice (N={n0:.4g}, M={m0:.4g}) is outside [1, {max_size}]")
    # the joint error is convex in (log N, log M); integer neighbours suffice
    best = None
    for M in range(max(1, math.floor(m0) - 1), math.ceil(m0) + 2):
        for N in range(max(M + 1, math.floor(n0) - 1), math.ceil(n0) + 2):
            if N > max_size or M > max_size:
                continue
            err = float(_joint_log_error(N, M, Ts, ratio, TF))
            if best is None or err < best[0]:
                best = (err, N, M)
    if best is None:
        raise ConfigError("no admissible integer lattice found")
    _, N, M = best
    num = Numerology(M=M, N=N, Ts=Ts)
    quant = Quantization(ratio_error=num.T / num.F / ratio - 1.0, tf_error=num.TF / TF - 1.0)
    return num, quant
