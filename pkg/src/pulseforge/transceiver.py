"""Polyphase filter-bank modulator and demodulator.

Synthesis computes one length-``M`` IDFT per symbol, repeats it
periodically under the pulse and overlap-adds the shaped segments at a
hop of ``N`` samples. Analysis windows each symbol span with the receive
pulse, folds it modulo ``M`` and applies one DFT. Leading array axes are
treated as independent frames.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .numerology import Numerology
from .pulses import PrototypeFilter

__all__ = [
    "SymbolGrid",
    "FrameSignal",
    "ComplexityReport",
    "modulate",
    "demodulate",
    "measure_evm",
    "complexity_count",
    "save_frame",
    "load_frame",
    "save_symbols",
    "load_symbols",
]


@dataclass(frozen=True, eq=False)
class SymbolGrid:
    """QAM symbols on active subcarriers.

    Attributes:
        symbols: Complex array ``(..., M_A, N_sym)``.
        active: Subcarrier index (in ``[0, M)``) of each row.
    """

    symbols: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=complex)
        act = np.asarray(self.active, dtype=int).ravel()
        if sym.ndim < 2 or sym.shape[-2] != act.size:
            raise ConfigError("symbols must have shape (..., len(active), N_sym)")
        if np.unique(act).size != act.size:
            raise ConfigError("active subcarrier indices must be unique")
        object.__setattr__(self, "symbols", sym)
        object.__setattr__(self, "active", act)

    @classmethod
    def full(cls, symbols) -> "SymbolGrid":
        symbols = np.asarray(symbols)
        return cls(symbols, np.arange(symbols.shape[-2]))

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[-1]

    def dense(self, M: int) -> np.ndarray:
        """Symbols scattered onto all ``M`` subcarriers, zeros elsewhere."""
        if self.active.size and (self.active.min() < 0 or self.active.max() >= M):
            raise ConfigError(f"active subcarriers must lie in [0, {M})")
        out = np.zeros(self.symbols.shape[:-2] + (M, self.n_symbols), dtype=complex)
        out[..., self.active, :] = self.symbols
        return out


@dataclass(frozen=True, eq=False)
class FrameSignal:
    """Sampled waveform; ``samples[..., origin]`` is time zero (center of symbol 0)."""

    samples: np.ndarray
    Ts: float
    origin: int
    M: int
    N: int

    @property
    def length(self) -> int:
        return self.samples.shape[-1]

    def with_samples(self, samples: np.ndarray, origin: int | None = None) -> "FrameSignal":
        return FrameSignal(samples, self.Ts, self.origin if origin is None else origin,
                           self.M, self.N)


def _check(p: PrototypeFilter, num: Numerology):
    if not math.isclose(p.Ts, num.Ts):
        raise ConfigError("pulse and numerology use different sampling periods")


def modulate(grid: SymbolGrid, g: PrototypeFilter, num: Numerology) -> FrameSignal:
    """Synthesize ``s[t] = sum a[m,n] g[t - nN] exp(2j pi m (t - nN) / M)``.

    The output starts at the first sample of symbol 0's pulse, so its
    origin equals ``g.center_index``; its length is
    ``(N_sym - 1) * N + L_g``.
    """
    _check(g, num)
    if grid.n_symbols < 1:
        raise ConfigError("symbol grid is empty")
    M, N = num.M, num.N
    A = grid.dense(M)
    n_sym = grid.n_symbols
    # per-symbol IDFT, periodically extended over the pulse support
    x = M * np.fft.ifft(A, axis=-2)
    u = g.times % M
    seg = np.swapaxes(x[..., u, :], -1, -2) * g.coeffs
    # polyphase overlap-add with hop N
    P = -(-g.length // N)
    seg = np.concatenate([seg, np.zeros(seg.shape[:-1] + (P * N - g.length,))], axis=-1)
    seg = seg.reshape(seg.shape[:-1] + (P, N))
    out = np.zeros(seg.shape[:-3] + (n_sym + P - 1, N), dtype=complex)
    for j in range(P):
        out[..., j:j + n_sym, :] += seg[..., :, j, :]
    length = (n_sym - 1) * N + g.length
    out = out.reshape(out.shape[:-2] + (-1,))[..., :length]
    return FrameSignal(out, num.Ts, g.center_index, M, N)


def demodulate(r: FrameSignal, gamma: PrototypeFilter, num: Numerology, n_symbols: int,
               active=None) -> SymbolGrid:
    """Correlate with ``gamma_{m,n}``: ``sum_t r[t] conj(gamma[t - nN]) exp(-2j pi m (t - nN)/M)``.

    Samples outside the recorded signal count as zero.

    Args:
        active: Subcarriers to return; all ``M`` by default.
    """
    _check(gamma, num)
    M, N = num.M, num.N
    if n_symbols < 1:
        raise ConfigError("n_symbols must be >= 1")
    idx = r.origin + np.arange(n_symbols)[:, None] * N + gamma.times[None, :]
    valid = (idx >= 0) & (idx < r.length)
    win = np.where(valid, r.samples[..., np.clip(idx, 0, r.length - 1)], 0.0)
    win = win * np.conj(gamma.coeffs)
    # fold modulo M (pad so that column j holds residue j), then one DFT per symbol
    lead = gamma.first % M
    total = -(-(lead + gamma.length) // M) * M
    pad = [(0, 0)] * (win.ndim - 1) + [(lead, total - lead - gamma.length)]
    folded = np.pad(win, pad).reshape(win.shape[:-1] + (-1, M)).sum(axis=-2)
    out = np.swapaxes(np.fft.fft(folded, axis=-1), -1, -2)
    act = np.arange(M) if active is None else np.asarray(active, dtype=int)
    return SymbolGrid(out[..., act, :], act)


def measure_evm(reference: SymbolGrid, received: SymbolGrid) -> float:
    """RMS error vector magnitude in percent, relative to the reference power."""
    a = reference.symbols
    b = received.symbols
    if a.shape != b.shape:
        raise ConfigError("symbol grids differ in shape")
    p_ref = np.mean(np.abs(a) ** 2)
    if p_ref == 0:
        raise ConfigError("reference grid has zero power")
    return float(100 * np.sqrt(np.mean(np.abs(b - a) ** 2) / p_ref))


@dataclass(frozen=True)
class ComplexityReport:
    dft_ops: int
    shaping_ops: int
    total: int
    ratio_vs_cpofdm: int

    def to_dict(self) -> dict:
        return {"dft_ops": self.dft_ops, "shaping_ops": self.shaping_ops,
                "total": self.total, "ratio": f"{self.ratio_vs_cpofdm}%"}


def complexity_count(num: Numerology, K: float | Fraction | None, flat_top: bool = False) -> ComplexityReport:
    """Complex multiplications per transmitted symbol.

    Args:
        num: Lattice; ``M`` must be a power of two.
        K: Overlapping factor, or ``None`` for the CP-OFDM baseline which
            has no shaping cost.
        flat_top: Count only the ``2*(N - M)`` non-unity taps of a
            flat-top pulse instead of ``K*N``.
    """
    M, N = num.M, num.N
    if M & (M - 1):
        raise ConfigError("M must be a power of two")
    dft = M * int(math.log2(M))
    if K is None:
        shaping = 0
    elif flat_top:
        shaping = 2 * (N - M)
    else:
        if K < 1:
            raise ConfigError("K must be >= 1")
        shaping = int(round(float(K) * N))
    total = dft + shaping
    return ComplexityReport(dft, shaping, total, int(round(100 * total / dft)))


def save_frame(path, sig: FrameSignal) -> tuple[Path, Path]:
    """Interleaved little-endian float64 re/im samples plus a JSON sidecar."""
    path = Path(path)
    s = np.asarray(sig.samples, dtype=complex).ravel()
    inter = np.empty(2 * s.size, dtype="<f8")
    inter[0::2] = s.real
    inter[1::2] = s.imag
    inter.tofile(path)
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps({"Ts": sig.Ts, "origin": sig.origin, "M": sig.M, "N": sig.N},
                                  indent=2))
    return path, sidecar


def load_frame(path) -> FrameSignal:
    path = Path(path)
    raw = np.fromfile(path, dtype="<f8")
    meta = json.loads(path.with_suffix(".json").read_text())
    return FrameSignal(raw[0::2] + 1j * raw[1::2], float(meta["Ts"]), int(meta["origin"]),
                       int(meta["M"]), int(meta["N"]))


def save_symbols(path, grid: SymbolGrid) -> None:
    """CSV with columns ``m,n,re,im`` (single frame)."""
    if grid.symbols.ndim != 2:
        raise ConfigError("only single-frame grids can be written")
    lines = ["m,n,re,im"]
    for i, m in enumerate(grid.active):
        for n in range(grid.n_symbols):
            z = grid.symbols[i, n]
            lines.append(f"{m},{n},{z.real:.17g},{z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_symbols(path) -> SymbolGrid:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    m = data[:, 0].astype(int)
    n = data[:, 1].astype(int)
    active = np.unique(m)
    sym = np.zeros((active.size, n.max() + 1), dtype=complex)
    sym[np.searchsorted(active, m), n] = data[:, 2] + 1j * data[:, 3]
    return SymbolGrid(sym, active)
