"""Orthogonalization on a Gabor lattice and the orthogonalize-truncate designer.

For ``TF = N/M > 1`` the system ``{g[t - nN] exp(2j*pi*m*(t - nN)/M)}`` is
undersampled, so orthogonalizing it is the same as making the adjoint
system (time step ``M``, ``N`` channels) a tight frame. With that frame
operator ``S`` the orthogonal pulse is ``S^{-1/2} g`` up to scale.

The computation runs on a cyclic group of length ``L``, a multiple of
``lcm(N, M)`` that is at least the working length. ``S`` is a Walnut
operator ``(S f)[t] = N * sum_k W_k[t mod M] f[t - kN]``, so it only
couples samples in the same residue class mod ``N``. Each class gives an
``L/N`` square block, and classes that differ by a multiple of ``N`` mod
``M`` share one block up to a cyclic relabelling, which leaves
``gcd(N, M)`` eigendecompositions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, ConvergenceWarning, NumericalError
from .numerology import Numerology
from .pulses import PrototypeFilter, WindowKind, WindowSpec, gaussian_pulse, window

__all__ = [
    "GaborSystem",
    "OrthoDesignConfig",
    "OrthoDesignResult",
    "working_length",
    "orthogonalize",
    "frame_operator_dense",
    "sir_self",
    "design_orthogonal",
]

SIR_CAP_DB = 300.0
COND_LIMIT = 1e12
DENSE_LIMIT = 1024


@dataclass(frozen=True)
class GaborSystem:
    pulse: PrototypeFilter
    num: Numerology

    def __post_init__(self):
        if not self.num.N > self.num.M:
            raise ConfigError("orthogonalization needs TF = N/M > 1")


@dataclass(frozen=True)
class OrthoDesignConfig:
    """Settings for :func:`design_orthogonal`.

    ``window`` gives the truncation taper kind and roll-off; its length is
    forced to ``round(K*N)``. ``scale`` is the Gaussian time unit in
    samples; the default ``K*N/8`` puts the truncation edges at four
    time units from the center, so ``alpha = 1`` seeds a pulse that fits
    the window and ``alpha < 1`` a wider one.
    """

    alpha: float = 1.0
    epsilon: float = 1e-4
    max_iters: int = 50
    window: WindowSpec | None = None
    K: float | Fraction = 2
    working_length: int | None = None
    scale: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")

    def pulse_length(self, num: Numerology) -> int:
        return int(round(float(self.K) * num.N))

    def truncation_window(self, num: Numerology) -> np.ndarray:
        L = self.pulse_length(num)
        w = self.window or WindowSpec(WindowKind.RECT, L)
        return window(WindowSpec(w.kind, L, w.beta))


@dataclass
class OrthoDesignResult:
    pulse: PrototypeFilter
    iterations: int
    final_delta: float
    sir_self_db: float
    converged: bool
    deltas: list = field(default_factory=list)
    sir_history: list = field(default_factory=list)

    def report(self) -> dict:
        return {"iterations": self.iterations, "final_delta": self.final_delta,
                "sir_self_dB": self.sir_self_db, "converged": self.converged,
                "sir_history_dB": list(self.sir_history)}


def working_length(num: Numerology, minimum: int | None = None) -> int:
    """Smallest multiple of ``lcm(N, M)`` that is at least ``minimum`` (default 8N)."""
    if minimum is None:
        minimum = 8 * num.N
    base = math.lcm(num.N, num.M)
    return base * max(1, -(-minimum // base))


def _to_cycle(p: PrototypeFilter, L: int) -> np.ndarray:
    if p.length > L:
        raise ConfigError(f"pulse length {p.length} exceeds cycle length {L}")
    x = np.zeros(L, dtype=complex)
    x[p.times % L] = p.coeffs
    return x


def _from_cycle(x: np.ndarray, Ts: float) -> PrototypeFilter:
    L = x.size
    c = L // 2
    return PrototypeFilter.from_samples(x[(np.arange(L) - c) % L], c, Ts)


def _walnut(x: np.ndarray, N: int, M: int, extent: int):
    """Coefficients ``W_k[rho] = sum_j x[rho + jM] conj(x[rho + jM - kN])``."""
    L = x.size
    A = L // N
    kmax = -(-extent // N)
    ks = range(A) if 2 * kmax + 1 >= A else [k % A for k in range(-kmax, kmax + 1)]
    out = {}
    for k in ks:
        y = x * np.conj(np.roll(x, k * N))
        out[k] = y.reshape(L // M, M).sum(axis=0)
    return out


def frame_operator_dense(x: np.ndarray, N: int, M: int) -> np.ndarray:
    """Dense adjoint-lattice frame operator on the cycle of ``len(x)``."""
    L = x.size
    S = np.zeros((L, L), dtype=complex)
    t = np.arange(L)
    for k, w in _walnut(x, N, M, L).items():
        S[t, (t - k * N) % L] += N * w[t % M]
    return S


def _check_spectrum(lam_min: float, lam_max: float):
    if not lam_min > 0 or lam_max / lam_min > COND_LIMIT:
        raise NumericalError(
            f"frame operator is singular (eigenvalues {lam_min:.3g}..{lam_max:.3g}); "
            "lattice and pulse do not admit an orthogonalization")


def _inv_sqrt_dense(x: np.ndarray, N: int, M: int) -> np.ndarray:
    lam, V = np.linalg.eigh(frame_operator_dense(x, N, M))
    _check_spectrum(lam[0], lam[-1])
    return V @ ((V.conj().T @ x) / np.sqrt(lam))


def _inv_sqrt_factored(x: np.ndarray, N: int, M: int, extent: int) -> np.ndarray:
    L = x.size
    Q = L // N
    c = math.gcd(N, M)
    q = M // c
    W = _walnut(x, N, M, extent)
    # coset s holds x[s + jN], j < Q; on it S acts as A_s[j, j'] = N W_{j-j'}[(s + jN) mod M]
    j = np.arange(Q)
    diff = (j[:, None] - j[None, :]) % Q
    reps = []
    lam_min, lam_max = np.inf, 0.0
    for r in range(c):
        rho = (r + j * N) % M
        A = np.zeros((Q, Q), dtype=complex)
        for k, w in W.items():
            A += np.where(diff == k % Q, N * w[rho][:, None], 0.0)
        lam, V = np.linalg.eigh(0.5 * (A + A.conj().T))
        lam_min, lam_max = min(lam_min, lam[0]), max(lam_max, lam[-1])
        _check_spectrum(lam_min, lam_max)
        reps.append((V / np.sqrt(lam)) @ V.conj().T)
    _check_spectrum(lam_min, lam_max)

    # coset s = r + j0*N (mod M) sees A_r relabelled by a cyclic shift of j0
    s = np.arange(N)
    r_of = s % c
    inv = pow(N // c, -1, q) if q > 1 else 0
    j0 = ((s - r_of) // c * inv) % q
    F = x.reshape(Q, N)
    out = np.empty_like(F)
    for r in range(c):
        cols = np.flatnonzero(r_of == r)
        idx = (j[:, None] - j0[cols][None, :]) % Q
        G = F[idx, cols[None, :]]
        Y = reps[r] @ G
        back = (j[:, None] + j0[cols][None, :]) % Q
        out[:, cols] = Y[back, np.arange(cols.size)[None, :]]
    return out.reshape(L)


def orthogonalize(sys: GaborSystem, working: int | None = None,
                  output_length: int | None = None, method: str = "auto") -> PrototypeFilter:
    """Orthogonal pulse generated from ``sys.pulse`` on the lattice ``sys.num``.

    Args:
        sys: Pulse and lattice (``N > M``).
        working: Minimum cycle length; rounded up to a multiple of
            ``lcm(N, M)``. Defaults to ``8*N``.
        output_length: If given, crop the result to this many centered
            samples and renormalize.
        method: ``"factored"``, ``"dense"`` or ``"auto"`` (dense up to 1024).

    Raises:
        NumericalError: when the frame operator is numerically singular.
    """
    num = sys.num
    L = working_length(num, max(working or 8 * num.N, sys.pulse.length))
    x = _to_cycle(sys.pulse, L)
    if method == "auto":
        method = "dense" if L <= DENSE_LIMIT else "factored"
    if method == "dense":
        h = _inv_sqrt_dense(x, num.N, num.M)
    elif method == "factored":
        h = _inv_sqrt_factored(x, num.N, num.M, sys.pulse.length)
    else:
        raise ConfigError(f"unknown method {method!r}")
    out = _from_cycle(h, sys.pulse.Ts)
    if output_length is not None:
        out = out.cropped(output_length)
    return out


def _lattice_products(tx: PrototypeFilter, rx: PrototypeFilter, num: Numerology,
                      n_max: int) -> np.ndarray:
    """``|<rx_{m,n}, tx>|^2`` for all ``m`` residues and ``|n| <= n_max``."""
    M, N = num.M, num.N
    out = np.empty((2 * n_max + 1, M))
    s = rx.times
    for i, n in enumerate(range(-n_max, n_max + 1)):
        prod = rx.coeffs * np.conj(tx.span(rx.first + n * N, rx.length))
        folded = np.bincount(s % M, weights=prod.real, minlength=M) \
            + 1j * np.bincount(s % M, weights=prod.imag, minlength=M)
        out[i] = np.abs(M * np.fft.ifft(folded)) ** 2
    return out


def sir_self(pulse_tx: PrototypeFilter, pulse_rx: PrototypeFilter, num: Numerology,
             neighborhood: int = 1) -> float:
    """Self-interference ratio of a pulse pair on an ideal channel, in dB.

    Signal is ``|<rx, tx>|^2``; interference sums ``|<rx_{m,n}, tx>|^2``
    over all subcarrier residues and every symbol shift up to
    ``neighborhood`` times the largest overlapping shift. Exact
    (bi)orthogonality is reported as the 300 dB cap.
    """
    if neighborhood < 1:
        raise ConfigError("neighborhood must be >= 1")
    n_max = neighborhood * -(-(pulse_tx.length + pulse_rx.length) // num.N)
    p = _lattice_products(pulse_tx, pulse_rx, num, n_max)
    signal = p[n_max, 0]
    p[n_max, 0] = 0.0
    interference = p.sum()
    if interference <= signal * 10 ** (-SIR_CAP_DB / 10):
        return SIR_CAP_DB
    return float(10 * np.log10(signal / interference))


def design_orthogonal(cfg: OrthoDesignConfig, num: Numerology) -> OrthoDesignResult:
    """Iterative orthogonalize-then-truncate pulse design.

    Starts from a Gaussian with decay ``cfg.alpha`` on the working length,
    then repeats ``g <- window * orth(g)`` (renormalized) until the
    relative change drops to ``cfg.epsilon``. When ``max_iters`` is hit
    the iterate with the best self-interference ratio is returned and a
    :class:`ConvergenceWarning` is issued.
    """
    if not num.N > num.M:
        raise ConfigError("orthogonal design needs TF = N/M > 1")
    Lp = cfg.pulse_length(num)
    w = cfg.truncation_window(num)
    L = working_length(num, max(cfg.working_length or 8 * num.N, Lp))
    scale = cfg.scale or Lp / 8
    g = gaussian_pulse(cfg.alpha, L, num.Ts, scale=scale)

    deltas, sirs = [], []
    best = None
    converged = False
    for it in range(1, cfg.max_iters + 1):
        h = orthogonalize(GaborSystem(g, num), working=L)
        c = Lp // 2
        new = PrototypeFilter.from_samples(h.span(-c, Lp) * w, c, num.Ts)
        delta = new.distance(g)
        sir = sir_self(new, new, num)
        deltas.append(delta)
        sirs.append(sir)
        if best is None or sir >= best[1]:
            best = (new, sir, it, delta)
        g = new
        if delta <= cfg.epsilon:
            converged = True
            break
    if converged:
        return OrthoDesignResult(g, it, delta, sirs[-1], True, deltas, sirs)
    warnings.warn(f"no convergence within {cfg.max_iters} iterations "
                  f"(last relative change {deltas[-1]:.3g})", ConvergenceWarning, stacklevel=2)
    pulse, sir, it_best, d = best
    return OrthoDesignResult(pulse, it_best, d, sir, False, deltas, sirs)
