"""Statistical SINR of a pulse pair over a WSSUS channel and pulse optimizers.

With path gains of variances ``c_p`` the useful power for symbol ``(0, 0)``
is ``sum_p c_p |<G00[:, p], gamma>|^2``; interference sums the same term
over every other lattice point. Subcarrier sums run over all ``M``
residues, symbol sums over every shift with overlapping support, so the
interference sum is exact rather than truncated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channel import ScatteringStats, brick_scattering
from .errors import ConfigError, ConvergenceWarning, NumericalError
from .numerology import Numerology
from .pulses import PrototypeFilter

__all__ = [
    "SinrConfig",
    "SinrGrid",
    "EigenSolution",
    "JointDesignResult",
    "sinr_discrete",
    "sinr_contour",
    "quadratic_forms",
    "max_sinr_receiver",
    "max_sinr_transmitter",
    "joint_design",
]

SINR_CAP_DB = 300.0
RIDGE = 1e-12


@dataclass(frozen=True)
class SinrConfig:
    """Noise level and optional symbol-range override.

    Attributes:
        noise_power: Linear noise variance per sample; 0 gives the SIR.
        n_range: Half-width of the symbol shifts summed as interference.
            ``None`` uses every shift whose support overlaps the receiver.
        grid: Path grid used by :func:`sinr_contour`.
    """

    noise_power: float = 0.0
    n_range: int | None = None
    grid: tuple = (8, 8)

    def __post_init__(self):
        if self.noise_power < 0:
            raise ConfigError("noise_power must be non-negative")
        if self.n_range is not None and self.n_range < 1:
            raise ConfigError("n_range must be >= 1")

    @classmethod
    def from_db(cls, noise_db: float | None, **kw) -> "SinrConfig":
        return cls(0.0 if noise_db is None else 10 ** (noise_db / 10), **kw)


@dataclass(frozen=True)
class SinrGrid:
    tau_axis: np.ndarray
    nu_axis: np.ndarray
    values: np.ndarray

    def rows(self):
        """``(tau, nu, sinr_dB)`` triples in row-major order."""
        for i, t in enumerate(self.tau_axis):
            for j, v in enumerate(self.nu_axis):
                yield float(t), float(v), float(self.values[i, j])


@dataclass(frozen=True)
class EigenSolution:
    """Optimal pulse of a generalized Rayleigh quotient.

    ``zeta_max`` is linear. ``regularized`` is set when a ridge was added
    to make the denominator positive definite.
    """

    gamma_max: PrototypeFilter
    zeta_max: float
    regularized: bool = False
    residual: float = 0.0

    @property
    def zeta_max_db(self) -> float:
        return _db(self.zeta_max)


def _db(x: float) -> float:
    return SINR_CAP_DB if x >= 10 ** (SINR_CAP_DB / 10) else float(10 * np.log10(x))


def _span(p: PrototypeFilter | int) -> tuple[int, int]:
    if isinstance(p, PrototypeFilter):
        return p.first, p.length
    L = int(p)
    return -(L // 2), L


def _shift_range(lo_a: int, len_a: int, lo_b: int, len_b: int, N: int, taus) -> range:
    """Shifts ``n`` for which support b moved by ``n*N + tau`` meets support a."""
    tmin, tmax = int(np.min(taus)), int(np.max(taus))
    first = -(-(lo_a - (lo_b + len_b - 1) - tmax) // N)
    last = (lo_a + len_a - 1 - lo_b - tmin) // N
    return range(first, last + 1)


def _probe_vectors(fixed: PrototypeFilter, unknown_span: tuple[int, int], num: Numerology,
                   stats: ScatteringStats, side: str, n_range: int | None):
    """Vectors ``v`` with ``<G_{m,n} e_p, gamma> = sum_s v*[s] x[s] e^{...}``.

    For ``side="rx"`` the unknown is the receive pulse and ``v[t]`` is the
    propagated transmit pulse ``g[t - tau - nN] exp(2j pi nu t)``. For
    ``side="tx"`` the unknown is the transmit pulse and
    ``v[s] = gamma[s + tau + nN] exp(-2j pi nu (s + tau + nN))``.
    The subcarrier phase ``exp(2j pi m k / M)`` then depends on the
    residue ``k`` returned alongside (the same for all columns of one ``n``
    up to the column shift in ``keys``).

    Yields:
        ``(n, V, keys)`` with ``V`` of shape ``(L, P)`` and ``keys`` the
        residue index per row and column, shape ``(L, P)``.
    """
    lo, L = unknown_span
    s = lo + np.arange(L)
    taus, nus = stats.taus, stats.nus
    if side == "rx":
        shifts = _shift_range(lo, L, fixed.first, fixed.length, num.N, taus)
    else:
        shifts = _shift_range(fixed.first, fixed.length, lo, L, num.N, taus)
    if n_range is not None:
        shifts = range(max(shifts.start, -n_range), min(shifts.stop, n_range + 1))
    for n in shifts:
        V = np.empty((L, taus.size), dtype=complex)
        off = n * num.N
        if side == "rx":
            for p, d in enumerate(taus):
                V[:, p] = fixed.span(lo - off - d, L)
            V *= np.exp(2j * np.pi * np.outer(s, nus))
            keys = (s[:, None] - off - taus[None, :]) % num.M
        else:
            for p, d in enumerate(taus):
                V[:, p] = fixed.span(lo + off + d, L)
            V *= np.exp(-2j * np.pi * np.outer(s, nus) - 2j * np.pi * (off + taus) * nus)
            keys = np.broadcast_to(s[:, None] % num.M, V.shape)
        yield n, V, keys


def _power_terms(x: np.ndarray, span: tuple[int, int], fixed: PrototypeFilter,
                 num: Numerology, stats: ScatteringStats, side: str, n_range):
    """Useful and interference power for the unknown pulse values ``x``."""
    M = num.M
    c = stats.powers
    signal = 0.0
    interference = 0.0
    for n, V, keys in _probe_vectors(fixed, span, num, stats, side, n_range):
        prod = np.conj(V) * x[:, None]
        P = prod.shape[1]
        flat = (keys + M * np.arange(P)[None, :]).ravel()
        folded = np.bincount(flat, prod.real.ravel(), M * P) \
            + 1j * np.bincount(flat, prod.imag.ravel(), M * P)
        coef = np.abs(M * np.fft.ifft(folded.reshape(P, M), axis=1)) ** 2
        if n == 0:
            signal += float(c @ coef[:, 0])
            coef[:, 0] = 0.0
        interference += float(c @ coef.sum(axis=1))
    return signal, interference


def sinr_discrete(g: PrototypeFilter, gamma: PrototypeFilter, num: Numerology,
                  stats: ScatteringStats, cfg: SinrConfig = SinrConfig()) -> float:
    """Statistical SINR of the pulse pair in dB.

    Both pulses are expected to have unit power. The value is capped at
    300 dB when interference and noise vanish.
    """
    span = (gamma.first, gamma.length)
    signal, interf = _power_terms(gamma.coeffs, span, g, num, stats, "rx", cfg.n_range)
    denom = interf + cfg.noise_power * float(np.vdot(gamma.coeffs, gamma.coeffs).real)
    if denom <= signal * 10 ** (-SINR_CAP_DB / 10):
        return SINR_CAP_DB
    return float(10 * np.log10(signal / denom))


def sinr_contour(g: PrototypeFilter, gamma: PrototypeFilter, num: Numerology,
                 cfg: SinrConfig, tau_points, nu_points) -> SinrGrid:
    """SINR over a grid of brick-shaped channels ``(tau_max, nu_max)``."""
    taus = np.asarray(tau_points, dtype=float)
    nus = np.asarray(nu_points, dtype=float)
    if np.any(np.diff(taus) <= 0) or np.any(np.diff(nus) <= 0):
        raise ConfigError("contour axes must be strictly ascending")
    vals = np.empty((taus.size, nus.size))
    for i, t in enumerate(taus):
        for j, v in enumerate(nus):
            stats = brick_scattering(abs(t), abs(v), cfg.grid)
            vals[i, j] = sinr_discrete(g, gamma, num, stats, cfg)
    return SinrGrid(taus, nus, vals)


def quadratic_forms(fixed: PrototypeFilter, length: int, num: Numerology,
                    stats: ScatteringStats, side: str = "rx",
                    n_range: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Useful and interference matrices for the unknown pulse of one side.

    For a unit-power unknown ``x`` on a centered span of ``length``
    samples, the useful power is ``x^H A x`` and the interference power is
    ``x^H I x``.

    Args:
        fixed: The known pulse (transmit pulse for ``side="rx"``, receive
            pulse for ``side="tx"``).
        length: Length of the unknown pulse.
        side: ``"rx"`` or ``"tx"``.

    Returns:
        ``(A, I)``, Hermitian ``length x length`` matrices.
    """
    if side not in ("rx", "tx"):
        raise ConfigError(f"side must be 'rx' or 'tx', got {side!r}")
    span = _span(length)
    L = span[1]
    s = span[0] + np.arange(L)
    same = (s[:, None] - s[None, :]) % num.M == 0
    c = stats.powers
    A = np.zeros((L, L), dtype=complex)
    R = np.zeros((L, L), dtype=complex)
    for n, V, _ in _probe_vectors(fixed, span, num, stats, side, n_range):
        Vc = V * c
        R += Vc @ V.conj().T
        if n == 0:
            A = Vc @ V.conj().T
    # summing |.|^2 over all M subcarriers keeps entries with equal residue
    total = num.M * np.where(same, R, 0.0)
    I = total - A
    return _herm(A), _herm(I)


def _herm(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def _rayleigh_max(A: np.ndarray, B: np.ndarray, allow_ridge: bool):
    regularized = False
    if allow_ridge:
        B = B + RIDGE * np.trace(B).real / B.shape[0] * np.eye(B.shape[0])
        regularized = True
    try:
        C = scipy.linalg.cholesky(B, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("interference-plus-noise matrix is not positive definite") from exc
    Ci_A = scipy.linalg.solve_triangular(C, A, lower=True)
    H = scipy.linalg.solve_triangular(C, Ci_A.conj().T, lower=True)
    lam, V = scipy.linalg.eigh(_herm(H))
    x = scipy.linalg.solve_triangular(C.conj().T, V[:, -1], lower=False)
    x = x / np.linalg.norm(x)
    zeta = float(lam[-1])
    res = np.linalg.norm(A @ x - zeta * (B @ x)) / np.linalg.norm(B @ x)
    return x, zeta, regularized, float(res)


def _solve(fixed: PrototypeFilter, num: Numerology, stats: ScatteringStats, cfg: SinrConfig,
           L: int, side: str, ref: PrototypeFilter | None) -> EigenSolution:
    A, I = quadratic_forms(fixed, L, num, stats, side, cfg.n_range)
    # noise enters as sigma^2 * ||gamma||^2, which is x^H x on either side
    B = I + cfg.noise_power * np.eye(L)
    x, zeta, reg, res = _rayleigh_max(A, B, cfg.noise_power == 0)
    c = L // 2
    if ref is not None:
        # remove the arbitrary eigenvector phase relative to the previous iterate
        z = np.vdot(ref.span(-c, L), x)
        if abs(z) > 0:
            x = x * np.exp(-1j * np.angle(z))
    else:
        k = int(np.argmax(np.abs(x)))
        x = x * np.exp(-1j * np.angle(x[k]))
    return EigenSolution(PrototypeFilter.from_samples(x, c, fixed.Ts), zeta, reg, res)


def max_sinr_receiver(g: PrototypeFilter, num: Numerology, stats: ScatteringStats,
                      cfg: SinrConfig, L: int, ref: PrototypeFilter | None = None) -> EigenSolution:
    """Receive pulse of length ``L`` maximizing the statistical SINR for ``g``.

    Solves ``A gamma = zeta B gamma`` through a Cholesky factor of ``B``.
    With zero noise a ridge of ``1e-12 * trace(B) / L`` is added and
    flagged in the result.
    """
    return _solve(g, num, stats, cfg, L, "rx", ref)


def max_sinr_transmitter(gamma: PrototypeFilter, num: Numerology, stats: ScatteringStats,
                         cfg: SinrConfig, L: int, ref: PrototypeFilter | None = None) -> EigenSolution:
    """Transmit pulse of length ``L`` maximizing the statistical SINR for ``gamma``."""
    return _solve(gamma, num, stats, cfg, L, "tx", ref)


@dataclass
class JointDesignResult:
    g: PrototypeFilter
    gamma: PrototypeFilter
    iterations: int
    converged: bool
    sinr_history: list = field(default_factory=list)

    @property
    def sinr_db(self) -> float:
        return _db(self.sinr_history[-1])

    def report(self) -> dict:
        return {"iterations": self.iterations, "converged": self.converged,
                "zeta_max_dB": self.sinr_db,
                "sinr_history_dB": [_db(z) for z in self.sinr_history]}


def joint_design(g0: PrototypeFilter, num: Numerology, stats: ScatteringStats, cfg: SinrConfig,
                 L: int, epsilon: float = 1e-4, max_iters: int = 50) -> JointDesignResult:
    """Alternating transmit/receive SINR maximization.

    Each iteration computes the optimal receiver for the current transmit
    pulse and then the optimal transmitter for that receiver. Both steps
    solve their subproblem exactly, so the SINR history (one entry per
    half-step) is non-decreasing. Stops when both pulses change by at most
    ``epsilon`` relative to the previous iterate.
    """
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    c = L // 2
    g = PrototypeFilter.from_samples(g0.span(-c, L), c, g0.Ts)
    gamma = None
    history = []
    best = None
    for it in range(1, max_iters + 1):
        rx = max_sinr_receiver(g, num, stats, cfg, L, ref=gamma)
        tx = max_sinr_transmitter(rx.gamma_max, num, stats, cfg, L, ref=g)
        history += [rx.zeta_max, tx.zeta_max]
        d_g = tx.gamma_max.distance(g)
        d_r = np.inf if gamma is None else rx.gamma_max.distance(gamma)
        g, gamma = tx.gamma_max, rx.gamma_max
        if best is None or tx.zeta_max >= best[2]:
            best = (g, gamma, tx.zeta_max, it)
        if d_g <= epsilon and d_r <= epsilon:
            return JointDesignResult(g, gamma, it, True, history)
    warnings.warn(f"joint design did not converge within {max_iters} iterations",
                  ConvergenceWarning, stacklevel=2)
    g, gamma, _, it = best
    return JointDesignResult(g, gamma, it, False, history)
