import warnings

import numpy as np
import pytest

from pulseforge import (ConfigError, Numerology, PrototypeFilter, SinrConfig, brick_scattering,
                        cp_ofdm_pair, gaussian_pulse, ideal_channel, joint_design,
                        max_sinr_receiver, rect_pulse, shifted_pulse_matrix, sinr_contour,
                        sinr_discrete)
from pulseforge.sinr_engine import _rayleigh_max, max_sinr_transmitter, quadratic_forms

NUM = Numerology(32, 36)
BRICK = brick_scattering(4, 0.01)


def _naive_sinr(g, gamma, num, stats, noise, n_max):
    """Direct sum over every subcarrier, symbol shift and path."""
    signal = interf = 0.0
    for n in range(-n_max, n_max + 1):
        for m in range(num.M):
            V = shifted_pulse_matrix(g, num, m, n, stats, gamma)
            power = stats.powers @ np.abs(V.conj().T @ gamma.coeffs) ** 2
            if (m, n) == (0, 0):
                signal += power
            else:
                interf += power
    return 10 * np.log10(signal / (interf + noise))


def _random_pulse(rng, n, center=None):
    return PrototypeFilter.from_samples(rng.standard_normal(n) + 1j * rng.standard_normal(n), center)


def test_cp_pair_ideal_channel_is_capped():
    g, gamma = cp_ofdm_pair(NUM)
    assert sinr_discrete(g, gamma, NUM, ideal_channel()) == 300.0


def test_orthogonal_matched_pair_noise_floor():
    g = rect_pulse(32)
    assert sinr_discrete(g, g, NUM, ideal_channel(), SinrConfig(0.01)) == pytest.approx(20.0, abs=1e-9)
    grid = sinr_contour(g, g, NUM, SinrConfig(0.01), [0.0, 2.0], [0.0, 0.01])
    assert grid.values[0, 0] == pytest.approx(20.0, abs=1e-9)
    assert len(list(grid.rows())) == 4


@pytest.mark.parametrize("noise", [0.0, 0.01])
def test_sinr_matches_naive_sum(rng, noise):
    g = _random_pulse(rng, 50)
    gamma = _random_pulse(rng, 40, 17)
    stats = brick_scattering(3, 0.02, (3, 3))
    got = sinr_discrete(g, gamma, NUM, stats, SinrConfig(noise))
    assert got == pytest.approx(_naive_sinr(g, gamma, NUM, stats, noise, 4), abs=1e-9)


@pytest.mark.parametrize("side", ["rx", "tx"])
def test_quadratic_forms_reproduce_sinr(rng, side):
    fixed = _random_pulse(rng, 45)
    A, I = quadratic_forms(fixed, 40, NUM, BRICK, side)
    x = _random_pulse(rng, 40)
    v = x.coeffs
    ratio = np.vdot(v, A @ v).real / (np.vdot(v, I @ v).real + 0.01)
    if side == "rx":
        ref = sinr_discrete(fixed, x, NUM, BRICK, SinrConfig(0.01))
    else:
        ref = sinr_discrete(x, fixed, NUM, BRICK, SinrConfig(0.01))
    assert 10 * np.log10(ratio) == pytest.approx(ref, abs=1e-9)
    with pytest.raises(ConfigError):
        quadratic_forms(fixed, 40, NUM, BRICK, "both")


def test_rayleigh_textbook_case():
    A = np.diag([1.0, 5.0, 2.0]).astype(complex)
    x, zeta, reg, res = _rayleigh_max(A, np.eye(3, dtype=complex), False)
    assert zeta == pytest.approx(5.0)
    assert abs(abs(x[1]) - 1) < 1e-12 and not reg and res < 1e-12


def test_max_sinr_beats_matched_and_rect():
    g, gamma_rect = cp_ofdm_pair(NUM)
    cfg = SinrConfig.from_db(-20)
    sol = max_sinr_receiver(g, NUM, BRICK, cfg, NUM.N)
    assert sol.zeta_max_db >= sinr_discrete(g, g, NUM, BRICK, cfg)
    assert sol.zeta_max_db >= sinr_discrete(g, gamma_rect, NUM, BRICK, cfg)
    # the reported optimum is the SINR achieved by the returned pulse
    assert sol.zeta_max_db == pytest.approx(sinr_discrete(g, sol.gamma_max, NUM, BRICK, cfg), abs=1e-8)
    assert sol.residual < 1e-8


def test_max_sinr_transmitter_optimal(rng):
    _, gamma = cp_ofdm_pair(NUM)
    cfg = SinrConfig.from_db(-20)
    sol = max_sinr_transmitter(gamma, NUM, BRICK, cfg, NUM.N)
    for _ in range(5):
        trial = _random_pulse(rng, NUM.N)
        assert sol.zeta_max_db >= sinr_discrete(trial, gamma, NUM, BRICK, cfg)
    assert sol.zeta_max_db == pytest.approx(sinr_discrete(sol.gamma_max, gamma, NUM, BRICK, cfg), abs=1e-8)


def test_zero_noise_uses_ridge():
    g, _ = cp_ofdm_pair(NUM)
    sol = max_sinr_receiver(g, NUM, BRICK, SinrConfig(), NUM.N)
    assert sol.regularized


def test_sinr_non_increasing_in_noise():
    g, gamma = cp_ofdm_pair(NUM)
    values = [sinr_discrete(g, gamma, NUM, BRICK, SinrConfig.from_db(db))
              for db in (None, -40, -30, -20, -10, 0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_joint_design_monotone_history():
    L = 72
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        g0 = gaussian_pulse(1 / 16, L, scale=L / 8)
    res = joint_design(g0, NUM, BRICK, SinrConfig.from_db(-20), L)
    h = np.asarray(res.sinr_history)
    assert np.all(np.diff(h) >= -1e-9 * h[0])
    assert res.converged and res.g.length == L
    assert res.report()["zeta_max_dB"] == pytest.approx(res.sinr_db)


def test_joint_design_ideal_channel_orthogonal_start():
    num = Numerology(32, 40)
    g0 = rect_pulse(32).padded(80)
    res = joint_design(g0, num, ideal_channel(), SinrConfig.from_db(-30), 80)
    assert res.converged and res.iterations <= 2
    assert res.sinr_db == pytest.approx(30.0, abs=1e-6)


def test_config_validation():
    with pytest.raises(ConfigError):
        SinrConfig(-1.0)
    with pytest.raises(ConfigError):
        SinrConfig(n_range=0)
    g = rect_pulse(32)
    with pytest.raises(ConfigError):
        sinr_contour(g, g, NUM, SinrConfig(), [1.0, 0.0], [0.0])
    with pytest.raises(ConfigError):
        joint_design(g, NUM, BRICK, SinrConfig(0.1), 32, epsilon=0)
