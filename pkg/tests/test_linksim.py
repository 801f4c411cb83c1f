import numpy as np
import pytest

from pulseforge import (ConfigError, LinkConfig, Numerology, brick_scattering, cp_ofdm_pair,
                        evm_to_sinr, rect_pulse, run_link, sinr_to_evm)
from pulseforge.linksim import Constellation, qam_points

NUM = Numerology(32, 36)


@pytest.mark.parametrize("kind", list(Constellation))
def test_qam_unit_power(kind):
    pts = qam_points(kind)
    assert pts.size == kind.order
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0)


@pytest.mark.parametrize("evm,sinr", [(0.175, 15.14), (0.125, 18.06), (0.08, 21.94), (0.035, 29.12)])
def test_evm_sinr_table(evm, sinr):
    assert evm_to_sinr(evm) == pytest.approx(sinr, abs=0.01)
    assert sinr_to_evm(evm_to_sinr(evm)) == pytest.approx(evm)


def test_evm_sinr_edges():
    assert evm_to_sinr(1.0) == 0.0
    with pytest.raises(ConfigError):
        evm_to_sinr(0.0)


def test_ideal_link_is_error_free():
    g = rect_pulse(32)
    rep = run_link(g, g, NUM, None, LinkConfig("64QAM", snr_db=None, n_frames=20))
    assert rep.ser == 0.0
    assert rep.evm_percent < 1e-10
    assert rep.measured_sinr_db > 250


def test_awgn_matched_pair_meets_configured_snr():
    g = rect_pulse(32)
    rep = run_link(g, g, NUM, None, LinkConfig("QPSK", snr_db=20.0, n_frames=2000, seed=1))
    assert rep.measured_sinr_db == pytest.approx(20.0, abs=0.1)


def test_awgn_cp_pair_loses_prefix_energy():
    g, gamma = cp_ofdm_pair(NUM)
    rep = run_link(g, gamma, NUM, None, LinkConfig("QPSK", snr_db=20.0, n_frames=2000, seed=2))
    assert 20.0 - rep.measured_sinr_db == pytest.approx(10 * np.log10(36 / 32), abs=0.1)


def test_seeded_determinism():
    g, gamma = cp_ofdm_pair(NUM)
    stats = brick_scattering(4, 0.01, (3, 3))
    cfg = LinkConfig("16QAM", snr_db=15.0, n_frames=300, seed=9)
    a = run_link(g, gamma, NUM, stats, cfg)
    b = run_link(g, gamma, NUM, stats, cfg)
    assert a == b
    c = run_link(g, gamma, NUM, stats, LinkConfig("16QAM", snr_db=15.0, n_frames=300, seed=10))
    assert c != a


def test_chunking_does_not_change_statistics_shape():
    g = rect_pulse(32)
    rep = run_link(g, g, NUM, None, LinkConfig("QPSK", snr_db=10.0, n_frames=300, n_symbols=3))
    # three symbols with one on each side unmeasured
    assert rep.n_frames == 300 and rep.n_measured == 300 * 32


def test_config_validation():
    with pytest.raises(ConfigError):
        LinkConfig(n_frames=0)
    with pytest.raises(ConfigError):
        LinkConfig(n_symbols=0)
    with pytest.raises(ValueError):
        LinkConfig("8PSK")
