"""Out-of-band leakage of a long orthogonal pulse versus CP-OFDM.

Designs K=4 pulses for a 2048-point lattice at TF 1.07 and 1.25, sends
1200 active QPSK subcarriers and counts the guard subcarriers needed to
meet a -50 dBc/Hz mask. Takes about ten seconds.

    python3 demos/spectrum_guards.py
"""

import numpy as np

from pulseforge import (Numerology, OrthoDesignConfig, SymbolGrid, cp_ofdm_pair,
                        design_orthogonal, estimate_psd, guard_subcarriers, modulate)
from pulseforge.spectrum import guard_overhead

M = 2048
active = np.r_[0:600, M - 600:M]
rng = np.random.default_rng(0)
shape = (8, active.size, 16)
symbols = (rng.choice([-1.0, 1.0], shape) + 1j * rng.choice([-1.0, 1.0], shape)) / np.sqrt(2)

for N in (2192, 2560):
    num = Numerology(M, N)
    designed = design_orthogonal(OrthoDesignConfig(K=4), num).pulse
    for name, g in (("K=4 design", designed), ("CP-OFDM", cp_ofdm_pair(num)[0])):
        psd = estimate_psd(modulate(SymbolGrid(symbols, active), g, num), 8 * M, active=active)
        guards = guard_subcarriers(psd, num)
        text = "mask not met" if guards is None else \
            f"{guards} guards per side ({guard_overhead(guards, active.size):.2f}% overhead)"
        print(f"TF={num.TF:.2f} {name:>11}: {text}")
