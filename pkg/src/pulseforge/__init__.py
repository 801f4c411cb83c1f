"""Prototype-filter design and evaluation for pulse-shaped OFDM."""

__version__ = "0.1.0"

from .channel import (ChannelRealization, ScatteringStats, apply_channel, brick_scattering,
                      draw_realization, ideal_channel, shifted_pulse_matrix)
from .errors import ConfigError, ConvergenceWarning, NumericalError
from .gabor import (GaborSystem, OrthoDesignConfig, OrthoDesignResult, design_orthogonal,
                    orthogonalize, sir_self)
from .linksim import LinkConfig, LinkReport, evm_to_sinr, run_link, sinr_to_evm
from .numerology import (ChannelCharacteristics, Numerology, derive_cp_ofdm_numerology,
                         derive_tf_localized_numerology)
from .pulses import (LocalizationReport, PrototypeFilter, WindowKind, WindowSpec, cp_ofdm_pair,
                     cross_ambiguity, gaussian_pulse, localization, rect_pulse, window,
                     wofdm_pulse, zp_ofdm_pair)
from .sinr_engine import (EigenSolution, SinrConfig, SinrGrid, joint_design, max_sinr_receiver,
                          sinr_contour, sinr_discrete)
from .spectrum import PaModel, PsdEstimate, apply_pa, estimate_psd, guard_subcarriers
from .transceiver import (ComplexityReport, FrameSignal, SymbolGrid, complexity_count, demodulate,
                          measure_evm, modulate)
