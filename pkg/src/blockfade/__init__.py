"""Semi-analytical mutual information of IID complex Gaussian inputs on
block Rayleigh-faded MIMO channels, without receiver channel knowledge.

The per-symbol rate is (h(Y) - h(Y|X)) / n_b: the conditional entropy has a
closed form, the output entropy is a Monte-Carlo average of -log2 p(Y) with
an exact expression for p(Y), and the perfect-CSI capacity, pilot-based
schemes, high-SNR slopes and a pilot-free lower bound serve as baselines.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .closedform import (cond_entropy, ergodic_capacity,
                         high_snr_slope_capacity, high_snr_slope_pilot,
                         mi_lower_bound, perfect_csi_capacity,
                         wishart_logdet_mean)
from .density import (DensityEvaluator, GridTable, LogDensity,
                      QuadratureSettings, build_grid, normalization_check)
from .engine import (EntropyEstimate, MIEstimate, RunningMoments,
                     StoppingRule, estimate_output_entropy,
                     mutual_information)
from .errors import (BlockfadeError, DegenerateSpectrumError,
                     NumericalHealthError, QuadratureError,
                     UnsupportedRegimeError, UnsupportedSizeError)
from .linalg import frobenius_sq, gram_eigenvalues, signed_log_det, spectrum_gap_tol
from .model import (BlockSample, ChannelConfig, coherence_blocklength,
                    linear_to_db, sample_block, snr_db_to_linear)
from .pilots import (PilotResult, min_energy_per_bit, pilot_se_boosted,
                     pilot_se_uniform)
from .specfun import (SignedLogValue, binomial, exp_integral_e1,
                      exp_integral_eq, log_factorial, scaled_exp_integral)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "__version__",
    "ChannelConfig", "BlockSample", "sample_block", "coherence_blocklength",
    "snr_db_to_linear", "linear_to_db",
    "SignedLogValue", "exp_integral_e1", "exp_integral_eq",
    "scaled_exp_integral", "log_factorial", "binomial",
    "gram_eigenvalues", "signed_log_det", "frobenius_sq", "spectrum_gap_tol",
    "wishart_logdet_mean", "cond_entropy", "ergodic_capacity",
    "perfect_csi_capacity", "high_snr_slope_capacity",
    "high_snr_slope_pilot", "mi_lower_bound",
    "DensityEvaluator", "QuadratureSettings", "GridTable", "LogDensity",
    "build_grid", "normalization_check",
    "StoppingRule", "MIEstimate", "EntropyEstimate", "RunningMoments",
    "estimate_output_entropy", "mutual_information",
    "PilotResult", "pilot_se_uniform", "pilot_se_boosted",
    "min_energy_per_bit",
    "BlockfadeError", "QuadratureError", "DegenerateSpectrumError",
    "UnsupportedSizeError", "UnsupportedRegimeError", "NumericalHealthError",
]
