"""beamcap: information rate of MIMO power on/off transmission with
finite-rate beamforming feedback.

Closed-form asymptotics for the on/off strategy and the water-filling
baseline, Grassmann beamforming codebooks with distortion bounds, and a
seeded Monte Carlo simulator that cross-validates all of it.
"""

from .design import StrategySpec, finite_design, invert_sbar
from .errors import (BeamcapError, DegenerateInputError, DomainError,
                     InfeasibleError, NumericsError)
from .grassmann import (Codebook, DistortionBounds, chordal_distance_sq,
                        design_codebook, distortion_bounds, estimate_mu,
                        load_codebook, sample_uniform_stiefel, save_codebook,
                        select_beamforming)
from .linalg import (EigenDecomposition, hermitian_eig, orthonormalize,
                     sample_gaussian_matrix)
from .onoff import (DesignPoint, dinfo_da, info_rate_equal_power,
                    info_rate_infinity, sbar_infinity, solve_optimal_a,
                    sweep_rho)
from .simulate import (MultiRankCodebook, RateEstimate, SimConfig,
                       calibrate_kappa, capacity_approx, channel_batch,
                       multirank_feedback, rate_csir, rate_csitr_waterfill,
                       rate_gated_codebook, rate_multirank,
                       rate_perfect_onoff, rate_with_codebook)
from .spectra import (SpectralSupport, SystemDims, integrate, lambda_of_t,
                      mp_density, mp_support, t_density)
from .waterfill import (WaterfillSolution, a_of_nu, capacity_of_nu,
                        power_of_nu, solve_nu)

__version__ = "0.1.0"
