"""Levy white noise simulation and wavelet-domain Besov analysis."""

__version__ = "0.1.0"

from .idlaw import (  # noqa: F401
    IndexEstimate, IndexPair, InvalidModelError, JumpLaw, LevyMeasure,
    LevyModel, QuadratureError, UnsupportedMeasureError, char_functional,
    compound_poisson, custom_triplet, drift, estimate_indices, gaussian,
    indices_from_measure, inverse_gaussian, jump_atoms, jump_gaussian,
    jump_pareto, jump_uniform, laplace, make_index_pair_measure,
    model_from_dict, model_sum, poisson, sas, sum_sas, sym_gamma,
)
from .sampler import (  # noqa: F401
    GridField, GridSpec, PointCloud, UnsupportedSamplerError, bin_points,
    grid_function, pair, sample_cell, sample_compound_poisson_points,
    sample_field, truncation_model,
)
from .wavelet import (  # noqa: F401
    CoeffPyramid, WaveletBasis, analyze, build_basis, dirac_pyramid,
    genders, max_levels, qmf_residual, synthesize,
)
from .besov import (  # noqa: F401
    BesovParams, DivergenceError, NormReport, WeightSum, besov_norm,
    embedding_admissible, holder_step_check, sobolev_norm, weight_sum,
)
from .moments import (  # noqa: F401
    MomentEstimate, PairingCF, c_p, c_p_closed, cell_cf, fractional_moment_cf,
    fractional_moment_mc, lemma3_scaling, one_minus_re_cf,
)
from .phase import (  # noqa: F401
    NotTemperedError, PhaseSettings, RegionSpec, ScalingVerdict,
    boundary_polyline, dirac_scaling, empirical_scaling, phase_diagram,
    predicted_region,
)
