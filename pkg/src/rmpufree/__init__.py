"""Exact Weingarten/free-probability predictions for OTOCs and frame
potentials of staircase random matrix product unitaries, with a Monte Carlo
cross-validator."""

from .symgroup import (
    Permutation,
    cayley_distance,
    compose,
    cyclic,
    enumerate_sk,
    identity,
)
from .ncposet import (
    catalan,
    count_genus_one_pairs,
    enumerate_genus_one_pairs,
    enumerate_multichains,
    enumerate_nc,
    fuss_catalan,
    is_noncrossing,
    kreweras,
    mobius,
)
from .weingarten import gram, haar_twirl_exact, weingarten, wg_asymptotic_coeff
from .freeprob import (
    cumulants_from_moments,
    free_otoc_prediction,
    matrix_moments,
    moments_from_cumulants,
    partitioned_moment,
)
from .predict import (
    RmpuGeometry,
    frame_potential_haar,
    frame_potential_rmpu_asymptotic,
    frame_potential_rmpu_exact,
    haar_multi_otoc_exact,
    haar_otoc_exact,
    rmpu_otoc_exact,
    rmpu_otoc_leading,
    rmpu_otoc_placed,
    subleading_coeff_haar,
    subleading_coeff_rmpu,
    verify_frame_otoc_identity,
)
from .mcsim import (
    EnsembleConfig,
    EstimateRecord,
    ObservableSpec,
    build_rmpu,
    make_observable,
    mc_frame_potential,
    mc_otoc,
    sample_haar_unitary,
)

__version__ = "0.1.0"
