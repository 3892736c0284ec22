"""dyadlab: a numerical laboratory for dyadic weighted harmonic analysis.

Step functions on finite dyadic grids over [0,1), Haar and weighted
Haar systems, Muckenhoupt / reverse Hoelder / C_s weight
characteristics, Carleson sequences with exact intensities,
oscillation-driven stopping times, and the paraproduct / Haar shift /
t-Haar multiplier operator families of complexity (m, n) with
matrix-free weighted norm estimation.
"""

from .core import (
    DyadicGrid,
    HaarSpectrum,
    IntervalId,
    StepFunction,
    WeightedHaarDecomposition,
    average,
    decompose_haar,
    haar_transform,
    inverse_haar_transform,
    weighted_average,
    weighted_haar,
)
from .weights import (
    CharacteristicReport,
    SpecParseError,
    Weight,
    WeightFamilySpec,
    ap_characteristic,
    bmo_norm,
    cs_characteristic,
    doubling_constant,
    generate,
    rh_characteristic,
    weighted_maximal,
)
from .carleson import (
    IndexedSequence,
    IntensityReport,
    combine,
    intensity,
    oscillation_intensity_constant,
    oscillation_sequence,
    reciprocal_jump_sequence,
    transfer_to_weighted,
    weighted_carleson_pairing,
    weighted_coefficient_sequence,
)
from .stopping import StoppingFamily, build_stopping, lift_sequence
from .operators import (
    CoefficientFamily,
    NormEstimate,
    OperatorSpec,
    apply,
    apply_adjoint,
    apply_adjoint_leaves,
    apply_leaves,
    generation_bmo_sum,
    generation_coefficient_sum,
    generation_jump_sum,
    weighted_norm,
)

__version__ = "0.1.0"
