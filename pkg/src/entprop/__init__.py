"""Entanglement decisions and objective-property attribution for small
composite quantum systems: distinguishable particles, identical fermions
and identical bosons."""

from .core import (
    DEFAULT_TOL,
    DensityOperator,
    InconsistencyError,
    InvalidInputError,
    PureState,
    Sector,
    SeparableEnsemble,
    ToleranceError,
    Tolerances,
    UnsplittableError,
    basis_vector,
    ensemble_to_density,
    load_ensemble,
    load_state,
    partial_trace,
    pure_state,
    save_ensemble,
    save_state,
    spectral,
    state_to_density,
    tensor_product,
)
from .distinguishable import (
    EntanglementClass,
    EntanglementKind,
    SchmidtDecomposition,
    classify,
    completely_non_entangled,
    correlation_test,
    is_non_entangled,
    property_manifold,
    schmidt_decompose,
    singlet_state,
    split_non_entangled,
)
from .permsym import project_sector, slater_state, sym_product
from .identical2 import (
    PairCanonicalForm,
    PairDecision,
    boson_uniqueness_check,
    decide_pair,
    e_projector,
    has_complete_property,
    identical_correlation_test,
    unsharp_property,
)
from .fermions_n import (
    OrthogonalSplit,
    approx_orthogonality_report,
    assemble_split,
    completely_non_entangled_fermions,
    delta_partition,
    local_factorizability,
    one_particle_orthogonal,
    subset_property_check,
    v_perp,
    verify_split,
)
from .bosons_n import (
    BosonSplitKind,
    assemble_boson_split,
    bin_measurement_demo,
    boson_split_report,
    boson_subset_property_check,
    identical_halves,
)
# The collapse operation itself stays at entprop.measure.measure so the
# submodule name is not shadowed by the function.
from .measure import MeasurementOutcome, ghz_state, outcome_dependent_entanglement_demo
from .bell import (
    ChshSettings,
    chsh_value,
    ensemble_equivalence,
    separable_expectation,
    spin_observable,
    tsirelson_demo,
)

__version__ = "0.1.0"
