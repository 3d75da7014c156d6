"""Multiphoton coherent states of bilayer graphene in a magnetic field."""

from .dynamics import (
    AutocorrSeries,
    DegenerateBracketError,
    PeriodEstimate,
    autocorrelation,
    estimate_period,
    evolve,
    revival_times,
    spectral_period,
)
from .fock_algebra import (
    ModelParams,
    SpinorState,
    WeightFunction,
    annihilate_power,
    energy_level,
    log_factorial,
    spinor_matrix_element,
)
from .mcs_states import (
    CoefficientTable,
    TruncationError,
    assemble_state,
    build_coefficients,
    coherent_table,
    eigen_residual,
    normalize,
)
from .observables import (
    ConsistencyError,
    ObservableReport,
    mean_energy,
    mean_S,
    mean_S2,
    observable_report,
    uncertainty_product,
)
from .wavefunctions import DensityGrid, OscillatorBasis, density, hermite_psi, static_density

__version__ = "0.1.0"
