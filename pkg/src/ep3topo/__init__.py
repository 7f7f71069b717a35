"""Spectra, exceptional points, resultant winding numbers and no-jump dynamics
of small non-Hermitian coupled-mode chains."""
__version__ = "0.1.0"

from .analysis import (
    ExtractionError, PerturbationRatios, SymmetricParametrization, SymmetryFitError,
    beat_exponents, extract_eigenenergies, fit_symmetric_parametrization, matrix_pencil,
    pairwise_concurrence, perturbation_ratios, population_beats, reduced_pair_state,
    wootters_concurrence,
)
from .dynamics import (
    IntegrationError, ModulationConfig, StabilizationReport, TimeTrace, bessel_j,
    design_modulation, effective_couplings, evolve_modulated, evolve_nh,
    experimental_modulation, population_rms, stabilization_metrics,
)
from .model import (
    ChainParams, ModelKind, ReferenceModelParams, build_chain_hamiltonian,
    build_reference_model, three_mode_chain,
)
from .polynomials import ConvergenceError, Polynomial, aberth_roots, sylvester_resultant
from .spectra import (
    ComplexSpectrum, EpClassification, Ordering, PointKind, StateVector,
    characteristic_polynomial, classify_point, eigenvalues_closed_form,
    eigenvalues_two_mode, eigenvector_for, locate_ep3, polynomial_roots, scan_spectral_map,
)
from .topology import (
    LoopKind, Orientation, ParameterLoop, RealnessError, ResultantVector, ResultantZeroError,
    WindingResult, circle_loop, resultant_vector, square_loop_point, winding_number,
)
