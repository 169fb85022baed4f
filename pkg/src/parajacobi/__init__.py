"""Constructive spectral theory for periodically modulated Jacobi matrices
whose periodic limit sits at a parabolic hard edge.

The pipeline: classify the periodic regime, build the critical polynomial
splitting the line into an absolutely continuous and a discrete half-line,
estimate the spectral density from scaled Turán determinants, extract the
oscillatory asymptotics of the orthonormal polynomials, take sinc-kernel
scaling limits, and verify everything against truncated-operator quadrature.
"""
from . import errors
from .asymptotics import (
    AsymptoticsReport,
    DiagonalComparison,
    KernelProfile,
    amplitude_extract,
    ignjatovic_diagonal,
    perturbed_asymptotics,
    rho,
    sinc,
    two_point_amplitude,
    universality_profile,
    upsilon,
)
from .conjugation import (
    ConjugationFrame,
    PhaseSum,
    expected_R_limit,
    find_ellipticity_threshold,
    frame,
    phase_sum,
    scaled_discriminant,
    vartheta,
)
from .mat2 import (
    PARABOLIC_NORMAL_FORM,
    ParabolicForm,
    discr,
    eig_complex,
    mat2,
    ordered_product,
    parabolic_conjugator,
    sym,
)
from .modulation import (
    CriticalPolynomial,
    Explicit,
    ExplicitDecay,
    GeometricDecay,
    ModulatedModel,
    Power,
    PowerDecay,
    PowerShift,
    SqrtProduct,
    StolzReport,
    StolzVerdict,
    Truncated,
    build_model,
    carleman_partial_sums,
    comparison_matrices,
    critical_polynomial,
    estimate_shift_limits,
    m_matrix,
    modulation_diagnostics,
    perturb,
    stolz_diagnostic,
    summability_report,
)
from .oracle import (
    OracleMeasure,
    ProbeResult,
    cdf_compare,
    eigendecomp,
    ess_spectrum_probe,
    operator_moment,
    oracle_measure,
    truncate,
)
from .periodic import (
    Case,
    PeriodicCache,
    PeriodicParams,
    absolute_trace_identity,
    classify,
    conjugator_chain,
    monodromy,
    periodic_poly,
    spectral_bands,
    step_matrix,
    trace_derivative,
    trace_derivative_at_zero,
    trace_polynomial,
)
from .recurrence import (
    E1,
    E2,
    RecurrenceTrace,
    cd_kernel,
    cd_kernel_grid,
    eval_stream,
    pairs_at,
    transfer_B,
    transfer_X,
)
from .turan import (
    DensityTable,
    TuranState,
    density,
    density_grid,
    g_limit,
    gen_turan,
    perturbed_density,
    truncated_density,
    truncated_density_grid,
    truncated_params,
    turan,
)

__version__ = "0.1.0"
