"""Spectral toolkit for the incompressible Euler pressure on periodic grids.

Littlewood-Paley projections, Sobolev/Besov/Hoelder/Hardy norms, the pressure
operator with its paraproduct pieces, norm-inflation constructions and an
experiment harness with golden-file comparison.
"""
from .errors import (
    ConfigurationError,
    DomainError,
    MeanRemovedWarning,
    PcalError,
    PcalWarning,
    RangeError,
    RelaxedSeparationWarning,
    ResolutionError,
    SolenoidalityError,
    StructureError,
    SupportError,
    SymmetryError,
    TruncationWarning,
)
from .fields import (
    Grid,
    RealField,
    SpectralField,
    VectorField,
    curl,
    derivative,
    divergence,
    forward_transform,
    gradient,
    inverse_transform,
    partial_derivative,
    perp_gradient,
    pointwise_product,
    product,
    read_field,
    write_field,
)
from .lp import (
    BlockRange,
    DyadicProfile,
    HomogeneousSymbol,
    apply_symbol,
    fattened_block,
    fractional_laplacian,
    project_block,
    project_high,
    project_low,
    riesz_double,
)
from .norms import (
    NormReport,
    NormSpec,
    besov_norm,
    hardy_norm,
    holder_seminorm,
    lebesgue_norm,
    maximal_function,
    second_difference_seminorm,
    sobolev_norm,
)
from .pressure import (
    ParaproductTriple,
    PressureFormula,
    bilinear_pressure,
    divcurl_lhs,
    divcurl_rhs,
    leibniz_residual,
    paraproduct_split,
    pressure,
)
from .inflation import (
    InflationConfig,
    InflationReport,
    ProfileMoments,
    build_phi0,
    inflate_c1,
    inflate_half_holder,
    inflate_s0,
    inflate_s1,
    l1_failure_moments,
)
from .random_fields import derive_seed, random_gradient, random_scalar, random_solenoidal
from .config import ExperimentConfig, load_config, parse_config
from .harness import compare_golden, run

__version__ = "0.1.0"
