"""High-precision one-particle modular Hamiltonian kernels for the massive
free scalar field on wedge and interval regions in one spatial dimension."""

from .discretization import (
    BasisSet,
    Element,
    Grid,
    Interval,
    RegionSpec,
    Wedge,
    a_power_matrix,
    build_basis,
    chi_matrix,
    orthonormal_frame,
)
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    ForbiddenSpectrum,
    NoConvergence,
    NotPositiveDefinite,
    ProbeOutsideGrid,
    QuadratureNotConverged,
    RegionNotOnGrid,
    SingularMatrix,
)
from .linalg import (
    MatrixMP,
    SymEigen,
    cholesky,
    congruence,
    invert,
    matrix_function,
    multiply,
    sym_eigen,
)
from .pipeline import (
    GaussianProbe,
    ModularResult,
    ScanEntry,
    SmearScan,
    analytic_reference,
    build_B,
    build_M,
    classify_spectrum,
    is_massless_limit,
    kernel_on_grid,
    mu_scan,
    run_pipeline,
    smear,
    spectrum_gate,
)
from .precision import PrecisionContext, Real

__version__ = "0.1.0"
