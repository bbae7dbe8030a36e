"""Root-function bases of non-self-adjoint Hill operators with periodic and
antiperiodic boundary conditions: coefficient hypotheses, shooting spectra and
Gram-matrix diagnostics."""
from .potential import (
    Potential,
    PotentialError,
    constant,
    evaluate,
    fourier_coefficients,
    load_potential,
    make_counterexample,
    make_power_decay,
    perturb,
    trig_polynomial,
)
from .floquet import (
    FloquetOptions,
    SolverError,
    SpectralPair,
    associated_function,
    discriminant,
    eigenfunction,
    find_pair,
    galerkin_pair,
    monodromy,
)
from .diagnostics import (
    check_theorem1,
    check_theorem2,
    density_demo,
    gram_report,
    gram_sweep,
    hypothesis_class,
)

__version__ = "0.1.0"
