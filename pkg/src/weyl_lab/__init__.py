"""weyl-lab: spectra and sharp spectral bounds of Fourier-multiplier
operators restricted to finite-volume sets.

The package discretizes the quadratic form sum_k T(p_k) |u^(p_k)|^2 of a
momentum symbol T on masked fields over a periodic carrier cube, computes
low-lying spectra matrix-free, and verifies the classical quantitative
statements about them at desk scale: the leading-order eigenvalue count,
the sharp trace bound, the dual eigenvalue-sum bound, phase-space volume
identities, and coherent-state energy estimates.
"""

from .analysis import (BoundReport, CountingData, TauberianRun, WeylFit,
                       berezin_bound, bound_report, counting_data,
                       counting_function, domain_volume, duality_check, liyau_bound,
                       riesz_mean, tauberian_run, weyl_fit, weyl_term)
from .geometry import (EMPTY, Ball, Box, ClippedBox, DegenerateDomainError,
                       Difference, DomainError, DomainSet, GridMask, Union,
                       bounding_box, contains, domain_config,
                       domain_from_config, inner_set, rasterize, volume)
from .quadrature import MonteCarloEstimate
from .spectral import (ConvergenceError, CoherentProbe, GridOperator,
                       MomentumGrid, Spectrum, apply, build_operator,
                       coherent_expectation, coherent_probe, dense_spectrum,
                       dirichlet_interval_spectrum, lowest_eigenvalues,
                       momentum_grid)
from .symbols import (AssumptionCertificate, DivergenceError, EvaluationError,
                      PrincipalPart, SublevelIdentity, Symbol, SymbolError,
                      UnsupportedSymbolError, check_assumption_one,
                      check_assumption_two, evaluate, midpoint_defect,
                      phase_volume, principal_part, radial_angular_samples,
                      riesz_integral, sublevel_volume,
                      sublevel_volume_identity, symbol_from_config)

__version__ = "0.1.0"
