"""Extremal bases for convex domains in C^n."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .bases import (ExtremalBasis, check_basis, first_step, maximal_basis, minimal_basis,
                    mixed_basis, reorder_maximal, tangency_residuals)
from .counterexample import (CounterexampleParams, R_value, in_T, lemma_equivalence_scan,
                             run_counterexample)
from .distances import (SearchOptions, SphereOptProblem, disc_distance, euclidean_distance,
                        optimize_over_sphere)
from .domains import (DiagonalQuadric, Domain, GeneralizedEllipsoid, SlicedDomain,
                      domain_from_dict, load_domain, unit_ball)
from .exceptions import (BasisKindError, DimensionError, NearBoundaryError, NotFullBasisError,
                         OptimizerError, OutsideDomainError, RankDeficiencyError)
from .harness import SuiteConfig, ValidationReport, run_suite
from .linalg import change_of_basis, gram_schmidt, orthocomplement
from .metrics import A_metric, E_metric, basis_matrix_audit, inv_disc_direction, kernel_proxies
