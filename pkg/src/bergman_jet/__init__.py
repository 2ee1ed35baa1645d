"""Optimal L² extension of jets along coordinate submanifolds: numerical models.

Pieces: model domains and slices (geometry), Green-type and psh weights
(weights), log-radius quadrature (quadrature), the Hermitian metric on jets
(jet_metric), truncated weighted Bergman spaces (bergman), minimal extensions
(extension) and one-variable lemma checks (lemma_lab).
"""

from .bergman import (BasisTruncation, DualFunctional, GramMatrix, disc_scaled_dual_norm,
                      dual_norm, dual_norm_sweep, functional_moments, gram)
from .errors import (BergmanJetError, ConditioningError, ConfigError, ContractViolation,
                     DomainError, NumericalError, RangeError)
from .extension import (ExtensionProblem, ExtensionResult, minimal_extension,
                        quotient_norm_dual, verify_optimal_bound)
from .geometry import (DomainSpec, FiberSlice, ModelGeometry, SubmanifoldSpec, fiber_slice,
                       submanifold_volume)
from .jet_metric import (JetElement, JetSection, MetricValue, metric_closed_form, metric_shell,
                         section_inner, section_norm)
from .lemma_lab import OneDFunction, Report, SweepTable
from .polynomial import Poly
from .quadrature import QuadratureConfig, ShellSpec, integrate_band, integrate_fiber, integrate_shell
from .weights import FamilyParams, GreenSpec, Model, WeightSpec

__version__ = "0.1.0"
