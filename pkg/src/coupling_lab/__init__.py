"""Receiver-to-transmitter coupling analysis for massive MISO/SIMO arrays.

The package is organized as

* :mod:`coupling_lab.antenna`   -- dipole ULA geometry and impedance models
* :mod:`coupling_lab.multiport` -- block impedance algebra and transfer matrices
* :mod:`coupling_lab.criteria`  -- coupling conditions, bounds and limits
* :mod:`coupling_lab.scenarios` -- presets, config files, region labels, sweeps
* :mod:`coupling_lab.report`    -- CSV and SVG output
"""

from .antenna import (IntraArrayMatrix, InterArrayVector, LinkGeometry, PhysicalConstants,
                      SpacingMode, UlaSpec, element_distances, inter_array_coupling,
                      intra_array_impedance, psi, radiation_resistance)
from .criteria import (AsymptoticFit, ConditionSides, CouplingReport, EvaluationOptions, Role,
                       ScenarioPoint, estimate_growth_exponent, evaluate_condition,
                       fixed_aperture_term_bound, frobenius_lower_bound, general_condition,
                       generalized_harmonic, lhs_closed_partial, miso_lhs, poisson_limit,
                       toeplitz_frobenius)
from .errors import (ConditioningError, CouplingLabError, DegenerateGeometryError, DomainError,
                     NearSingularUpdateError)
from .multiport import (MatchingNetworkSpec, PartitionedImpedance, TerminationSpec,
                        TransferMatrix, cascade_with_matching, end_to_end_matrix,
                        end_to_end_matrix_alt, miso_response, simo_response, unilateral_matrix,
                        verify_appendix_identity)
from .scenarios import ScenarioConfig, classify_region, run_sweep

__version__ = "0.1.0"
