"""cycleseek: attracting periodic solutions of time-periodic ODEs.

The package finds and certifies attracting periodic orbits through three
complementary routes: monotone iteration of scalar return maps,
contraction certificates from logarithmic norm bounds, and direct
fixed-point solves of even-symmetric periodic profiles.  A dedicated
layer analyzes perturbation-based extremum-seeking loops, and a planar
module reduces rotational two-dimensional fields to the scalar setting.
"""

from .errors import (AssumptionViolation, CertificateRejected, ConfigError,
                     CycleseekError, DimensionError, DomainEscapeError,
                     FlowIntegrationError, InternalInconsistency, LiftFailure,
                     MonotonicityError, PreconditionError, ReductionInvalid,
                     TrapViolationError)
from .extremum import (NAMED_MAPS, QUADRATIC, QUARTIC, AveragingProbe,
                       CertificateRate, ConditionCheck, EsAnalysis, EsParams,
                       EvenMapSolution, StaticMap, analyze, averaging_probe,
                       build_es_system, certificate_rate_bound,
                       curvature_floor, interval_abs_max, named_map,
                       solve_even_map_fixed_point, verify_jacobian_bound)
from .flow import (IntegratorConfig, TimePeriodicSystem, Trajectory,
                   check_periodicity_residual, flow, flow_endpoint,
                   flow_with_sensitivity)
from .lognorm import (GridSpec, MatrixFamilySample, NormKind, ViolationReport,
                      check_p_matrix_condition, induced_norm, mu,
                      mu_of_integral, mu_weighted_geneig, sweep_bound)
from .periodic import (ContractionCertificate, InconclusiveVerdict,
                       IterationDirection, MonotoneIterationTrace,
                       PeriodicSolution, ReturnMap, SolveMethod,
                       UnboundedVerdict, build_certificate,
                       convergence_envelope, find_periodic_contraction,
                       find_periodic_scalar, transient_bound)
from .planar import (PlanarOrbit, PlanarSystem, find_planar_periodic, lift,
                     reduce)
from .systems import (es_quadratic, es_quartic, hopf_circle, linear_test,
                      named_system, vdp_cascade)

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation", "AveragingProbe", "CertificateRate",
    "CertificateRejected", "ConditionCheck", "ConfigError",
    "ContractionCertificate", "CycleseekError", "DimensionError",
    "DomainEscapeError", "EsAnalysis", "EsParams", "EvenMapSolution",
    "FlowIntegrationError", "GridSpec", "InconclusiveVerdict",
    "IntegratorConfig", "InternalInconsistency", "IterationDirection",
    "LiftFailure", "MatrixFamilySample", "MonotoneIterationTrace",
    "MonotonicityError", "NAMED_MAPS", "NormKind", "PeriodicSolution",
    "PlanarOrbit", "PlanarSystem", "PreconditionError", "QUADRATIC",
    "QUARTIC", "ReductionInvalid", "ReturnMap", "SolveMethod", "StaticMap",
    "TimePeriodicSystem", "Trajectory", "TrapViolationError",
    "UnboundedVerdict", "ViolationReport", "analyze", "averaging_probe",
    "build_certificate", "build_es_system", "certificate_rate_bound",
    "check_p_matrix_condition", "check_periodicity_residual",
    "convergence_envelope", "curvature_floor", "es_quadratic", "es_quartic",
    "find_periodic_contraction", "find_periodic_scalar",
    "find_planar_periodic", "flow", "flow_endpoint", "flow_with_sensitivity",
    "hopf_circle", "induced_norm", "interval_abs_max", "lift", "linear_test",
    "mu", "mu_of_integral", "mu_weighted_geneig", "named_map", "named_system",
    "reduce", "solve_even_map_fixed_point", "sweep_bound", "transient_bound",
    "vdp_cascade", "verify_jacobian_bound",
]
