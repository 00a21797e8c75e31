"""Variational construction of hyperbolic-orbit candidates for fixed-energy
Hamiltonian systems: action minimization on a symmetry-constrained loop
space, rescaling to periodic orbits, and radius sweeps with diagnostics."""

from .continuation import (HyperbolicCandidate, SweepPlan, SweepRecord,
                           VERDICT_HYPERBOLIC, VERDICT_UNDETERMINED,
                           candidate_summary, compact_window_diff,
                           escape_bound_check, geometric_radii, run_sweep)
from .errors import (DegenerateEndpointError, EnergyConditionError,
                     MarkerUndefinedError, ParameterError, SweepFailedError,
                     WindowDomainError)
from .functional import (FunctionalValue, eval_f, eval_grad_f,
                         pairing_identity_residual)
from .loopspace import (LoopPath, MODE_HALF_ANTISYMMETRIC,
                        MODE_ODD_ANTISYMMETRIC, QuadratureSpec,
                        dirichlet_energy, derivative_sample, endpoint_retract,
                        from_record, new_loop, sample, to_record)
from .minimizer import (MinimizeOptions, MinimizeReport, minimize,
                        projected_grad_norm)
from .orbit import (OrbitDiagnostics, PeriodicOrbit, center_shift,
                    compute_period, diagnose, energy_residual, min_radius,
                    ode_residual, rescale, terminal_speed, time_markers)
from .potentials import (HypothesisReport, Potential, SampleGrid,
                         ThreeBodyChargedParams, check_hypotheses, eval_V,
                         eval_gradV, make_custom, make_three_body)

__version__ = "0.1.0"
