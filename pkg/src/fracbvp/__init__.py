"""Positive solutions of order-alpha two-point Dirichlet problems on [0,1].

The package discretizes the equivalent kernel integral equation by product
integration and builds on it: principal eigenvalue and eigenfunction of the
weighted linear problem, monotone iteration with sub/super-solution brackets
in the sublinear regime, Newton solves with nondegeneracy margins and
continuation in the order alpha in the superlinear regime, and a shooting
pipeline for Henon-type weights that seeds the multiplicity experiments.
"""

from .errors import (ConvergenceError, DegeneratePointError, FracBVPError,
                     HorizonError, HypothesisError, IntegrationError,
                     MonotonicityError, ScalingError, TransversalityError)
from .grid import (GridFunction, Mesh, WeightedNorms, boundary_weight,
                   default_grading_exponent, make_mesh, norms, production_mesh)
from .kernel import gamma, green_eval, green_hat_integral, green_integral
from .operator import (NonlinearityFamily, OperatorMatrix, WeightFamily,
                       apply_linear, apply_nonlinear, assemble)
from .eigen import (EigenResult, Lambda1Bounds, SweepRow, lambda1_bounds,
                    principal_eigenpair, sweep_alpha)
from .sublinear import (Bracket, ProbeReport, SolveReport, find_bracket,
                        monotone_solve, nonexistence_probe)
from .superlinear import (ContinuationTrace, NewtonReport,
                          NondegeneracyReport, continue_alpha,
                          find_positive_solution, newton_solve, nondegeneracy)
from .shooting import (HenonParams, ShootingRecord, UnitSolution,
                       find_crossings, first_zero, ivp_integrate,
                       rescale_to_unit, variational_solve, weight_offset,
                       z_prime)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FracBVPError", "HypothesisError", "ConvergenceError",
    "DegeneratePointError", "MonotonicityError", "IntegrationError",
    "HorizonError", "TransversalityError", "ScalingError",
    "Mesh", "GridFunction", "WeightedNorms", "make_mesh", "production_mesh",
    "default_grading_exponent", "norms", "boundary_weight",
    "gamma", "green_eval", "green_hat_integral", "green_integral",
    "WeightFamily", "NonlinearityFamily", "OperatorMatrix", "assemble",
    "apply_linear", "apply_nonlinear",
    "EigenResult", "Lambda1Bounds", "SweepRow", "principal_eigenpair",
    "lambda1_bounds", "sweep_alpha",
    "Bracket", "SolveReport", "ProbeReport", "find_bracket", "monotone_solve",
    "nonexistence_probe",
    "NewtonReport", "NondegeneracyReport", "ContinuationTrace", "newton_solve",
    "nondegeneracy", "continue_alpha", "find_positive_solution",
    "HenonParams", "ShootingRecord", "UnitSolution", "ivp_integrate",
    "first_zero", "variational_solve", "z_prime", "find_crossings",
    "rescale_to_unit", "weight_offset",
]
