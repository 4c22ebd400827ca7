"""Polynomial initial value problems for analog computation.

Generable functions are represented as polynomial IVPs, combined through
closure operations (arithmetic, composition, ODE solving), compiled from GPAC
circuits or a small expression language, and evaluated with an adaptive
Taylor-series integrator.
"""
from .bounds import BoundExpr
from .circuit import (Circuit, CircuitError, circuit_deserialize, circuit_serialize,
                      circuit_to_pivp, circuit_validate, pivp_to_circuit)
from .closure import (ClosureError, ClosureTrace, apply_polynomial, combine, compose,
                      coordinates, modulus_bound, multiply, ode_rewrite, ode_rewrite_controlled,
                      reciprocal)
from .expr import ExprError, compile_expr, interpret, parse, pretty
from .pivp import (PIVP, DomainDecl, builtin, exp_tower, pivp_deserialize, pivp_serialize,
                   pivp_validate)
from .polynomial import Coefficient, PolyMatrix, Polynomial
from .simulator import (IntegrationError, SingularityError, Trajectory, check_bound,
                        convergence_probe, evaluate, integrate)

__all__ = [
    "BoundExpr", "Circuit", "CircuitError", "ClosureError", "ClosureTrace", "Coefficient",
    "DomainDecl", "ExprError", "IntegrationError", "PIVP", "PolyMatrix", "Polynomial",
    "SingularityError", "Trajectory", "apply_polynomial", "builtin", "check_bound",
    "circuit_deserialize", "circuit_serialize", "circuit_to_pivp", "circuit_validate",
    "combine", "compile_expr", "compose", "convergence_probe", "coordinates", "evaluate",
    "exp_tower", "integrate", "interpret", "modulus_bound", "multiply", "ode_rewrite",
    "ode_rewrite_controlled", "parse", "pivp_deserialize", "pivp_serialize",
    "pivp_to_circuit", "pivp_validate", "pretty", "reciprocal",
]
