"""Cone oracles, exact LP and the simplex-minimum copositivity test."""

from .lp import BasicOptimum, LPError, LPInfeasible, LPUnbounded, StandardSimplex, lp_solve
from .oracle import (
    ConeOracle,
    CpCertificate,
    Membership,
    Verdict,
    caratheodory_unit,
    contains,
    extremal_refine,
    is_interior,
    min_scale_dominating,
    sym_eig,
)
from .stqp import SimplexMin, simplex_min_quadratic

__all__ = [
    "BasicOptimum",
    "ConeOracle",
    "CpCertificate",
    "LPError",
    "LPInfeasible",
    "LPUnbounded",
    "Membership",
    "SimplexMin",
    "StandardSimplex",
    "Verdict",
    "caratheodory_unit",
    "contains",
    "extremal_refine",
    "is_interior",
    "lp_solve",
    "min_scale_dominating",
    "simplex_min_quadratic",
    "sym_eig",
]
