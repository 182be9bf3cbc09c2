"""Boundary regularity experiments for Pucci extremal equations on Dini domains."""

from .certify import CertificationReport, IterationParams, ak_sequence, check_conditions, growth_product
from .dini import DiniVerdict, Modulus, dini_integral, eval_modulus, rescale_to_small
from .geometry import DomainSpec, GridMask, inside, rasterize
from .harness import (
    DataSpec,
    GrowthReport,
    ProblemSpec,
    check_pointwise_norms,
    flat_c1alpha_check,
    flat_hopf_check,
    notch_hopf_check,
    run_scenario,
)
from .pucci import EllipticityPair, Sym2, pucci_bruteforce, pucci_minus, pucci_plus
from .solver import SolutionField, discrete_pucci, residual_profile, second_difference, solve_dirichlet
from .stencil import StencilSet, build_stencil

__version__ = "0.1.0"

__all__ = [
    "CertificationReport", "DataSpec", "DiniVerdict", "DomainSpec", "EllipticityPair",
    "GridMask", "GrowthReport", "IterationParams", "Modulus", "ProblemSpec", "SolutionField",
    "StencilSet", "Sym2", "ak_sequence", "build_stencil", "check_conditions",
    "check_pointwise_norms", "dini_integral", "discrete_pucci", "eval_modulus",
    "flat_c1alpha_check", "flat_hopf_check", "growth_product", "inside", "notch_hopf_check",
    "pucci_bruteforce", "pucci_minus", "pucci_plus", "rasterize", "rescale_to_small",
    "residual_profile", "run_scenario", "second_difference", "solve_dirichlet",
]
