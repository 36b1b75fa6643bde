"""Spectra of Toeplitz operators with quasi-radial type symbols on weighted Bergman spaces of the ball."""
from .bergman import WeightedSpaceParams, log_normalization, norm_change_coeff, projection_kernel
from .gamma import GammaSequence, build_gamma_sequence, gamma_at_label
from .lattice import Partition, enumerate_multi_indices, fiber, group_norms
from .oracle import BallQuadrature, toeplitz_matrix_bruteforce
from .quadrature import QuadratureError, QuadratureRule, simplex_integrate
from .spectral import DiagonalOperator, functional_calculus, joint_spectrum, rotation_operator
from .symbols import Monomial, PolynomialInRho, SymbolClass, SymbolSpec, parse_symbol

__version__ = "0.1.0"

__all__ = [
    "BallQuadrature", "DiagonalOperator", "GammaSequence", "Monomial", "Partition", "PolynomialInRho",
    "QuadratureError", "QuadratureRule", "SymbolClass", "SymbolSpec", "WeightedSpaceParams",
    "build_gamma_sequence", "enumerate_multi_indices", "fiber", "functional_calculus", "gamma_at_label",
    "group_norms", "joint_spectrum", "log_normalization", "norm_change_coeff", "parse_symbol",
    "projection_kernel", "rotation_operator", "simplex_integrate", "toeplitz_matrix_bruteforce",
]
