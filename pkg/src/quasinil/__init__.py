"""Exact and numerical experiments with weighted shift operators in the infinite tensor product of 2x2 matrices."""
from __future__ import annotations

__version__ = "0.1.0"

from .coeffs import CoefficientSpec, parse_spec
from .tensor import OperatorSum, TensorWord, word_op, site_op

__all__ = ["CoefficientSpec", "OperatorSum", "TensorWord", "parse_spec", "site_op", "word_op", "__version__"]
