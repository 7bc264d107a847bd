"""Asymmetry of bivariate copulas and the families that maximize it."""

from __future__ import annotations

from .asymmetry import FamilyTag, MeasureResult, attainment_witness, dstar, mu_p
from .copulas import Copula, check_axioms, classify_quadrant, from_dict, parse_inline
from .generators import Generator, GeneratorClass
from .numerics import QuadratureError, Tolerance

__version__ = "0.1.0"

__all__ = [
    "Copula", "FamilyTag", "Generator", "GeneratorClass", "MeasureResult", "QuadratureError",
    "Tolerance", "attainment_witness", "check_axioms", "classify_quadrant", "dstar",
    "from_dict", "mu_p", "parse_inline",
]
