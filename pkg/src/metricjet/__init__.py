"""Numerical metric tangency: jet distances, contacts, classification and extremum tests."""

__version__ = "0.1.0"

from .cantor import cantor_distance, cantor_locate
from .catalog import contact_closed_form, entry, fractal_from_periodic
from .classify import check_ladder, classify_point, counterexample_suite
from .contact import estimate_contact, gdiff_1d, homogeneity_check, verify_contact
from .expr import parse_expression
from .extrema import contact_global_min_check, first_order_min_test
from .handles import FunctionHandle
from .sampling import SamplingConfig
from .spaces import ContractingSpace, ValuedMonoid, Variant
from .tangency import jet_distance, lipschitz_ratio_homog, ll_test, lsl_test, norm_homog, tangency_test

__all__ = [
    "ContractingSpace", "FunctionHandle", "SamplingConfig", "ValuedMonoid", "Variant",
    "cantor_distance", "cantor_locate", "check_ladder", "classify_point", "contact_closed_form",
    "contact_global_min_check", "counterexample_suite", "entry", "estimate_contact", "first_order_min_test",
    "fractal_from_periodic", "gdiff_1d", "homogeneity_check", "jet_distance", "lipschitz_ratio_homog",
    "ll_test", "lsl_test", "norm_homog", "parse_expression", "tangency_test", "verify_contact",
]
