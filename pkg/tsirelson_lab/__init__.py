"""Exact computation of Tsirelson-type norms over Schreier families."""
from .construct import BlockBasis, l1_average, n_eps_average, stabilized_vector, thin, unit_basis
from .engine import (
    Certificate,
    NormResult,
    best_admissible_sum,
    check_certificate,
    eval_norm,
    evaluate,
    mixed_norm,
    norm_jn,
    norm_n,
    schreier_norm,
    seminorm_jn,
    tsirelson,
)
from .schreier import decompose, enumerate_family, is_admissible, is_maximal, is_member, max_weight_subset
from .vectors import FinVec

__version__ = "0.1.0"
