"""
Inequality checks: each evaluates both sides with error bars and returns
a CheckResult with status pass, fail or inconclusive.
"""
from .base import resolve_kappa, verdict
from .dilation import check_borell_lemma, check_coarea, check_dilation, check_one_sided_dilation
from .entropy import check_entropy_bounds, check_lsi, poincare_constant
from .gaussian import check_gaussian_suite
from .isoperimetry import check_isoperimetry
from .moments import check_moment_suite, check_negative_suite, sup_log_phi
from .reconstruction import reconstruct_dilation
from .sharpness import sharpness_probes
from .stability import check_entropy_tensorization, check_stability, harmonic_kappa

__all__ = [
    "resolve_kappa",
    "verdict",
    "check_dilation",
    "check_one_sided_dilation",
    "check_coarea",
    "check_borell_lemma",
    "check_entropy_bounds",
    "check_lsi",
    "poincare_constant",
    "check_gaussian_suite",
    "check_moment_suite",
    "check_negative_suite",
    "sup_log_phi",
    "check_isoperimetry",
    "reconstruct_dilation",
    "check_stability",
    "check_entropy_tensorization",
    "harmonic_kappa",
    "sharpness_probes",
]
