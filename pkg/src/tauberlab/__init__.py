"""Numerical experiments around Tauberian arguments for arithmetic semigroups."""

__version__ = "0.1.0"

from .laplace_tauber import BoundedSignal, catalogue, psi_signal, tauber_convergence_study, theorem3_bound
from .oscillatory import oscillatory_integral, riemann_lebesgue_bound, verify_rl
from .pnt_experiments import delta_mertens, delta_pnt, mertens_profile, pnt_profile, psi_bump_width, psi_to_pi_check
from .pvariation import PiecewiseFunction, p_variation, p_variation_bruteforce
from .reports import BoundReport
from .semigroup import ElementTable, PrimeSystem, build_elements, build_primes, build_semigroup, fit_density
from .zeta_boundary import H_near_1, lemma_diagnostic, positivity_scan, zeta_euler, zeta_partial, zeta_stieltjes

__all__ = [
    "BoundReport", "BoundedSignal", "ElementTable", "H_near_1", "PiecewiseFunction", "PrimeSystem",
    "build_elements", "build_primes", "build_semigroup", "catalogue", "delta_mertens", "delta_pnt",
    "fit_density", "lemma_diagnostic", "mertens_profile", "oscillatory_integral", "p_variation",
    "p_variation_bruteforce", "pnt_profile", "positivity_scan", "psi_bump_width", "psi_signal",
    "psi_to_pi_check", "riemann_lebesgue_bound", "tauber_convergence_study", "theorem3_bound",
    "verify_rl", "zeta_euler", "zeta_partial", "zeta_stieltjes",
]
