"""Desk-scale numerics for the Cauchy integral on Lipschitz graph curves:
principal-value quadrature, oscillation diagnostics, two-bump atomic
decompositions, and the iterative weak factorization machinery."""

from .atoms import (AtomicDecomposition, DecompositionTerm, containment_index,
                    decompose_two_bump, make_test_atom, make_two_bump_input,
                    reconstruct, two_bump_norm_bound, write_decomposition_csv)
from .cauchy import (KernelBoundsReport, apply_cauchy, apply_cauchy_adjoint,
                     apply_related_cauchy, assemble_cauchy_matrix,
                     assemble_related_matrix, kernel_bounds_check,
                     related_cauchy_at, related_kernel_values, weight_values)
from .commutator import (CommutatorSpec, apply_commutator, commutator_matrix,
                         commutator_norm_estimate, compactness_profile)
from .curve import (AccretiveWeight, LipschitzCurve, eval_A, eval_b, eval_slope,
                    load_curve_file, make_curve, write_curve_file)
from .errors import (CauchylabError, CurveFormatError, GridTooNarrowError,
                     NumericalCheckError, PreconditionError)
from .factorization import (FactorPair, WeakFactorization, approx_factor_atom,
                            denominator_floor, estimate_residual_h1b,
                            h1_factor_from_h1b, pi_b, pi_classic, residual,
                            select_big_m, single_two_bump_initial,
                            weak_factorize)
from .grid import (GridFunction, Interval, UniformGrid, indicator, integrate,
                   lp_norm, pair, write_function_csv)
from .spaces import (AtomCertificate, OscillationReport, bmo_norm, check_atom,
                     h1b_norm_upper, vmo_profile)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
