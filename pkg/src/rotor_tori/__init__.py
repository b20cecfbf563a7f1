"""Perturbative invariant tori of weakly coupled rotator chains.

Constructs quasi-periodic solutions of theta'' = -eps grad f(theta) on
finite windows of an infinite rotator chain, through two independent
routes: the order-by-order Fourier recursion and the plane-tree expansion
with renormalization-group cluster bookkeeping.  Ships the small-divisor
arithmetic (worst-divisor sequences, Bryuno sums, dyadic scales,
Diophantine sets and their measure), self-energy cancellation checks,
convergence-threshold constants, and a symplectic validation harness.
"""

from .errors import (ConfigError, DomainError, PotentialFormatError,
                     ResonanceError, ResourceLimitError, RotorToriError,
                     TruncationError)
from .modes import (FourierSeries, Frequency, Mode, WeightSequence, Window,
                    ZERO_MODE, dot_frequency, enumerate_modes, parse_potential,
                    series_norm, star_norm)
from .smalldiv import (BetaSequence, DiophantineParams, ScaleSequence,
                       analytic_beta_floor, beta_sequence, bryuno_sum,
                       calibrate_product_constants, diophantine_check,
                       divisor_product_sup, measure_estimate, product_sup_bound,
                       propagator, scale_of, scale_sequence)
from .lindstedt import (OrderedCoefficients, expand, field_order,
                        kernel_residual, lindstedt_order)
from .trees import (Tree, TreeEngine, enumerate_trees, line_momenta,
                    sum_tree_values, tree_value)
from .renorm import (LinearKernel, ResonantCluster, cancellation_report,
                     cluster_operator, find_resonant_clusters,
                     nonresonant_count, nonresonant_value, self_energy,
                     taylor_remainder)
from .torus import (SeriesSolution, Thresholds, action_curve,
                    empirical_radius, evaluate_displacement, residual_orders,
                    residual_spectrum, synthesize, threshold_estimates)
from .integrate import integrate_ode, torus_distance, validate_torus

__version__ = "0.1.0"
