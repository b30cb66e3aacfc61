"""Bergman kernels, Berezin-type transforms and Carleson diagnostics on the
Hartogs triangles ``H_k = {|z1|^k < |z2| < 1}``.
"""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, DomainError, PreconditionError
from .kernels import (
    HartogsParams,
    HartogsPoint,
    Monomial,
    admissible_monomials,
    bergman_kernel,
    bergman_kernel_series,
    domain_volume,
    domination_bound,
    empirical_domination_constant,
    kernel_diag,
    monomial_norm_sq,
    p_kernel,
    r_factor,
    skwarczynski_distance,
)
from .geometry import (
    SublevelQuery,
    eq_distances,
    fact_ratios,
    green_bidisc_pullback,
    in_superset_A,
    proper_map,
    pseudo_hyperbolic,
)
from .quadrature import (
    Focus,
    QuadratureSpec,
    QuadResult,
    forelli_rudin_J,
    integrate_disc,
    integrate_fibered,
    integrate_hartogs,
    monte_carlo_integrate,
    sample_hartogs,
)
from .measures import (
    DensityMeasure,
    DiscMeasure,
    Exhaustion,
    berezin_transform,
    disc_berezin,
    factorize_product_measure,
    t_transform,
    truncated_berezin,
)
from .dsl import eval_density, parse_density, to_source
