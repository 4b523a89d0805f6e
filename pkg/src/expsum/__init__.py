"""Empirical verification of exponential-sum identities and bounds.

Exact and floating-point computation of complete exponential sums
(Kloosterman and hyper-Kloosterman), correlation character sums with
their square-root-cancellation bounds and vanishing criteria, the
divisor-function Voronoi summation identity, bilinear cancellation
scans, and the distribution of the triple-divisor function in
arithmetic progressions.  Everything is desk-scale: small moduli,
dual-route checks, deterministic output.
"""

from .arith import (
    DivisorTable,
    Factorization,
    IdentityViolation,
    d3_exact,
    d_exact,
    divisor_table,
    factorize,
    ramanujan_sum,
    sigma00,
    sigma_w,
)
from .bilinear import (
    BilinearConfig,
    CancellationReport,
    bilinear_grouped,
    bilinear_sum,
    cancellation_scan,
    hypothesis_flags,
    thm_bound,
    trivial_bound,
)
from .charsums import (
    RATIO_CAP,
    CharSumParams,
    HypothesisViolated,
    NotSquareFree,
    calC,
    df_correlation,
    frakC2_glue,
    frakC_11,
    frakC_gamma_u,
    moebius_correlation,
    moebius_reduce,
    ppower_bound,
)
from .distribution import (
    ApDiscrepancy,
    RamanujanDecomposition,
    coprime_mean,
    d3_ap_sum,
    d3_to_bilinear,
    discrepancy_scan,
    ramanujan_decomposition,
)
from .expsums import (
    BoundReport,
    hyper_kl3,
    hyper_kl3_degenerate_check,
    hyper_kl3_direct,
    hyper_kl3_table,
    hyper_kl3_table_direct,
    kloosterman_direct,
    kloosterman_explicit_pp,
    kloosterman_explicit_pp_table,
    kloosterman_split,
    kloosterman_table,
    unit_inverse_table,
    weil_audit,
)
from .modarith import (
    PrimePower,
    crt_combine,
    is_prime,
    legendre,
    mod_inv,
    sqrt_mod_pp,
    valuation,
)
from .verify import CheckResult, reports_csv, run_checks
from .voronoi import (
    SmoothWeight,
    VoronoiReport,
    bessel_k0,
    bessel_y0,
    voronoi_lhs,
    voronoi_residual,
    voronoi_rhs,
)

__version__ = "0.1.0"
