"""Window-cutoff analysis of exponential-mixture distances to equilibrium."""
from .analysis import (
    CutoffParams,
    LowerCertificate,
    UpperCertificate,
    check_alpha,
    check_peres,
    correction,
    cutoff_params,
    location,
    lower_bound_certificate,
    upper_bound_certificate,
    width,
)
from .estimator import ChiSquareMixture, CutoffEstimator
from .families import (
    BetaSchedule,
    ParametricFamily,
    beta_schedule,
    explicit_family,
    hypercube_family,
    iid_sample_family,
    lemma31_family,
    parse_descriptor,
    single_ou_family,
)
from .harness import OffsetRule, SweepSpec, emit_report, limit_check, sweep
from .mixture import (
    CumulativeMass,
    ExpMixture,
    ExpTerm,
    LogInterval,
    build_mixture,
    cumulative_mass,
    evaluate,
    evaluate_lemma31,
    iid_sample,
    split_signed,
    tensor_sum,
)
from .spectral import (
    Generator,
    chi_square_mixture,
    matrix_exponential_oracle,
    stationary_distribution,
)

__version__ = "0.1.0"
