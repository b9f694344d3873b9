"""Executable sunflower-lemma toolkit.

Spreadness checks, the chi residual operator, sunflower extraction (Erdős–Rado
and spread induction), prefix-free code utilities, a decodable encoding audit,
and exact / Monte Carlo experiments over small set families.
"""

from .audit import AuditConfig, AuditReport, audit, count_tally, decode_pair, encode_pair, phi, tau
from .chi import ChiResult, chi, chi_profile, covers
from .coding import (
    PrefixCode,
    check_prefix_free,
    kraft_sum,
    rank_subset,
    shannon_converse_check,
    unary_decode,
    unary_encode,
    unrank_subset,
)
from .experiments import (
    brute_force_sunflowers,
    contraction_schedule,
    coverage_probability,
    estimate_chi_expectation,
    exact_chi_expectation,
    max_disjoint,
    partition_success_rate,
)
from .family import (
    SetFamily,
    SpreadParams,
    SpreadReport,
    generate_extremal,
    generate_random_family,
    link,
    parse_family,
    r_threshold,
    serialize_family,
    spread_check,
    spread_number,
)
from .finder import (
    Sunflower,
    find_disjoint_by_partition,
    find_sunflower_erdos_rado,
    find_sunflower_spread,
    is_sunflower,
    sample_partition,
)

__version__ = "0.1.0"
