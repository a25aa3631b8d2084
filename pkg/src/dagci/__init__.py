"""Conditional-independence reasoning for one or two Bayesian network
structures: d-separation queries, semigraphoid closure, exact checks on
finite discrete distributions, numerical counterexample search, and the
compiler that turns implication instances into pairs of network structures.
"""

from .dag import (
    CiSet,
    CiStatement,
    Dag,
    dag_to_dot,
    dag_to_text,
    local_ci_set,
    parse_dag,
    random_dag,
    single_ci_network,
)
from .dist import (
    CheckResult,
    JointDist,
    Majorization,
    StatisticPartition,
    append_statistic,
    check_ci,
    check_fd,
    check_mutual_independence,
    dist_to_text,
    majorizes,
    marginal,
    marginal_vector,
    minimal_sufficient_statistic,
    parse_dist,
    sample_factorized,
    sample_factorized_rational,
    satisfies_network,
)
from .dsep import (
    all_ci_statements,
    d_separated,
    d_separated_by_paths,
    format_ci,
    implied_ci_set,
    inclusion_implies,
    parse_ci,
    parse_ci_set,
)
from .graphoid import closure_implies, semigraphoid_closure
from .oracle import OracleBudget, refute_implication, refute_network_implication
from .reduction import (
    IidExtension,
    ImplicationAInstance,
    ImplicationInstance,
    NodeRole,
    ReductionOutput,
    build_implication_b,
    compile_pairwise_independencies,
    compile_two_networks,
    duplicate_target_variable,
    format_instance,
    iid_extend_witness,
    implication_b_witness,
    parse_instance,
    strip_vacuous_fds,
    trivial_witness,
)

__version__ = "0.1.0"
