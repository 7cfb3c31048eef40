"""Payoff-query laboratory for approximate equilibria of bimatrix games."""

from .approx import (
    ALPHA,
    BbmBranch,
    BbmOutcome,
    KsBranch,
    KsMode,
    KsOutcome,
    LemmaHypothesisError,
    Orientation,
    bbm_query_ne,
    choose_orientation,
    ks_query_wsne,
    lemma_twoz_locate,
    shift_weight,
    swap_roles,
)
from .experiments import (
    ALGORITHMS,
    ExperimentSpec,
    TrialRecord,
    generate_game,
    mix_seed,
    run_adversary,
    run_experiment,
    verify_claim,
)
from .games import (
    BimatrixGame,
    MixedProfile,
    PayoffRange,
    RegretReport,
    SIGNED_RANGE,
    UNIT_RANGE,
    derived_d_x,
    derived_zero_sum,
    exact_regret,
    is_eps_ne,
    is_eps_wsne,
    load_game,
    load_profile,
    parse_game,
    save_game,
    save_profile,
)
from .lower_bounds import (
    DeterministicAdversary,
    HiddenColumnInstance,
    PartialGame,
    RefutationMismatch,
    ZeroAdversary,
    choose_hidden_column,
    det_adversary_answer,
    det_adversary_complete,
    gk_sample,
    halfgame_refute,
    hidden_column_instance,
    probe_columns,
    refute_deterministic,
    resolve_rate,
    uniform_sampler,
    zero_adversary_refute,
)
from .oracle import (
    BudgetExhausted,
    BudgetExhaustedError,
    MatrixOracle,
    PayoffOracle,
    QueryAnswer,
    QueryLedger,
    RunFailure,
    budgeted,
    difference_oracle,
    half_difference_oracle,
    unresolved_columns,
)
from .support_enumeration import DegenerateGameError, brute_force_equilibrium, zero_sum_value
from .zerosum import (
    ApproxPayoffVector,
    ConversionPreconditionError,
    MwuConfig,
    Player,
    approx_best_response,
    approx_regret,
    estimate_payoff_vector,
    mwu_zero_sum,
    ne_to_wsne,
    zerosum_ne_with_vectors,
    zerosum_wsne,
)

__all__ = [
    "ALGORITHMS",
    "ALPHA",
    "ApproxPayoffVector",
    "BbmBranch",
    "BbmOutcome",
    "BimatrixGame",
    "BudgetExhausted",
    "BudgetExhaustedError",
    "ConversionPreconditionError",
    "DegenerateGameError",
    "DeterministicAdversary",
    "ExperimentSpec",
    "HiddenColumnInstance",
    "KsBranch",
    "KsMode",
    "KsOutcome",
    "LemmaHypothesisError",
    "MatrixOracle",
    "MixedProfile",
    "MwuConfig",
    "Orientation",
    "PartialGame",
    "PayoffOracle",
    "PayoffRange",
    "Player",
    "QueryAnswer",
    "QueryLedger",
    "RefutationMismatch",
    "RegretReport",
    "RunFailure",
    "SIGNED_RANGE",
    "TrialRecord",
    "UNIT_RANGE",
    "ZeroAdversary",
    "approx_best_response",
    "approx_regret",
    "bbm_query_ne",
    "brute_force_equilibrium",
    "budgeted",
    "choose_hidden_column",
    "choose_orientation",
    "derived_d_x",
    "derived_zero_sum",
    "det_adversary_answer",
    "det_adversary_complete",
    "difference_oracle",
    "estimate_payoff_vector",
    "exact_regret",
    "generate_game",
    "gk_sample",
    "half_difference_oracle",
    "halfgame_refute",
    "hidden_column_instance",
    "is_eps_ne",
    "is_eps_wsne",
    "ks_query_wsne",
    "lemma_twoz_locate",
    "load_game",
    "load_profile",
    "mix_seed",
    "mwu_zero_sum",
    "ne_to_wsne",
    "parse_game",
    "probe_columns",
    "refute_deterministic",
    "resolve_rate",
    "run_adversary",
    "run_experiment",
    "save_game",
    "save_profile",
    "shift_weight",
    "swap_roles",
    "uniform_sampler",
    "unresolved_columns",
    "verify_claim",
    "zero_adversary_refute",
    "zero_sum_value",
    "zerosum_ne_with_vectors",
    "zerosum_wsne",
]
