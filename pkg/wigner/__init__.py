from wigner.utils import ConvergenceError, ShardFailure, UnknownLabelError, ValidationError, log, log_error
from wigner.symbolcore_functions import (
    DERIVATION_PAIRS, RESIDUAL_SYMBOLS, SUBSTITUTED_FORMS,
    Flip, SettingPair, Side, SymbolSet, WignerSymbol,
    all_symbols, classify_flips, coincidence_contributors, contributes_to_coincidence,
    derivation_summary, format_symbol, imperfect_contributors, is_perfect_anticorrelation,
    one_step_neighbors, one_step_symbols, parse_symbol, perfect_parents, perfect_symbols,
    primed_sets, residual_set, residual_term_counts, same_setting_witnesses, step_distance,
    substituted_residuals, symbols_from_text,
)
from wigner.lhvsim_functions import (
    InequalityEvaluation, RawBound, SymbolDistribution,
    adversarial_hvm, balanced_adversarial_hvm, coincidence_probability,
    distribution_from_json, distribution_to_json, efa_draws, efa_mixture, efa_mixture_biased,
    extended_inequality, merge_montecarlo, montecarlo_shard, random_distribution,
    random_distributions, raw_bound_check, same_setting_coincidences, singles_probability,
    singles_profile, substituted_residual_weights,
)
from wigner.quantum_functions import (
    AngleTriple, SlitWheelConfig, SlitWheelPrediction,
    fringe_curve, fringe_curve_csv, max_violation_scan, oam_coincidence, settings_from_singlet,
    singlet_probability, slitwheel_extremes, slitwheel_probability, slitwheel_probability_numeric,
    slitwheel_wigner_evaluation, wigner_evaluation,
)
from wigner.analysis_functions import (
    AnalysisInput, CountSet, ViolationReport,
    compensated_minimum, evaluate_violation, ingest_counts, poisson_sigma, propagate_sigma,
    run_analysis, significance, with_options,
)
from wigner.census_functions import (
    CensusResult, FlatnessPredicate, PartialCensus,
    census_one_step, census_perfect, census_report, census_scan_partitioned, census_speedup, efa_group_census,
    is_flat, likelihood_ratio, merge_census, multi_step_possibilities,
    parent_pair_groups, position_masks, published_likelihood_ratio, shard_ranges,
)
