#ifndef CLIMARISK_ERROR_HPP
#define CLIMARISK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace climarisk {

/// Error codes for every failure mode the toolkit reports.
/// The CLI maps these onto process exit codes; tests match on them.
enum class Errc {
    // panel / CSV
    missing_cell,
    non_numeric,
    duplicate_column,
    direction_unassigned,
    non_positive_premium,
    empty_panel,
    // sampling
    pool_too_small,
    empty_minority,
    // classifier
    single_class,
    dimension_mismatch,
    did_not_converge,
    fold_too_small,
    single_class_fold,
    // elasticity
    non_positive_value,
    rank_deficient,
    too_few_observations,
    no_model,
    grid_empty,
    // clustering
    k_too_large,
    empty_input,
    no_population_column,
    k_not_two,
    // mcdm
    too_few_indicators,
    not_reciprocal,
    not_positive,
    no_ri_entry,
    alpha_out_of_range,
    negative_sigma,
    inconsistent_matrix,
    // orchestration
    config_invalid,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::missing_cell: return "MissingCell";
        case Errc::non_numeric: return "NonNumeric";
        case Errc::duplicate_column: return "DuplicateColumn";
        case Errc::direction_unassigned: return "DirectionUnassigned";
        case Errc::non_positive_premium: return "NonPositivePremium";
        case Errc::empty_panel: return "EmptyPanel";
        case Errc::pool_too_small: return "PoolTooSmall";
        case Errc::empty_minority: return "EmptyMinority";
        case Errc::single_class: return "SingleClass";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::did_not_converge: return "DidNotConverge";
        case Errc::fold_too_small: return "FoldTooSmall";
        case Errc::single_class_fold: return "SingleClassFold";
        case Errc::non_positive_value: return "NonPositiveValue";
        case Errc::rank_deficient: return "RankDeficient";
        case Errc::too_few_observations: return "TooFewObservations";
        case Errc::no_model: return "NoModel";
        case Errc::grid_empty: return "GridEmpty";
        case Errc::k_too_large: return "KTooLarge";
        case Errc::empty_input: return "EmptyInput";
        case Errc::no_population_column: return "NoPopulationColumn";
        case Errc::k_not_two: return "KNotTwo";
        case Errc::too_few_indicators: return "TooFewIndicators";
        case Errc::not_reciprocal: return "NotReciprocal";
        case Errc::not_positive: return "NotPositive";
        case Errc::no_ri_entry: return "NoRI";
        case Errc::alpha_out_of_range: return "AlphaOutOfRange";
        case Errc::negative_sigma: return "NegativeSigma";
        case Errc::inconsistent_matrix: return "InconsistentMatrix";
        case Errc::config_invalid: return "ConfigInvalid";
        case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace climarisk

#endif // CLIMARISK_ERROR_HPP
