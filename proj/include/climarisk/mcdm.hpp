#ifndef CLIMARISK_MCDM_HPP
#define CLIMARISK_MCDM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "climarisk/csv.hpp"
#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/panel.hpp"
#include "climarisk/parallel.hpp"
#include "climarisk/rng.hpp"
#include "climarisk/stats.hpp"

namespace climarisk {

/// Per-cell interaction of one indicator with the rest of its row,
/// measured by reciprocal Hamming distance, plus the per-column extremes
/// and the Euclidean distances to them.
struct InteractionMatrix {
    Matrix interactions; // rows follow the panel, columns the indicators
    std::vector<double> best;
    std::vector<double> worst;
    std::vector<double> ideal_distance;
    std::vector<double> poor_distance;
};

/// Regularizer for rows where an indicator coincides with all others.
inline constexpr double interaction_epsilon = 1e-9;

inline InteractionMatrix interaction_matrix(const NormalizedPanel& panel) {
    const std::size_t n = panel.n();
    const std::size_t m = panel.m();
    if (m < 2)
        throw Error(Errc::too_few_indicators,
                    "interaction needs at least 2 indicators, got " + std::to_string(m));

    InteractionMatrix out;
    out.interactions = Matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double spread = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                if (c != j) spread += std::abs(panel.values(i, c) - panel.values(i, j));
            out.interactions(i, j) = static_cast<double>(m) / (spread + interaction_epsilon);
        }

    out.best.resize(m);
    out.worst.resize(m);
    out.ideal_distance.resize(m);
    out.poor_distance.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        double hi = out.interactions(0, j), lo = out.interactions(0, j);
        for (std::size_t i = 1; i < n; ++i) {
            hi = std::max(hi, out.interactions(i, j));
            lo = std::min(lo, out.interactions(i, j));
        }
        out.best[j] = hi;
        out.worst[j] = lo;
        double to_best = 0.0, to_worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            to_best += (out.interactions(i, j) - hi) * (out.interactions(i, j) - hi);
            to_worst += (out.interactions(i, j) - lo) * (out.interactions(i, j) - lo);
        }
        out.ideal_distance[j] = std::sqrt(to_best);
        out.poor_distance[j] = std::sqrt(to_worst);
    }
    return out;
}

/// Importance of each indicator in [0,1]; closeness to the poor solution
/// relative to both extremes. A column whose interactions are all equal has
/// no signal and gets the neutral 0.5.
struct ImportanceVector {
    std::vector<double> importance;
    std::vector<std::size_t> descending; // indices sorted by importance, ties stable
};

inline ImportanceVector indicator_importance(const InteractionMatrix& interactions) {
    const std::size_t m = interactions.ideal_distance.size();
    ImportanceVector out;
    out.importance.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double denom = interactions.ideal_distance[j] + interactions.poor_distance[j];
        out.importance[j] = denom == 0.0 ? 0.5 : interactions.poor_distance[j] / denom;
    }
    out.descending.resize(m);
    std::iota(out.descending.begin(), out.descending.end(), std::size_t{0});
    std::stable_sort(out.descending.begin(), out.descending.end(),
                     [&](std::size_t a, std::size_t b) {
                         return out.importance[a] > out.importance[b];
                     });
    return out;
}

struct WeightVector {
    enum class Kind { orm, ahp, combined };
    std::vector<double> weights;
    Kind kind = Kind::orm;
    double alpha = 0.0; // only meaningful for combined

    std::size_t size() const { return weights.size(); }
};

/// Order relation method: consecutive ratios of the descending importance
/// sequence determine the weights through the recurrence w_{j-1} = r_j w_j.
/// Importances are floored at 1e-6 before the ratios.
inline WeightVector orm_weights(const ImportanceVector& importance) {
    const std::size_t m = importance.importance.size();
    WeightVector out;
    out.kind = WeightVector::Kind::orm;
    out.weights.assign(m, 0.0);
    if (m == 1) {
        out.weights[0] = 1.0;
        return out;
    }

    std::vector<double> sorted(m);
    for (std::size_t p = 0; p < m; ++p)
        sorted[p] = std::max(importance.importance[importance.descending[p]], 1e-6);

    std::vector<double> ratio(m, 0.0); // ratio[p] = sorted[p-1] / sorted[p], p >= 1
    for (std::size_t p = 1; p < m; ++p) ratio[p] = sorted[p - 1] / sorted[p];

    double tail_sum = 0.0;
    for (std::size_t p = 1; p < m; ++p) {
        double product = 1.0;
        for (std::size_t q = p; q < m; ++q) product *= ratio[q];
        tail_sum += product;
    }
    std::vector<double> sorted_weights(m);
    sorted_weights[m - 1] = 1.0 / (1.0 + tail_sum);
    for (std::size_t p = m - 1; p >= 1; --p)
        sorted_weights[p - 1] = ratio[p] * sorted_weights[p];

    for (std::size_t p = 0; p < m; ++p)
        out.weights[importance.descending[p]] = sorted_weights[p];
    return out;
}

struct AhpResult {
    Matrix comparison;
    std::vector<double> weights; // principal eigenvector, normalized to sum 1
    double lambda_max = 0.0;
    double ci = 0.0;
    double cr = 0.0;
    double ri = 0.0;
    bool consistent = true; // cr <= 0.1
};

namespace detail {

/// Saaty random-consistency constants; sizes 1 and 2 are consistent by
/// construction.
inline double random_index(std::size_t m) {
    static constexpr std::array<double, 10> table{0.0, 0.0, 0.0, 0.58, 0.90,
                                                  1.12, 1.24, 1.32, 1.41, 1.45};
    if (m >= table.size())
        throw Error(Errc::no_ri_entry,
                    "no random-consistency index for " + std::to_string(m) + " criteria");
    return table[m];
}

} // namespace detail

/// Weights from the principal eigenvector of a pairwise comparison matrix
/// (power iteration), with Saaty's consistency test. The result carries
/// CR > 0.1 as a flag rather than an error so callers can gate explicitly.
inline AhpResult ahp_weights(const Matrix& comparison) {
    const std::size_t m = comparison.rows();
    if (m == 0 || comparison.cols() != m)
        throw Error(Errc::dimension_mismatch, "comparison matrix must be square and non-empty");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (!(comparison(i, j) > 0.0) || !std::isfinite(comparison(i, j)))
                throw Error(Errc::not_positive, "entry (" + std::to_string(i + 1) + "," +
                                                    std::to_string(j + 1) + ") is not positive");
            if (std::abs(comparison(i, j) * comparison(j, i) - 1.0) > 1e-6)
                throw Error(Errc::not_reciprocal, "entries (" + std::to_string(i + 1) + "," +
                                                      std::to_string(j + 1) +
                                                      ") violate b_ij * b_ji = 1");
        }

    AhpResult out;
    out.comparison = comparison;
    std::vector<double> v(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    for (std::size_t iter = 0; iter < 10000; ++iter) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += comparison(i, j) * v[j];
            next[i] = s;
            total += s;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            next[i] /= total;
            change = std::max(change, std::abs(next[i] - v[i]));
        }
        v.swap(next);
        if (change < 1e-12) break;
    }

    double rayleigh_num = 0.0, rayleigh_den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += comparison(i, j) * v[j];
        rayleigh_num += s * v[i];
        rayleigh_den += v[i] * v[i];
    }
    out.lambda_max = rayleigh_num / rayleigh_den;
    out.weights = v; // already normalized to sum 1

    if (m >= 3) {
        out.ri = detail::random_index(m);
        out.ci = (out.lambda_max - static_cast<double>(m)) / static_cast<double>(m - 1);
        out.cr = out.ci / out.ri;
    } else {
        // 1x1 and 2x2 reciprocal matrices are always consistent
        out.ri = 0.0;
        out.ci = m == 2 ? (out.lambda_max - 2.0) : 0.0;
        out.cr = 0.0;
    }
    out.consistent = out.cr <= 0.1;
    return out;
}

/// Reads an m-by-m comparison matrix; entries may be fraction literals
/// such as "1/3". No header row.
inline Matrix load_ahp_matrix(std::istream& in) {
    Matrix matrix;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv_line(line);
        std::vector<double> row;
        for (const auto& field : fields) {
            const auto value = parse_number_or_fraction(field);
            if (!value)
                throw Error(Errc::non_numeric,
                            "cannot parse comparison entry \"" + field + "\"");
            row.push_back(*value);
        }
        if (matrix.rows() > 0 && row.size() != matrix.cols())
            throw Error(Errc::dimension_mismatch, "ragged comparison matrix");
        matrix.append_row(row);
    }
    if (matrix.rows() == 0) throw Error(Errc::empty_input, "comparison matrix file is empty");
    if (matrix.rows() != matrix.cols())
        throw Error(Errc::dimension_mismatch, "comparison matrix must be square, got " +
                                                  std::to_string(matrix.rows()) + "x" +
                                                  std::to_string(matrix.cols()));
    return matrix;
}

inline WeightVector combine_weights(const WeightVector& orm, const WeightVector& ahp,
                                    double alpha) {
    if (orm.size() != ahp.size())
        throw Error(Errc::dimension_mismatch, "weight vectors have different dimensions");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(Errc::alpha_out_of_range, "alpha must lie in [0,1], got " + format_double(alpha));
    WeightVector out;
    out.kind = WeightVector::Kind::combined;
    out.alpha = alpha;
    out.weights.resize(orm.size());
    for (std::size_t j = 0; j < orm.size(); ++j)
        out.weights[j] = alpha * orm.weights[j] + (1.0 - alpha) * ahp.weights[j];
    return out;
}

enum class Gradient { first, second, third };

inline const char* gradient_name(Gradient g) {
    switch (g) {
        case Gradient::first: return "first";
        case Gradient::second: return "second";
        case Gradient::third: return "third";
    }
    return "?";
}

struct ScoredEntity {
    std::string id;
    double score = 0.0;
    Gradient gradient = Gradient::third;
    bool protect = false;
};

struct ScoreReport {
    std::vector<ScoredEntity> entries;
    static constexpr double protect_threshold = 0.5;
    static constexpr double first_gradient_threshold = 0.7;
};

/// Weighted scores with the published banding: above 0.7 first gradient,
/// 0.5..0.7 second, below 0.5 third; protection at score >= 0.5. The
/// boundaries themselves fall into the second gradient.
inline ScoreReport score(const NormalizedPanel& panel, const WeightVector& weights) {
    if (weights.size() != panel.m())
        throw Error(Errc::dimension_mismatch, "panel has " + std::to_string(panel.m()) +
                                                  " indicators, weights " +
                                                  std::to_string(weights.size()));
    ScoreReport report;
    report.entries.resize(panel.n());
    for (std::size_t i = 0; i < panel.n(); ++i) {
        auto& entry = report.entries[i];
        entry.id = panel.row_ids[i];
        entry.score = dot(panel.values.row(i), weights.weights);
        entry.gradient = entry.score > ScoreReport::first_gradient_threshold ? Gradient::first
                         : entry.score >= ScoreReport::protect_threshold    ? Gradient::second
                                                                            : Gradient::third;
        entry.protect = entry.score >= ScoreReport::protect_threshold;
    }
    return report;
}

struct RobustnessOptions {
    double sigma = 0.5;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    bool recompute_topsis = true; // re-derive ORM weights from the noisy panel
    bool clamp = false;           // clamp perturbed values back into [0,1]
    double alpha = 0.5;
    unsigned threads = 1;
};

struct RobustnessReport {
    double sigma = 0.0;
    std::size_t trials = 0;
    std::vector<std::string> ids;
    std::vector<double> baseline_scores;
    std::vector<double> score_mean;
    std::vector<double> score_stddev;
    std::vector<std::size_t> decision_flips; // per entity, vs the 0.5 threshold
    std::size_t total_flips = 0;
    double spearman_mean = 0.0;
};

/// Monte-Carlo stability of the scoring under i.i.d. Gaussian noise on every
/// normalized cell. AHP weights are judgement-based and noise-independent;
/// the data-driven TOPSIS-ORM side is recomputed per trial when requested.
inline RobustnessReport robustness(const NormalizedPanel& panel, const WeightVector& ahp,
                                   const RobustnessOptions& options) {
    if (options.sigma < 0.0)
        throw Error(Errc::negative_sigma, "sigma must be >= 0, got " + format_double(options.sigma));
    if (options.trials < 1) throw Error(Errc::config_invalid, "need at least one trial");

    const auto baseline_orm = orm_weights(indicator_importance(interaction_matrix(panel)));
    const auto baseline_combined = combine_weights(baseline_orm, ahp, options.alpha);
    const auto baseline = score(panel, baseline_combined);

    RobustnessReport report;
    report.sigma = options.sigma;
    report.trials = options.trials;
    report.ids = panel.row_ids;
    report.baseline_scores.resize(panel.n());
    for (std::size_t i = 0; i < panel.n(); ++i)
        report.baseline_scores[i] = baseline.entries[i].score;

    Matrix trial_scores(options.trials, panel.n());
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
        Rng rng = Rng::derive(options.seed, t);
        NormalizedPanel noisy = panel;
        for (std::size_t i = 0; i < noisy.n(); ++i)
            for (std::size_t j = 0; j < noisy.m(); ++j) {
                double v = noisy.values(i, j) + rng.gaussian(0.0, options.sigma);
                if (options.clamp) v = std::clamp(v, 0.0, 1.0);
                noisy.values(i, j) = v;
            }
        const WeightVector weights =
            options.recompute_topsis
                ? combine_weights(orm_weights(indicator_importance(interaction_matrix(noisy))),
                                  ahp, options.alpha)
                : baseline_combined;
        const auto scored = score(noisy, weights);
        for (std::size_t i = 0; i < panel.n(); ++i)
            trial_scores(t, i) = scored.entries[i].score;
    });

    report.score_mean.assign(panel.n(), 0.0);
    report.score_stddev.assign(panel.n(), 0.0);
    report.decision_flips.assign(panel.n(), 0);
    double spearman_sum = 0.0;
    for (std::size_t t = 0; t < options.trials; ++t) {
        spearman_sum += spearman(report.baseline_scores, trial_scores.row(t));
        for (std::size_t i = 0; i < panel.n(); ++i) {
            const bool flipped = (trial_scores(t, i) >= ScoreReport::protect_threshold) !=
                                 (report.baseline_scores[i] >= ScoreReport::protect_threshold);
            if (flipped) {
                report.decision_flips[i]++;
                report.total_flips++;
            }
        }
    }
    report.spearman_mean = spearman_sum / static_cast<double>(options.trials);
    for (std::size_t i = 0; i < panel.n(); ++i) {
        const auto column = trial_scores.column(i);
        report.score_mean[i] = mean(column);
        report.score_stddev[i] = sample_stddev(column);
    }
    return report;
}

inline void write_weights_csv(std::ostream& out, const std::vector<std::string>& indicator_names,
                              const WeightVector& orm, const AhpResult& ahp,
                              const WeightVector& combined) {
    out << "indicator,orm,ahp,combined\n";
    for (std::size_t j = 0; j < indicator_names.size(); ++j)
        out << indicator_names[j] << ',' << format_double(orm.weights[j]) << ','
            << format_double(ahp.weights[j]) << ',' << format_double(combined.weights[j]) << '\n';
}

inline void write_scores_csv(std::ostream& out, const ScoreReport& report) {
    out << "id,score,gradient,protect\n";
    for (const auto& entry : report.entries)
        out << entry.id << ',' << format_double(entry.score) << ',' << gradient_name(entry.gradient)
            << ',' << (entry.protect ? "true" : "false") << '\n';
}

} // namespace climarisk

#endif // CLIMARISK_MCDM_HPP
