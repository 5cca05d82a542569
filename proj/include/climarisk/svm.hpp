#ifndef CLIMARISK_SVM_HPP
#define CLIMARISK_SVM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/rng.hpp"
#include "climarisk/sampling.hpp"

namespace climarisk {

/// Linear soft-margin separating hyperplane with its dual multipliers.
struct SvmModel {
    std::vector<double> w;
    double b = 0.0;
    std::vector<double> alphas;
    double C = 1.0;
    std::vector<std::size_t> support_indices; // alphas above support_epsilon

    bool converged = false;
    double kkt_residual = 0.0;
    std::size_t sweeps = 0;
    std::vector<double> objective_history; // dual objective after each sweep
    std::vector<std::string> warnings;

    static constexpr double support_epsilon = 1e-10;
};

/// Sigmoid map from decision values to probabilities:
///   p(f) = 1 / (1 + exp(A*f + B)), decreasing in A*f + B.
struct Calibration {
    double A = -1.0;
    double B = 0.0;

    double probability(double decision) const {
        const double z = A * decision + B;
        double p;
        // evaluate the stable branch
        if (z >= 0.0) {
            const double e = std::exp(-z);
            p = e / (1.0 + e);
        } else {
            p = 1.0 / (1.0 + std::exp(z));
        }
        // keep the output strictly inside (0,1) even where the sigmoid
        // saturates at double precision
        constexpr double floor = 1e-15;
        return std::clamp(p, floor, 1.0 - floor);
    }
};

struct TrainOptions {
    double C = 1.0;
    double tol = 1e-6;
    std::size_t max_sweeps = 0; // 0: 10 * N
};

inline double decision_value(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.w.size())
        throw Error(Errc::dimension_mismatch, "feature vector has dimension " +
                                                  std::to_string(x.size()) + ", model expects " +
                                                  std::to_string(model.w.size()));
    return dot(model.w, x) + model.b;
}

namespace detail {

/// KKT complementarity residual of one sample given its margin y*f(x).
inline double kkt_violation(double alpha, double C, double margin) {
    if (alpha <= SvmModel::support_epsilon) return std::max(0.0, 1.0 - margin);
    if (alpha >= C - SvmModel::support_epsilon) return std::max(0.0, margin - 1.0);
    return std::abs(margin - 1.0);
}

inline double dual_objective(const std::vector<double>& alphas, const std::vector<int>& labels,
                             const Matrix& gram) {
    const std::size_t n = alphas.size();
    double sum = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alphas[i] == 0.0) continue;
        sum += alphas[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (alphas[j] == 0.0) continue;
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * gram(i, j);
        }
    }
    return sum - 0.5 * quad;
}

} // namespace detail

/// Trains the soft-margin SVM by SMO-style pairwise dual coordinate ascent.
/// The sweep order is fixed, so training is deterministic. On hitting the
/// sweep cap the model is still returned, flagged not converged.
inline SvmModel train_svm(const LabeledDataset& data, const TrainOptions& options = {}) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    if (data.count_label(+1) == 0 || data.count_label(-1) == 0)
        throw Error(Errc::single_class, "training data must contain both classes");
    if (!(options.C > 0.0)) throw Error(Errc::config_invalid, "C must be positive");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (!std::isfinite(data.features(i, j)))
                throw Error(Errc::non_numeric, "non-finite feature at row " + std::to_string(i));

    const double C = options.C;
    const double tol = options.tol;
    const std::size_t max_sweeps = options.max_sweeps ? options.max_sweeps : 10 * n;

    // Kernel hook: everything below touches features only through this Gram
    // matrix, so a nonlinear kernel would slot in here.
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            gram(i, j) = gram(j, i) = dot(data.features.row(i), data.features.row(j));

    const auto& y = data.labels;
    std::vector<double> alphas(n, 0.0);
    std::vector<double> errors(n); // f(x_i) - y_i with the running offset
    double offset = 0.0;
    for (std::size_t i = 0; i < n; ++i) errors[i] = -static_cast<double>(y[i]);

    const double step_eps = 1e-12;

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2) return false;
        const double alph1 = alphas[i1], alph2 = alphas[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = errors[i1], e2 = errors[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s < 0) {
            lo = std::max(0.0, alph2 - alph1);
            hi = std::min(C, C + alph2 - alph1);
        } else {
            lo = std::max(0.0, alph1 + alph2 - C);
            hi = std::min(C, alph1 + alph2);
        }
        if (lo >= hi) return false;

        const double k11 = gram(i1, i1), k12 = gram(i1, i2), k22 = gram(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = alph2 + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // flat direction: evaluate the pair-restricted dual at both clip
            // ends and move to the better one
            const double v1 = (e1 + y1 - offset) - alph1 * y1 * k11 - alph2 * y2 * k12;
            const double v2 = (e2 + y2 - offset) - alph1 * y1 * k12 - alph2 * y2 * k22;
            auto objective_at = [&](double cand2) {
                const double cand1 = alph1 + s * (alph2 - cand2);
                return cand1 + cand2 -
                       0.5 * (cand1 * cand1 * k11 + cand2 * cand2 * k22 +
                              2.0 * s * cand1 * cand2 * k12) -
                       y1 * cand1 * v1 - y2 * cand2 * v2;
            };
            const double obj_lo = objective_at(lo);
            const double obj_hi = objective_at(hi);
            if (obj_lo > obj_hi + step_eps)
                a2 = lo;
            else if (obj_hi > obj_lo + step_eps)
                a2 = hi;
            else
                return false;
        }
        if (std::abs(a2 - alph2) < step_eps * (a2 + alph2 + step_eps)) return false;
        const double a1 = alph1 + s * (alph2 - a2);

        // offset update keeping KKT for the pair
        const double b1 = e1 + y1 * (a1 - alph1) * k11 + y2 * (a2 - alph2) * k12;
        const double b2 = e2 + y1 * (a1 - alph1) * k12 + y2 * (a2 - alph2) * k22;
        double delta_offset;
        if (a1 > step_eps && a1 < C - step_eps)
            delta_offset = b1;
        else if (a2 > step_eps && a2 < C - step_eps)
            delta_offset = b2;
        else
            delta_offset = 0.5 * (b1 + b2);
        offset -= delta_offset;

        for (std::size_t i = 0; i < n; ++i)
            errors[i] += y1 * (a1 - alph1) * gram(i1, i) + y2 * (a2 - alph2) * gram(i2, i) -
                         delta_offset;
        alphas[i1] = a1;
        alphas[i2] = a2;
        return true;
    };

    auto examine = [&](std::size_t i2) -> bool {
        const double y2 = y[i2];
        const double alph2 = alphas[i2];
        const double e2 = errors[i2];
        const double r2 = e2 * y2; // y*f - 1
        if (!((r2 < -tol && alph2 < C) || (r2 > tol && alph2 > 0.0))) return false;

        // second-choice heuristic: largest |E1 - E2| among non-bound points
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alphas[i] <= 0.0 || alphas[i] >= C) continue;
            const double gap = std::abs(errors[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (alphas[i] > 0.0 && alphas[i] < C && take_step(i, i2)) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (take_step(i, i2)) return true;
        return false;
    };

    SvmModel model;
    model.C = C;
    bool examine_all = true;
    std::size_t sweeps = 0;
    double max_violation = std::numeric_limits<double>::infinity();
    while (sweeps < max_sweeps) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!examine_all && (alphas[i] <= 0.0 || alphas[i] >= C)) continue;
            changed += examine(i) ? 1 : 0;
        }
        ++sweeps;
        model.objective_history.push_back(detail::dual_objective(alphas, y, gram));

        max_violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = y[i] * (errors[i] + y[i]); // y * f(x_i)
            max_violation = std::max(max_violation, detail::kkt_violation(alphas[i], C, margin));
        }
        if (max_violation <= tol) break;
        if (examine_all)
            examine_all = false;
        else if (changed == 0)
            examine_all = true;
    }

    model.alphas = alphas;
    model.sweeps = sweeps;
    model.w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (alphas[i] <= SvmModel::support_epsilon) continue;
        model.support_indices.push_back(i);
        for (std::size_t j = 0; j < d; ++j)
            model.w[j] += alphas[i] * y[i] * data.features(i, j);
    }

    // Offset from the KKT conditions: free support vectors pin it exactly;
    // averaging smooths numerical noise. With none free, take the midpoint
    // of the feasible interval.
    double pinned_sum = 0.0;
    std::size_t pinned_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = y[i] - dot(model.w, data.features.row(i));
        const bool at_zero = alphas[i] <= SvmModel::support_epsilon;
        const bool at_cap = alphas[i] >= C - SvmModel::support_epsilon;
        if (!at_zero && !at_cap) {
            pinned_sum += t;
            ++pinned_count;
        } else if ((y[i] > 0 && at_zero) || (y[i] < 0 && at_cap)) {
            lower = std::max(lower, t);
        } else {
            upper = std::min(upper, t);
        }
    }
    if (pinned_count > 0)
        model.b = pinned_sum / static_cast<double>(pinned_count);
    else if (std::isfinite(lower) && std::isfinite(upper))
        model.b = 0.5 * (lower + upper);
    else
        model.b = std::isfinite(lower) ? lower : upper;

    model.kkt_residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double margin = y[i] * (dot(model.w, data.features.row(i)) + model.b);
        model.kkt_residual =
            std::max(model.kkt_residual, detail::kkt_violation(alphas[i], C, margin));
    }
    model.converged = max_violation <= tol || model.kkt_residual <= tol;
    if (!model.converged)
        model.warnings.push_back("DidNotConverge: KKT residual " +
                                 format_double(model.kkt_residual) + " after " +
                                 std::to_string(sweeps) + " sweeps (cap " +
                                 std::to_string(max_sweeps) + ")");
    return model;
}

/// Fits the probability sigmoid by damped Newton on the calibration
/// negative log-likelihood with the usual smoothed targets.
inline Calibration fit_calibration(std::span<const double> decisions,
                                   std::span<const int> labels) {
    if (decisions.size() != labels.size())
        throw Error(Errc::dimension_mismatch, "decision/label length mismatch");
    const std::size_t n = decisions.size();
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw Error(Errc::single_class, "calibration needs both classes");

    const double hi_target = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double lo_target = 1.0 / (static_cast<double>(n_neg) + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? hi_target : lo_target;

    auto nll = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * decisions[i] + b;
            const double log1pez = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            f += log1pez - (1.0 - target[i]) * z;
        }
        return f;
    };

    double A = 0.0;
    double B = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    double fval = nll(A, B);
    constexpr double ridge = 1e-12;
    constexpr int max_iter = 200;

    for (int it = 0; it < max_iter; ++it) {
        double g1 = 0.0, g2 = 0.0, h11 = ridge, h22 = ridge, h12 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = A * decisions[i] + B;
            double p; // model probability of the positive class
            if (z >= 0.0) {
                const double e = std::exp(-z);
                p = e / (1.0 + e);
            } else {
                p = 1.0 / (1.0 + std::exp(z));
            }
            const double d1 = target[i] - p;
            const double d2 = p * (1.0 - p);
            g1 += d1 * decisions[i];
            g2 += d1;
            h11 += decisions[i] * decisions[i] * d2;
            h12 += decisions[i] * d2;
            h22 += d2;
        }
        if (std::max(std::abs(g1), std::abs(g2)) < 1e-12) break;

        const double det = h11 * h22 - h12 * h12;
        double dA = -(h22 * g1 - h12 * g2) / det;
        double dB = -(h11 * g2 - h12 * g1) / det;

        double step = 1.0;
        bool moved = false;
        while (step >= 1e-10) {
            const double cand = nll(A + step * dA, B + step * dB);
            if (cand < fval + 1e-12) {
                A += step * dA;
                B += step * dB;
                fval = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return {A, B};
}

inline Calibration fit_calibration(const SvmModel& model, const LabeledDataset& data) {
    std::vector<double> decisions(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        decisions[i] = decision_value(model, data.features.row(i));
    return fit_calibration(decisions, data.labels);
}

inline double predict_probability(const SvmModel& model, const Calibration& calib,
                                  std::span<const double> x) {
    return calib.probability(decision_value(model, x));
}

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold sweep over the scores. Ties are grouped, so the area (trapezoid
/// rule, accumulated in integers) equals the Mann-Whitney statistic exactly.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(Errc::dimension_mismatch, "score/label length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw Error(Errc::single_class, "ROC needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::uint64_t tp = 0, fp = 0, area2 = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] > 0 ? dtp : dfp)++;
            ++j;
        }
        area2 += dfp * (2 * tp + dtp); // trapezoid: dFP * (TP_before + TP_after)
        tp += dtp;
        fp += dfp;
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos),
                                scores[order[i]]});
        i = j;
    }
    curve.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return curve;
}

struct CvReport {
    std::size_t folds = 0;
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    std::vector<RocCurve> fold_roc; // empty curve when a test fold is single-class
    std::vector<std::string> warnings;
};

/// Deterministic stratified fold assignment: shuffle within each class, then
/// deal round-robin with a cursor that carries across classes (so total fold
/// sizes differ by at most one).
inline std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels,
                                                              std::size_t k, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> folds(k);
    Rng rng(seed);
    std::size_t cursor = 0;
    for (int label : {+1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) idx.push_back(i);
        rng.shuffle(idx.begin(), idx.end());
        for (std::size_t i : idx) {
            folds[cursor % k].push_back(i);
            ++cursor;
        }
    }
    return folds;
}

/// k-fold cross-validation with stratified folds; accuracy is the fraction
/// of correct decision-value signs on the held-out fold.
inline CvReport cross_validate(const LabeledDataset& data, std::size_t k,
                               const TrainOptions& options, std::uint64_t seed) {
    if (k < 2) throw Error(Errc::fold_too_small, "need at least 2 folds");
    if (k > data.size())
        throw Error(Errc::fold_too_small, "cannot split " + std::to_string(data.size()) +
                                              " samples into " + std::to_string(k) + " folds");
    const auto folds = stratified_folds(data.labels, k, seed);

    CvReport report;
    report.folds = k;
    report.fold_accuracy.resize(k);
    report.fold_roc.resize(k);

    for (std::size_t f = 0; f < k; ++f) {
        std::vector<char> in_test(data.size(), 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;

        LabeledDataset train;
        train.features = Matrix(0, data.dim());
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (in_test[i]) continue;
            train.features.append_row(data.features.row(i));
            train.labels.push_back(data.labels[i]);
            train.provenance.push_back(data.provenance.empty() ? Provenance::real
                                                               : data.provenance[i]);
        }
        if (train.count_label(+1) == 0 || train.count_label(-1) == 0)
            throw Error(Errc::single_class_fold,
                        "training split for fold " + std::to_string(f + 1) + " is single-class");

        const auto model = train_svm(train, options);
        for (const auto& warning : model.warnings)
            report.warnings.push_back("fold " + std::to_string(f + 1) + ": " + warning);

        std::vector<double> scores;
        std::vector<int> truth;
        std::size_t correct = 0;
        for (std::size_t i : folds[f]) {
            const double value = decision_value(model, data.features.row(i));
            scores.push_back(value);
            truth.push_back(data.labels[i]);
            const int predicted = value >= 0.0 ? +1 : -1;
            correct += predicted == data.labels[i];
        }
        report.fold_accuracy[f] =
            static_cast<double>(correct) / static_cast<double>(folds[f].size());

        bool has_pos = false, has_neg = false;
        for (int y : truth) (y > 0 ? has_pos : has_neg) = true;
        if (has_pos && has_neg) {
            report.fold_roc[f] = roc_curve(scores, truth);
        } else {
            report.warnings.push_back("fold " + std::to_string(f + 1) +
                                      ": test fold is single-class, ROC skipped");
        }
    }
    report.mean_accuracy =
        std::accumulate(report.fold_accuracy.begin(), report.fold_accuracy.end(), 0.0) /
        static_cast<double>(k);
    return report;
}

} // namespace climarisk

#endif // CLIMARISK_SVM_HPP
