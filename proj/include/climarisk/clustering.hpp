#ifndef CLIMARISK_CLUSTERING_HPP
#define CLIMARISK_CLUSTERING_HPP

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/panel.hpp"
#include "climarisk/rng.hpp"

namespace climarisk {

struct Clustering {
    std::size_t k = 0;
    Matrix centroids;
    std::vector<std::size_t> assignment; // per input row
    double inertia = 0.0;                // sum of squared point-centroid distances
    std::size_t iterations = 0;
    std::vector<double> inertia_history; // after each Lloyd iteration
    bool converged = false;
};

struct KMeansOptions {
    std::uint64_t seed = 0;
    double tol = 0.0;            // centroid-shift early stop; 0 iterates to a fixed point
    std::size_t max_iter = 200;  // per restart
    std::size_t restarts = 10;   // k-means++ restarts, best inertia wins
};

namespace detail {

/// Canonical point order: lexicographic by coordinates, index as tiebreak.
/// Seeding and centroid accumulation walk points in this order, which makes
/// the outcome invariant to permutations of the input rows.
inline std::vector<std::size_t> canonical_order(const Matrix& points) {
    std::vector<std::size_t> order(points.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < points.cols(); ++j) {
            if (points(a, j) < points(b, j)) return true;
            if (points(a, j) > points(b, j)) return false;
        }
        return a < b;
    });
    return order;
}

inline std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point) {
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double distance = squared_distance(centroids.row(c), point);
        if (distance < best_distance) { // strict: ties go to the lower index
            best_distance = distance;
            best = c;
        }
    }
    return best;
}

inline Matrix kmeanspp_seed(const Matrix& points, const std::vector<std::size_t>& order,
                            std::size_t k, std::size_t first, Rng& rng) {
    Matrix centroids(k, points.cols());
    std::vector<double> distance(points.rows(), std::numeric_limits<double>::infinity());

    for (std::size_t j = 0; j < points.cols(); ++j) centroids(0, j) = points(first, j);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i : order) {
            const double d = squared_distance(points.row(i), centroids.row(c - 1));
            distance[i] = std::min(distance[i], d);
        }
        for (std::size_t i : order) total += distance[i];
        std::size_t chosen = order[0];
        if (total > 0.0) {
            const double draw = rng.uniform01() * total;
            double cumulative = 0.0;
            for (std::size_t i : order) {
                cumulative += distance[i];
                if (cumulative >= draw) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // all remaining mass at the chosen centroids: duplicate points
            chosen = order[rng.below(order.size())];
        }
        for (std::size_t j = 0; j < points.cols(); ++j) centroids(c, j) = points(chosen, j);
    }
    return centroids;
}

} // namespace detail

/// Lloyd iterations from a k-means++ start, restarted `restarts` times with
/// the best inertia kept. Deterministic given the seed, and independent of
/// the input row order.
inline Clustering kmeans(const Matrix& points, std::size_t k, const KMeansOptions& options = {}) {
    const std::size_t n = points.rows();
    if (n == 0) throw Error(Errc::empty_input, "no points to cluster");
    if (k == 0 || k > n)
        throw Error(Errc::k_too_large,
                    "K=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < points.cols(); ++j)
            if (!std::isfinite(points(i, j)))
                throw Error(Errc::non_numeric, "non-finite point at row " + std::to_string(i));

    const auto order = detail::canonical_order(points);
    const std::size_t restarts = std::max<std::size_t>(1, options.restarts);

    Clustering best;
    best.inertia = std::numeric_limits<double>::infinity();

    // Everything below walks points in canonical order so the outcome (and
    // its floating-point rounding) cannot depend on the input row order.

    auto compute_inertia = [&](const Matrix& centroids, const std::vector<std::size_t>& assignment) {
        double inertia = 0.0;
        for (std::size_t i : order)
            inertia += squared_distance(points.row(i), centroids.row(assignment[i]));
        return inertia;
    };

    // Lloyd to a fixed point (assignment stops changing), recording inertia
    // after every iteration.
    auto run_lloyd = [&](Matrix& centroids, std::vector<std::size_t>& assignment,
                         Clustering& current) {
        for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
            Matrix sums(k, points.cols());
            std::vector<std::size_t> counts(k, 0);
            for (std::size_t i : order) {
                const std::size_t c = assignment[i];
                ++counts[c];
                for (std::size_t j = 0; j < points.cols(); ++j) sums(c, j) += points(i, j);
            }

            // an emptied centroid restarts at the point farthest from its
            // nearest surviving centroid
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] != 0) continue;
                double worst = -1.0;
                std::size_t farthest = order[0];
                for (std::size_t i : order) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (std::size_t c2 = 0; c2 < k; ++c2) {
                        if (counts[c2] == 0) continue;
                        nearest =
                            std::min(nearest, squared_distance(centroids.row(c2), points.row(i)));
                    }
                    if (nearest > worst) {
                        worst = nearest;
                        farthest = i;
                    }
                }
                counts[c] = 1;
                for (std::size_t j = 0; j < points.cols(); ++j) sums(c, j) = points(farthest, j);
            }

            double shift = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                std::vector<double> updated(points.cols());
                for (std::size_t j = 0; j < points.cols(); ++j)
                    updated[j] = sums(c, j) / static_cast<double>(counts[c]);
                shift = std::max(shift, squared_distance(centroids.row(c), updated));
                for (std::size_t j = 0; j < points.cols(); ++j) centroids(c, j) = updated[j];
            }

            std::vector<std::size_t> next(n);
            for (std::size_t i = 0; i < n; ++i)
                next[i] = detail::nearest_centroid(centroids, points.row(i));

            const double inertia = compute_inertia(centroids, next);
            assert(current.inertia_history.empty() ||
                   inertia <= current.inertia_history.back() * (1.0 + 1e-12) + 1e-12);
            current.inertia_history.push_back(inertia);
            ++current.iterations;

            const bool stable = next == assignment;
            assignment = std::move(next);
            if (stable) {
                current.converged = true;
                return;
            }
            if (options.tol > 0.0 && std::sqrt(shift) < options.tol) {
                current.converged = true;
                return;
            }
        }
    };

    // Single-point move refinement (Hartigan-style): a Lloyd fixed point can
    // still be improved by transferring one point across the boundary, which
    // is what keeps best-of-restarts from stalling in shallow local optima
    // on small inputs. Every accepted move strictly lowers the inertia.
    auto refine_moves = [&](Matrix& centroids, std::vector<std::size_t>& assignment) {
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i : order) ++counts[assignment[i]];

        bool any_move = false;
        std::size_t budget = 16 * n + 64;
        bool improved = true;
        while (improved && budget > 0) {
            improved = false;
            for (std::size_t i : order) {
                const std::size_t from = assignment[i];
                if (counts[from] <= 1) continue;
                const double cost_from = static_cast<double>(counts[from]) /
                                         static_cast<double>(counts[from] - 1) *
                                         squared_distance(points.row(i), centroids.row(from));
                std::size_t to = from;
                double best_delta = -1e-12 * (1.0 + cost_from);
                for (std::size_t c = 0; c < k; ++c) {
                    if (c == from) continue;
                    const double gain = static_cast<double>(counts[c]) /
                                        static_cast<double>(counts[c] + 1) *
                                        squared_distance(points.row(i), centroids.row(c));
                    if (gain - cost_from < best_delta) {
                        best_delta = gain - cost_from;
                        to = c;
                    }
                }
                if (to == from) continue;
                // exact incremental mean updates
                for (std::size_t j = 0; j < points.cols(); ++j) {
                    centroids(from, j) =
                        (centroids(from, j) * static_cast<double>(counts[from]) - points(i, j)) /
                        static_cast<double>(counts[from] - 1);
                    centroids(to, j) =
                        (centroids(to, j) * static_cast<double>(counts[to]) + points(i, j)) /
                        static_cast<double>(counts[to] + 1);
                }
                --counts[from];
                ++counts[to];
                assignment[i] = to;
                improved = true;
                any_move = true;
                if (--budget == 0) break;
            }
        }
        return any_move;
    };

    const std::size_t first_base = Rng::derive(options.seed, 0x6b79).below(n);

    for (std::size_t restart = 0; restart < restarts; ++restart) {
        Rng rng = Rng::derive(options.seed, restart);
        // rotate the first seed through the canonical order so restarts
        // explore distinct basins instead of resampling the same spread pair
        const std::size_t first = order[(first_base + restart) % n];
        Matrix centroids = detail::kmeanspp_seed(points, order, k, first, rng);

        Clustering current;
        current.k = k;
        current.assignment.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            current.assignment[i] = detail::nearest_centroid(centroids, points.row(i));

        run_lloyd(centroids, current.assignment, current);
        while (refine_moves(centroids, current.assignment)) {
            current.converged = false;
            run_lloyd(centroids, current.assignment, current);
        }

        current.centroids = std::move(centroids);
        current.inertia =
            current.inertia_history.empty() ? 0.0 : current.inertia_history.back();
        if (current.inertia < best.inertia) best = std::move(current);
    }
    return best;
}

/// Scales the population column by (1 + k_percent/100). Values are
/// intentionally not re-clamped into [0,1]: the point of the adjustment is
/// to push population weight beyond its observed range.
inline NormalizedPanel reweight_population(const NormalizedPanel& panel,
                                           std::string_view population_column, double k_percent) {
    const auto column = panel.column_index(population_column);
    if (!column)
        throw Error(Errc::no_population_column,
                    "panel has no column \"" + std::string(population_column) + "\"");
    if (!(k_percent > -100.0))
        throw Error(Errc::config_invalid, "k_percent must be > -100");
    NormalizedPanel out = panel;
    const double factor = 1.0 + k_percent / 100.0;
    for (std::size_t i = 0; i < out.n(); ++i) out.values(i, *column) *= factor;
    return out;
}

struct ClusterLabels {
    std::vector<int> labels; // +1 build / -1 skip, aligned with the points
    std::size_t positive_cluster = 0;
    std::vector<double> cluster_mean_benchmark;
    std::vector<std::string> warnings;
};

/// Maps a 2-cluster result onto +1/-1 by comparing mean benchmark scores:
/// the cluster scoring higher becomes the positive class. An exact tie goes
/// to the lower cluster index, with a warning.
inline ClusterLabels label_clusters(const Clustering& clustering,
                                    std::span<const double> benchmark_scores) {
    if (clustering.k != 2)
        throw Error(Errc::k_not_two, "cluster labeling needs K=2, got " + std::to_string(clustering.k));
    if (benchmark_scores.size() != clustering.assignment.size())
        throw Error(Errc::dimension_mismatch, "benchmark scores do not align with the points");

    double sums[2] = {0.0, 0.0};
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < benchmark_scores.size(); ++i) {
        sums[clustering.assignment[i]] += benchmark_scores[i];
        counts[clustering.assignment[i]]++;
    }
    ClusterLabels out;
    out.cluster_mean_benchmark = {counts[0] ? sums[0] / counts[0] : 0.0,
                                  counts[1] ? sums[1] / counts[1] : 0.0};
    if (out.cluster_mean_benchmark[0] == out.cluster_mean_benchmark[1]) {
        out.positive_cluster = 0;
        out.warnings.push_back("TieBreakWarning: equal mean benchmark scores; cluster 0 positive");
    } else {
        out.positive_cluster =
            out.cluster_mean_benchmark[0] > out.cluster_mean_benchmark[1] ? 0 : 1;
    }
    out.labels.resize(clustering.assignment.size());
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i)
        out.labels[i] = clustering.assignment[i] == out.positive_cluster ? +1 : -1;
    return out;
}

inline void write_clusters_csv(std::ostream& out, const std::vector<std::string>& ids,
                               const Clustering& clustering, const ClusterLabels& labels) {
    out << "id,cluster,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << clustering.assignment[i] << ',' << labels.labels[i] << '\n';
}

inline void write_centroids_csv(std::ostream& out, const std::vector<std::string>& names,
                                const Clustering& clustering) {
    out << "cluster";
    for (const auto& name : names) out << ',' << name;
    out << '\n';
    for (std::size_t c = 0; c < clustering.centroids.rows(); ++c) {
        out << c;
        for (std::size_t j = 0; j < clustering.centroids.cols(); ++j)
            out << ',' << format_double(clustering.centroids(c, j));
        out << '\n';
    }
}

} // namespace climarisk

#endif // CLIMARISK_CLUSTERING_HPP
