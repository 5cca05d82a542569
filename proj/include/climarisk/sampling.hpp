#ifndef CLIMARISK_SAMPLING_HPP
#define CLIMARISK_SAMPLING_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "climarisk/csv.hpp"
#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/rng.hpp"

namespace climarisk {

enum class Provenance : std::uint8_t { real, synthetic };

/// Feature matrix with +1/-1 labels. Rows appended by oversampling are
/// flagged synthetic.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels; // +1 / -1
    std::vector<Provenance> provenance;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }

    std::size_t count_label(int label) const {
        std::size_t c = 0;
        for (int y : labels) c += (y == label);
        return c;
    }

    std::vector<std::size_t> indices_of(int label) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) idx.push_back(i);
        return idx;
    }
};

/// Which set the interpolation neighbors are drawn from. `minority` is the
/// textbook behaviour; `majority` interpolates toward the other class and
/// exists for datasets whose minority class is a single point.
enum class NeighborPool : std::uint8_t { minority, majority };

struct SmoteConfig {
    std::size_t k = 5;
    std::optional<std::size_t> n_synthetic; // unset: balance() equalizes counts
    std::uint64_t seed = 0;
    NeighborPool neighbor_pool = NeighborPool::minority;
    bool clamp_k = false; // shrink k to the pool size instead of throwing
};

/// One generated sample: row `base` of the minority set interpolated toward
/// row `neighbor` of the pool by fraction u in [0,1).
struct SmoteTraceEntry {
    std::size_t base;
    std::size_t neighbor;
    double u;
};

struct SmoteResult {
    Matrix samples;
    std::vector<SmoteTraceEntry> trace;
};

namespace detail {

/// Indices of the k nearest rows of `pool` to `point` (Euclidean),
/// excluding `exclude` when it refers into the pool. Distance ties resolve
/// to the lower row index.
inline std::vector<std::size_t> k_nearest(const Matrix& pool, std::span<const double> point,
                                          std::size_t k, std::optional<std::size_t> exclude) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(pool.rows());
    for (std::size_t i = 0; i < pool.rows(); ++i) {
        if (exclude && *exclude == i) continue;
        dist.emplace_back(squared_distance(pool.row(i), point), i);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < dist.size(); ++i) out.push_back(dist[i].second);
    return out;
}

} // namespace detail

/// SMOTE: repeatedly pick a random minority sample x, one of its k nearest
/// pool neighbours n, and a uniform u in [0,1), and emit x + (n - x) * u.
/// Deterministic given the seed.
inline SmoteResult smote(const Matrix& minority, const Matrix& pool, const SmoteConfig& config) {
    if (minority.rows() == 0) throw Error(Errc::empty_minority, "minority set is empty");
    if (config.k == 0) throw Error(Errc::pool_too_small, "k must be >= 1");

    const bool pool_is_minority = (&pool == &minority) || pool == minority;
    const std::size_t pool_capacity = pool.rows() - (pool_is_minority ? 1 : 0);
    std::size_t k = config.k;
    if (pool_capacity < k) {
        if (!config.clamp_k || pool_capacity == 0)
            throw Error(Errc::pool_too_small,
                        "neighbor pool has " + std::to_string(pool_capacity) +
                            " candidates, need k=" + std::to_string(k) +
                            (pool_is_minority ? " (pool is the minority set itself)" : ""));
        k = pool_capacity;
    }

    const std::size_t count = config.n_synthetic.value_or(0);
    Rng rng(config.seed);
    SmoteResult result;
    result.samples = Matrix(count, minority.cols());
    result.trace.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t base = rng.below(minority.rows());
        const auto neighbors =
            detail::k_nearest(pool, minority.row(base), k,
                              pool_is_minority ? std::optional<std::size_t>(base) : std::nullopt);
        const std::size_t neighbor = neighbors[rng.below(neighbors.size())];
        const double u = rng.uniform01();
        for (std::size_t j = 0; j < minority.cols(); ++j) {
            const double x = minority(base, j);
            result.samples(s, j) = x + (pool(neighbor, j) - x) * u;
        }
        result.trace.push_back({base, neighbor, u});
    }
    return result;
}

struct BalanceResult {
    LabeledDataset dataset;
    int minority_label = 0;
    std::size_t synthesized = 0;
    std::vector<SmoteTraceEntry> trace; // indices into the minority/pool row sets
};

/// Appends synthetic minority rows until the class counts are equal (or,
/// when config.n_synthetic is set, exactly that many). An already balanced
/// dataset passes through unchanged.
inline BalanceResult balance(const LabeledDataset& dataset, SmoteConfig config) {
    const std::size_t pos = dataset.count_label(+1);
    const std::size_t neg = dataset.count_label(-1);
    if (pos == 0 || neg == 0)
        throw Error(Errc::single_class, "balance() needs both classes present");

    BalanceResult result;
    result.dataset = dataset;
    result.minority_label = pos < neg ? +1 : -1;
    if (pos == neg && !config.n_synthetic) return result;

    const auto minority_idx = dataset.indices_of(result.minority_label);
    const auto majority_idx = dataset.indices_of(-result.minority_label);

    Matrix minority(minority_idx.size(), dataset.dim());
    for (std::size_t r = 0; r < minority_idx.size(); ++r)
        for (std::size_t j = 0; j < dataset.dim(); ++j)
            minority(r, j) = dataset.features(minority_idx[r], j);

    Matrix majority(majority_idx.size(), dataset.dim());
    for (std::size_t r = 0; r < majority_idx.size(); ++r)
        for (std::size_t j = 0; j < dataset.dim(); ++j)
            majority(r, j) = dataset.features(majority_idx[r], j);

    if (!config.n_synthetic)
        config.n_synthetic = std::max(pos, neg) - std::min(pos, neg);

    const Matrix& pool = config.neighbor_pool == NeighborPool::minority ? minority : majority;
    auto generated = smote(minority, pool, config);

    for (std::size_t s = 0; s < generated.samples.rows(); ++s) {
        result.dataset.features.append_row(generated.samples.row(s));
        result.dataset.labels.push_back(result.minority_label);
        result.dataset.provenance.push_back(Provenance::synthetic);
    }
    result.synthesized = generated.samples.rows();
    result.trace = std::move(generated.trace);
    return result;
}

/// Audit trail: one line per synthetic sample.
inline void write_trace_csv(std::ostream& out, const std::vector<SmoteTraceEntry>& trace) {
    out << "base,neighbor,u\n";
    for (const auto& t : trace)
        out << t.base << ',' << t.neighbor << ',' << format_double(t.u) << '\n';
}

} // namespace climarisk

#endif // CLIMARISK_SAMPLING_HPP
