#ifndef CLIMARISK_STATS_HPP
#define CLIMARISK_STATS_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace climarisk {

inline double mean(std::span<const double> v) {
    assert(!v.empty());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Fractional ranks (1-based), ties get the average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // average of 1-based ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation, tie-aware (Pearson on average ranks).
inline double spearman(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size() && a.size() >= 2);
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double ma = mean(ra), mb = mean(rb);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 1.0; // constant ranking on either side
    return num / std::sqrt(da * db);
}

} // namespace climarisk

#endif // CLIMARISK_STATS_HPP
