#include <doctest.h>

#include <set>
#include <sstream>

#include "climarisk/sampling.hpp"

using namespace climarisk;

namespace {

LabeledDataset make_dataset(const Matrix& features, const std::vector<int>& labels) {
    LabeledDataset d;
    d.features = features;
    d.labels = labels;
    d.provenance.assign(labels.size(), Provenance::real);
    return d;
}

} // namespace

TEST_CASE("smote interpolation formula") {
    // base (0,0), sole neighbor (2,4): sample = base + (neighbor-base)*u
    const auto minority = Matrix::from_rows({{0, 0}, {2, 4}});
    SmoteConfig config;
    config.k = 1;
    config.n_synthetic = 200;
    config.seed = 9;
    const auto result = smote(minority, minority, config);
    REQUIRE(result.samples.rows() == 200);
    for (std::size_t s = 0; s < result.samples.rows(); ++s) {
        const auto& t = result.trace[s];
        CHECK(t.neighbor == 1 - t.base); // only possible neighbor
        const double bx = minority(t.base, 0), by = minority(t.base, 1);
        const double nx = minority(t.neighbor, 0), ny = minority(t.neighbor, 1);
        CHECK(result.samples(s, 0) == doctest::Approx(bx + (nx - bx) * t.u).epsilon(1e-15));
        CHECK(result.samples(s, 1) == doctest::Approx(by + (ny - by) * t.u).epsilon(1e-15));
        CHECK(t.u >= 0.0);
        CHECK(t.u < 1.0);
    }
    // spot value: u = 0.25 from (0,0) toward (2,4) would be (0.5, 1.0)
    const double u = 0.25;
    CHECK(0.0 + (2.0 - 0.0) * u == doctest::Approx(0.5));
    CHECK(0.0 + (4.0 - 0.0) * u == doctest::Approx(1.0));
}

TEST_CASE("smote emits the requested count") {
    // 23 real rows (22 majority + 1 minority): generating 23 synthetics
    // doubles the dataset to 46.
    Matrix majority(22, 3);
    for (std::size_t i = 0; i < 22; ++i)
        for (std::size_t j = 0; j < 3; ++j) majority(i, j) = double(i + j);
    const auto minority = Matrix::from_rows({{-1, -1, -1}});
    SmoteConfig config;
    config.k = 5;
    config.n_synthetic = 23;
    config.seed = 3;
    config.neighbor_pool = NeighborPool::majority;
    const auto result = smote(minority, majority, config);
    CHECK(result.samples.rows() == 23);
    CHECK(23 + 23 == 46);
}

TEST_CASE("smote determinism under fixed seed") {
    Matrix minority(8, 2);
    Rng rng(13);
    for (std::size_t i = 0; i < 8; ++i) {
        minority(i, 0) = rng.uniform01();
        minority(i, 1) = rng.uniform01();
    }
    SmoteConfig config;
    config.k = 3;
    config.n_synthetic = 64;
    config.seed = 42;
    const auto a = smote(minority, minority, config);
    const auto b = smote(minority, minority, config);
    CHECK(a.samples == b.samples);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].base == b.trace[i].base);
        CHECK(a.trace[i].neighbor == b.trace[i].neighbor);
        CHECK(a.trace[i].u == b.trace[i].u);
    }
}

TEST_CASE("smote geometric properties via trace") {
    Matrix minority(10, 3);
    Rng rng(101);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 3; ++j) minority(i, j) = rng.uniform(-5, 5);
    SmoteConfig config;
    config.k = 4;
    config.n_synthetic = 500;
    config.seed = 77;
    const auto result = smote(minority, minority, config);

    for (std::size_t s = 0; s < result.samples.rows(); ++s) {
        const auto& t = result.trace[s];
        // colinearity: sample - base is u * (neighbor - base) exactly
        double residual = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            const double expected =
                minority(t.base, j) + (minority(t.neighbor, j) - minority(t.base, j)) * t.u;
            residual = std::max(residual, std::abs(result.samples(s, j) - expected));
        }
        CHECK(residual < 1e-9);

        // bounding box of {base} ∪ k-neighborhood contains the sample
        auto nb = detail::k_nearest(minority, minority.row(t.base), config.k, t.base);
        for (std::size_t j = 0; j < 3; ++j) {
            double lo = minority(t.base, j), hi = lo;
            for (auto idx : nb) {
                lo = std::min(lo, minority(idx, j));
                hi = std::max(hi, minority(idx, j));
            }
            CHECK(result.samples(s, j) >= lo - 1e-12);
            CHECK(result.samples(s, j) <= hi + 1e-12);
        }
    }
}

TEST_CASE("smote recognizes an equal copy of the minority as the minority pool") {
    // the self-exclusion rule must apply even when the caller passes a copy
    const auto minority = Matrix::from_rows({{0, 0}, {1, 1}});
    const Matrix pool_copy = minority;
    SmoteConfig config;
    config.k = 2; // needs 2 non-self neighbors, but only 1 exists
    config.n_synthetic = 4;
    try {
        smote(minority, pool_copy, config);
        FAIL("expected PoolTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::pool_too_small);
    }
    config.k = 1;
    const auto result = smote(minority, pool_copy, config);
    for (const auto& t : result.trace) CHECK(t.neighbor != t.base);
}

TEST_CASE("smote pool too small") {
    const auto minority = Matrix::from_rows({{0, 0}});
    SmoteConfig config;
    config.k = 5;
    config.n_synthetic = 3;
    try {
        smote(minority, minority, config);
        FAIL("expected PoolTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::pool_too_small);
    }

    Matrix empty;
    CHECK_THROWS_AS(smote(empty, minority, config), Error);
}

TEST_CASE("balance equalizes class counts") {
    SUBCASE("22 vs 1") {
        Matrix features(23, 2);
        std::vector<int> labels(23, +1);
        Rng rng(21);
        for (std::size_t i = 0; i < 23; ++i) {
            features(i, 0) = rng.uniform01();
            features(i, 1) = rng.uniform01();
        }
        labels[7] = -1;
        SmoteConfig config;
        config.seed = 1;
        config.neighbor_pool = NeighborPool::majority; // single minority point
        const auto result = balance(make_dataset(features, labels), config);
        CHECK(result.synthesized == 21);
        CHECK(result.dataset.count_label(+1) == 22);
        CHECK(result.dataset.count_label(-1) == 22);
        CHECK(result.minority_label == -1);
        std::size_t synthetic = 0;
        for (auto p : result.dataset.provenance) synthetic += (p == Provenance::synthetic);
        CHECK(synthetic == 21);
    }
    SUBCASE("already balanced passes through") {
        Matrix features(10, 2);
        std::vector<int> labels;
        for (std::size_t i = 0; i < 10; ++i) {
            features(i, 0) = double(i);
            features(i, 1) = double(i) * 0.5;
            labels.push_back(i < 5 ? +1 : -1);
        }
        const auto result = balance(make_dataset(features, labels), {});
        CHECK(result.synthesized == 0);
        CHECK(result.dataset.size() == 10);
        CHECK(result.dataset.features == features);
    }
    SUBCASE("single-class input throws") {
        const auto features = Matrix::from_rows({{1, 2}, {3, 4}});
        CHECK_THROWS_AS(balance(make_dataset(features, {1, 1}), {}), Error);
    }
    SUBCASE("minority pool with a single minority point is an explicit error") {
        Matrix features(4, 2);
        for (std::size_t i = 0; i < 4; ++i) features(i, 0) = double(i);
        SmoteConfig config; // default pool: minority
        try {
            balance(make_dataset(features, {1, 1, 1, -1}), config);
            FAIL("expected PoolTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::pool_too_small);
        }
    }
}

TEST_CASE("balanced synthetic rows carry the minority label and stay on segments") {
    Matrix features(9, 2);
    std::vector<int> labels;
    Rng rng(31);
    for (std::size_t i = 0; i < 9; ++i) {
        features(i, 0) = rng.uniform(-2, 2);
        features(i, 1) = rng.uniform(-2, 2);
        labels.push_back(i < 6 ? +1 : -1);
    }
    SmoteConfig config;
    config.k = 2;
    config.seed = 17;
    const auto result = balance(make_dataset(features, labels), config);
    CHECK(result.dataset.count_label(+1) == 6);
    CHECK(result.dataset.count_label(-1) == 6);

    const auto minority_idx = make_dataset(features, labels).indices_of(-1);
    for (std::size_t s = 0; s < result.trace.size(); ++s) {
        const auto& t = result.trace[s];
        const std::size_t row = 9 + s;
        CHECK(result.dataset.labels[row] == -1);
        for (std::size_t j = 0; j < 2; ++j) {
            const double base = features(minority_idx[t.base], j);
            const double nb = features(minority_idx[t.neighbor], j);
            CHECK(result.dataset.features(row, j) ==
                  doctest::Approx(base + (nb - base) * t.u).epsilon(1e-12));
        }
    }
}

TEST_CASE("trace CSV") {
    std::vector<SmoteTraceEntry> trace{{0, 1, 0.25}, {2, 0, 0.5}};
    std::ostringstream out;
    write_trace_csv(out, trace);
    CHECK(out.str() == "base,neighbor,u\n0,1,0.25\n2,0,0.5\n");
}
