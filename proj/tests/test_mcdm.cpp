#include <doctest.h>

#include <cmath>
#include <sstream>

#include "climarisk/mcdm.hpp"

using namespace climarisk;

namespace {

NormalizedPanel panel_from_rows(const Matrix& values) {
    NormalizedPanel p;
    p.values = values;
    for (std::size_t j = 0; j < values.cols(); ++j) {
        p.indicator_names.push_back("c" + std::to_string(j));
        p.directions.push_back(Direction::positive);
        p.col_min.push_back(0.0);
        p.col_max.push_back(1.0);
        p.degenerate.push_back(false);
    }
    for (std::size_t i = 0; i < values.rows(); ++i) p.row_ids.push_back("e" + std::to_string(i));
    return p;
}

// The pairwise comparison matrix of the worked five-criterion example
// (existing time, floor space, tourist reception, documents, cultural value).
Matrix five_criteria_matrix() {
    return Matrix::from_rows({{1, 3, 2, 4, 1},
                              {1.0 / 3, 1, 1.0 / 2, 2, 1.0 / 3},
                              {1.0 / 2, 2, 1, 3, 1.0 / 4},
                              {1.0 / 4, 1.0 / 2, 1.0 / 3, 1, 1.0 / 2},
                              {1, 3, 4, 2, 1}});
}

// Independent eigenvector oracle: repeated squaring of the matrix applied
// to the ones vector (a different route than the implementation's iterated
// multiply-normalize).
std::vector<double> matrix_power_eigenvector(Matrix a, int squarings) {
    const std::size_t m = a.rows();
    for (int s = 0; s < squarings; ++s) {
        Matrix next(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < m; ++k) acc += a(i, k) * a(k, j);
                next(i, j) = acc;
            }
        // rescale to dodge overflow; direction is all that matters
        double hi = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) hi = std::max(hi, next(i, j));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) next(i, j) /= hi;
        a = next;
    }
    std::vector<double> v(m, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) v[i] += a(i, j);
        total += v[i];
    }
    for (auto& x : v) x /= total;
    return v;
}

} // namespace

TEST_CASE("interaction_matrix") {
    SUBCASE("hand case") {
        // row (0.2, 0.5, 0.8), first indicator: |0.5-0.2| + |0.8-0.2| = 0.9
        const auto panel = panel_from_rows(Matrix::from_rows({{0.2, 0.5, 0.8}}));
        const auto interactions = interaction_matrix(panel);
        CHECK(interactions.interactions(0, 0) == doctest::Approx(3.0 / 0.9).epsilon(1e-6));
        // middle indicator: 0.3 + 0.3 = 0.6
        CHECK(interactions.interactions(0, 1) == doctest::Approx(3.0 / 0.6).epsilon(1e-6));
    }
    SUBCASE("constant row is regularized and symmetric") {
        const auto panel = panel_from_rows(Matrix::from_rows({{0.4, 0.4, 0.4}}));
        const auto interactions = interaction_matrix(panel);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::isfinite(interactions.interactions(0, j)));
            CHECK(interactions.interactions(0, j) == interactions.interactions(0, 0));
        }
    }
    SUBCASE("column permutation permutes the interactions identically") {
        Rng rng(6);
        Matrix values(5, 4);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                values(i, j) = static_cast<double>(rng.below(65)) / 64.0; // dyadic: sums are exact
        const auto base = interaction_matrix(panel_from_rows(values));

        const std::vector<std::size_t> perm{2, 0, 3, 1};
        Matrix permuted(5, 4);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 4; ++j) permuted(i, j) = values(i, perm[j]);
        const auto shuffled = interaction_matrix(panel_from_rows(permuted));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(shuffled.interactions(i, j) == base.interactions(i, perm[j]));
    }
    SUBCASE("needs two indicators") {
        const auto panel = panel_from_rows(Matrix::from_rows({{0.5}}));
        CHECK_THROWS_AS(interaction_matrix(panel), Error);
    }
    SUBCASE("best >= worst per column") {
        Rng rng(14);
        Matrix values(6, 3);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 3; ++j) values(i, j) = rng.uniform01();
        const auto interactions = interaction_matrix(panel_from_rows(values));
        for (std::size_t j = 0; j < 3; ++j) CHECK(interactions.best[j] >= interactions.worst[j]);
    }
}

TEST_CASE("indicator_importance") {
    SUBCASE("values stay in [0,1]") {
        Rng rng(31);
        Matrix values(8, 5);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 5; ++j) values(i, j) = rng.uniform01();
        const auto importance =
            indicator_importance(interaction_matrix(panel_from_rows(values)));
        for (double s : importance.importance) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
    SUBCASE("degenerate column gets the neutral 0.5") {
        // identical rows: every interaction column is constant
        const auto panel = panel_from_rows(
            Matrix::from_rows({{0.1, 0.6, 0.9}, {0.1, 0.6, 0.9}, {0.1, 0.6, 0.9}}));
        const auto importance = indicator_importance(interaction_matrix(panel));
        for (double s : importance.importance) CHECK(s == 0.5);
    }
    SUBCASE("identical indicator columns have equal importance") {
        const auto panel = panel_from_rows(
            Matrix::from_rows({{0.2, 0.2, 0.9}, {0.7, 0.7, 0.1}, {0.4, 0.4, 0.5}}));
        const auto importance = indicator_importance(interaction_matrix(panel));
        CHECK(importance.importance[0] == doctest::Approx(importance.importance[1]).epsilon(1e-12));
    }
}

TEST_CASE("orm_weights") {
    SUBCASE("worked ratio case") {
        ImportanceVector importance;
        importance.importance = {0.9, 0.6, 0.3};
        importance.descending = {0, 1, 2};
        const auto weights = orm_weights(importance);
        CHECK(std::abs(weights.weights[0] - 0.5) <= 1e-12);
        CHECK(std::abs(weights.weights[1] - 1.0 / 3.0) <= 1e-12);
        CHECK(std::abs(weights.weights[2] - 1.0 / 6.0) <= 1e-12);
        double sum = 0.0;
        for (double w : weights.weights) sum += w;
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        // recurrence w_{j-1} = r_j w_j at every sorted position
        for (std::size_t p = 1; p < 3; ++p) {
            const double r = importance.importance[p - 1] / importance.importance[p];
            CHECK(std::abs(weights.weights[p - 1] - r * weights.weights[p]) <= 1e-12);
        }
    }
    SUBCASE("unsorted input is handled through the permutation") {
        ImportanceVector importance;
        importance.importance = {0.3, 0.9, 0.6};
        importance.descending = {1, 2, 0};
        const auto weights = orm_weights(importance);
        CHECK(std::abs(weights.weights[1] - 0.5) <= 1e-12);
        CHECK(std::abs(weights.weights[2] - 1.0 / 3.0) <= 1e-12);
        CHECK(std::abs(weights.weights[0] - 1.0 / 6.0) <= 1e-12);
    }
    SUBCASE("equal importances give uniform weights") {
        ImportanceVector importance;
        importance.importance = {0.5, 0.5, 0.5, 0.5};
        importance.descending = {0, 1, 2, 3};
        const auto weights = orm_weights(importance);
        for (double w : weights.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("single indicator") {
        ImportanceVector importance;
        importance.importance = {0.7};
        importance.descending = {0};
        CHECK(orm_weights(importance).weights == std::vector<double>{1.0});
    }
    SUBCASE("zero importance survives through the floor") {
        ImportanceVector importance;
        importance.importance = {0.5, 0.0};
        importance.descending = {0, 1};
        const auto weights = orm_weights(importance);
        for (double w : weights.weights) {
            CHECK(w >= 0.0);
            CHECK(std::isfinite(w));
        }
        CHECK(weights.weights[0] + weights.weights[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("ahp_weights") {
    SUBCASE("five-criterion worked example") {
        const auto result = ahp_weights(five_criteria_matrix());
        // frozen from the independent matrix-power oracle
        CHECK(result.lambda_max == doctest::Approx(5.289329559099).epsilon(1e-9));
        CHECK(result.cr == doctest::Approx(0.064582490870).epsilon(1e-6));
        CHECK(result.consistent);
        CHECK(result.cr >= 0.04);
        CHECK(result.cr <= 0.08);

        double sum = 0.0;
        for (double w : result.weights) sum += w;
        CHECK(std::abs(sum - 1.0) <= 1e-9);

        // criteria 1 and 5 dominate
        CHECK(result.weights[0] == doctest::Approx(0.307637).epsilon(1e-4));
        CHECK(result.weights[4] == doctest::Approx(0.338265).epsilon(1e-4));
        for (std::size_t j : {1, 2, 3})
            CHECK(result.weights[j] < std::min(result.weights[0], result.weights[4]));

        const auto oracle = matrix_power_eigenvector(five_criteria_matrix(), 6);
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(result.weights[j] == doctest::Approx(oracle[j]).epsilon(1e-9));
    }
    SUBCASE("consistent matrices reproduce their generating weights") {
        Rng rng(92);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t m = 3 + rng.below(7); // 3..9
            std::vector<double> v(m);
            for (auto& x : v) x = rng.uniform(0.2, 5.0);
            Matrix consistent(m, m);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) consistent(i, j) = v[i] / v[j];
            const auto result = ahp_weights(consistent);
            CHECK(std::abs(result.lambda_max - static_cast<double>(m)) <= 1e-9);
            CHECK(result.ci <= 1e-9);
            CHECK(result.cr <= 1e-9);
            double total = 0.0;
            for (double x : v) total += x;
            for (std::size_t j = 0; j < m; ++j)
                CHECK(result.weights[j] == doctest::Approx(v[j] / total).epsilon(1e-9));
        }
    }
    SUBCASE("2x2 closed form") {
        const auto result = ahp_weights(Matrix::from_rows({{1.0, 3.0}, {1.0 / 3.0, 1.0}}));
        CHECK(result.weights[0] == doctest::Approx(0.75).epsilon(1e-10));
        CHECK(result.weights[1] == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(result.lambda_max == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(result.cr == 0.0);
        CHECK(result.consistent);
    }
    SUBCASE("validation errors") {
        try {
            ahp_weights(Matrix::from_rows({{1, -2}, {-0.5, 1}}));
            FAIL("expected NotPositive");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::not_positive);
        }
        try {
            ahp_weights(Matrix::from_rows({{1, 2}, {2, 1}}));
            FAIL("expected NotReciprocal");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::not_reciprocal);
        }
        Matrix big(10, 10, 1.0);
        try {
            ahp_weights(big);
            FAIL("expected NoRI");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_ri_entry);
        }
    }
    SUBCASE("inconsistent matrix is flagged, not rejected") {
        // 3-cycle: a >> b >> c >> a
        const auto result = ahp_weights(
            Matrix::from_rows({{1, 9, 1.0 / 9}, {1.0 / 9, 1, 9}, {9, 1.0 / 9, 1}}));
        CHECK(result.cr > 0.1);
        CHECK_FALSE(result.consistent);
    }
}

TEST_CASE("ahp matrix parser never throws anything but Error on garbage") {
    Rng rng(9090);
    static const char alphabet[] = "019,./\n#- e\t";
    for (int rep = 0; rep < 400; ++rep) {
        std::string text;
        const std::size_t length = rng.below(120);
        for (std::size_t i = 0; i < length; ++i)
            text.push_back(alphabet[rng.below(sizeof(alphabet) - 1)]);
        std::istringstream in(text);
        try {
            const auto matrix = load_ahp_matrix(in);
            CHECK(matrix.rows() == matrix.cols());
        } catch (const Error&) {
        }
    }
}

TEST_CASE("load_ahp_matrix parses fractions") {
    std::istringstream in("1,3,1/2\n1/3,1,2\n2,1/2,1\n");
    const auto matrix = load_ahp_matrix(in);
    CHECK(matrix(0, 2) == doctest::Approx(0.5));
    CHECK(matrix(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK_NOTHROW(ahp_weights(matrix));

    std::istringstream ragged("1,2\n1/2\n");
    CHECK_THROWS_AS(load_ahp_matrix(ragged), Error);
    std::istringstream bad("1,x\n2,1\n");
    CHECK_THROWS_AS(load_ahp_matrix(bad), Error);
}

TEST_CASE("combine_weights") {
    WeightVector orm{.weights = {0.6, 0.4}, .kind = WeightVector::Kind::orm};
    WeightVector ahp{.weights = {0.2, 0.8}, .kind = WeightVector::Kind::ahp};
    SUBCASE("midpoint") {
        const auto z = combine_weights(orm, ahp, 0.5);
        CHECK(z.weights[0] == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(z.weights[1] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(z.weights[0] + z.weights[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("endpoints") {
        CHECK(combine_weights(orm, ahp, 1.0).weights == orm.weights);
        CHECK(combine_weights(orm, ahp, 0.0).weights == ahp.weights);
    }
    SUBCASE("errors") {
        WeightVector three{.weights = {0.5, 0.3, 0.2}, .kind = WeightVector::Kind::ahp};
        CHECK_THROWS_AS(combine_weights(orm, three, 0.5), Error);
        try {
            combine_weights(orm, ahp, 1.5);
            FAIL("expected AlphaOutOfRange");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::alpha_out_of_range);
        }
    }
}

TEST_CASE("score") {
    WeightVector z{.weights = {0.4, 0.6}, .kind = WeightVector::Kind::combined};
    SUBCASE("banding and protection") {
        const auto panel = panel_from_rows(Matrix::from_rows({
            {1.0, 0.0},   // 0.4: third, unprotected
            {0.9, 0.95},  // 0.93: first, protected (the flagship-landmark case)
            {0.8, 0.32},  // 0.512: second, protected (the borderline-town case)
            {1.0, 0.5},   // 0.7 exactly: second
            {0.5, 0.5},   // 0.5 exactly: second, protected
        }));
        const auto report = score(panel, z);
        CHECK(report.entries[0].score == doctest::Approx(0.4));
        CHECK(report.entries[0].gradient == Gradient::third);
        CHECK_FALSE(report.entries[0].protect);

        CHECK(report.entries[1].score == doctest::Approx(0.93));
        CHECK(report.entries[1].gradient == Gradient::first);
        CHECK(report.entries[1].protect);

        CHECK(report.entries[2].score == doctest::Approx(0.512));
        CHECK(report.entries[2].gradient == Gradient::second);
        CHECK(report.entries[2].protect);

        CHECK(report.entries[3].score == doctest::Approx(0.7));
        CHECK(report.entries[3].gradient == Gradient::second);

        CHECK(report.entries[4].score == doctest::Approx(0.5));
        CHECK(report.entries[4].gradient == Gradient::second);
        CHECK(report.entries[4].protect);
    }
    SUBCASE("monotone in every indicator when weights are positive") {
        Rng rng(44);
        for (int rep = 0; rep < 30; ++rep) {
            Matrix row(1, 2);
            row(0, 0) = rng.uniform01();
            row(0, 1) = rng.uniform01();
            const auto base = score(panel_from_rows(row), z).entries[0].score;
            Matrix bumped = row;
            const std::size_t j = rng.below(2);
            bumped(0, j) = std::min(1.0, bumped(0, j) + rng.uniform01() * 0.2);
            const auto lifted = score(panel_from_rows(bumped), z).entries[0].score;
            CHECK(lifted >= base);
        }
    }
    SUBCASE("dimension mismatch") {
        const auto panel = panel_from_rows(Matrix::from_rows({{0.1, 0.2, 0.3}}));
        CHECK_THROWS_AS(score(panel, z), Error);
    }
    SUBCASE("ranking is alpha-invariant when both weight sets agree on order") {
        WeightVector w{.weights = {0.5, 0.3, 0.2}, .kind = WeightVector::Kind::orm};
        WeightVector a{.weights = {0.6, 0.25, 0.15}, .kind = WeightVector::Kind::ahp};
        // rows dominate pairwise, so any convex mix preserves the ranking
        const auto panel = panel_from_rows(Matrix::from_rows(
            {{0.9, 0.8, 0.9}, {0.7, 0.6, 0.5}, {0.4, 0.3, 0.3}, {0.1, 0.05, 0.2}}));
        std::vector<std::size_t> reference;
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const auto report = score(panel, combine_weights(w, a, alpha));
            std::vector<std::size_t> order(report.entries.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return report.entries[x].score > report.entries[y].score;
            });
            if (reference.empty())
                reference = order;
            else
                CHECK(order == reference);
        }
    }
}

TEST_CASE("topsis-orm weight chain is permutation-equivariant") {
    Rng rng(27);
    Matrix values(7, 4);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 4; ++j) values(i, j) = rng.uniform01();
    const auto base_weights =
        orm_weights(indicator_importance(interaction_matrix(panel_from_rows(values))));

    const std::vector<std::size_t> perm{3, 1, 0, 2};
    Matrix permuted(7, 4);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 4; ++j) permuted(i, j) = values(i, perm[j]);
    const auto permuted_weights =
        orm_weights(indicator_importance(interaction_matrix(panel_from_rows(permuted))));
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(permuted_weights.weights[j] == doctest::Approx(base_weights.weights[perm[j]]).epsilon(1e-12));
}

TEST_CASE("every weight vector sums to one") {
    Rng rng(60);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 4 + rng.below(10);
        const std::size_t m = 2 + rng.below(6);
        Matrix values(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) values(i, j) = rng.uniform01();
        const auto orm =
            orm_weights(indicator_importance(interaction_matrix(panel_from_rows(values))));

        std::vector<double> v(m);
        for (auto& x : v) x = rng.uniform(0.5, 3.0);
        Matrix consistent(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) consistent(i, j) = v[i] / v[j];
        const auto ahp = ahp_weights(consistent);
        WeightVector ahp_vector{.weights = ahp.weights, .kind = WeightVector::Kind::ahp};
        const auto combined = combine_weights(orm, ahp_vector, rng.uniform01());

        for (const WeightVector* weights :
             std::initializer_list<const WeightVector*>{&orm, &ahp_vector, &combined}) {
            double sum = 0.0;
            for (double w : weights->weights) {
                CHECK(w >= 0.0);
                sum += w;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("robustness") {
    // 16 landmarks with identical indicator columns: the score of each row
    // equals its level for any weights summing to 1, so the expected
    // gradient classes are known by construction.
    const std::size_t n = 16;
    Matrix values(n, 5);
    std::vector<double> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        levels[i] = 0.03 + static_cast<double>(i) * 0.915 / 15.0; // 0.03 .. 0.945
        for (std::size_t j = 0; j < 5; ++j) values(i, j) = levels[i];
    }
    const auto panel = panel_from_rows(values);
    WeightVector ahp{.weights = {0.3, 0.25, 0.2, 0.15, 0.1}, .kind = WeightVector::Kind::ahp};

    SUBCASE("sigma zero is the identity") {
        RobustnessOptions options{.sigma = 0.0, .trials = 5, .seed = 3};
        const auto report = robustness(panel, ahp, options);
        CHECK(report.spearman_mean == 1.0);
        CHECK(report.total_flips == 0);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(report.score_mean[i] == doctest::Approx(report.baseline_scores[i]).epsilon(1e-15));
            CHECK(report.score_stddev[i] <= 1e-12); // mean() rounding, not real spread
        }
    }
    SUBCASE("small noise keeps the ranking stable") {
        RobustnessOptions options{.sigma = 0.05, .trials = 100, .seed = 11};
        const auto report = robustness(panel, ahp, options);
        CHECK(report.spearman_mean >= 0.9);

        options.recompute_topsis = false;
        const auto fixed_weights = robustness(panel, ahp, options);
        CHECK(fixed_weights.spearman_mean >= 0.9);
    }
    SUBCASE("identical across thread counts") {
        RobustnessOptions a{.sigma = 0.2, .trials = 32, .seed = 9, .threads = 1};
        RobustnessOptions b{.sigma = 0.2, .trials = 32, .seed = 9, .threads = 8};
        const auto ra = robustness(panel, ahp, a);
        const auto rb = robustness(panel, ahp, b);
        CHECK(ra.score_mean == rb.score_mean);
        CHECK(ra.score_stddev == rb.score_stddev);
        CHECK(ra.spearman_mean == rb.spearman_mean);
        CHECK(ra.decision_flips == rb.decision_flips);
    }
    SUBCASE("negative sigma") {
        RobustnessOptions options{.sigma = -0.1, .trials = 1, .seed = 0};
        try {
            robustness(panel, ahp, options);
            FAIL("expected NegativeSigma");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::negative_sigma);
        }
    }
    SUBCASE("large noise flips borderline decisions") {
        RobustnessOptions options{.sigma = 0.5, .trials = 50, .seed = 21};
        const auto report = robustness(panel, ahp, options);
        CHECK(report.total_flips > 0); // entities sit near 0.5 by construction
        CHECK(report.trials == 50);
    }
    SUBCASE("clamping keeps perturbed scores inside [0,1]") {
        RobustnessOptions options{.sigma = 2.0, .trials = 40, .seed = 5, .clamp = true};
        const auto report = robustness(panel, ahp, options);
        for (std::size_t i = 0; i < n; ++i) {
            // each trial score is a convex combination of clamped cells
            CHECK(report.score_mean[i] >= 0.0);
            CHECK(report.score_mean[i] <= 1.0);
        }
        // without the clamp, sigma this large sends means outside the band
        options.clamp = false;
        const auto wild = robustness(panel, ahp, options);
        bool escaped = false;
        for (std::size_t i = 0; i < n; ++i)
            escaped = escaped || wild.score_mean[i] < 0.0 || wild.score_mean[i] > 1.0;
        CHECK(escaped);
    }
}

TEST_CASE("mcdm CSV writers") {
    WeightVector orm{.weights = {0.5, 0.5}, .kind = WeightVector::Kind::orm};
    AhpResult ahp;
    ahp.weights = {0.25, 0.75};
    WeightVector combined{.weights = {0.375, 0.625}, .kind = WeightVector::Kind::combined};
    std::ostringstream weights;
    write_weights_csv(weights, {"a", "b"}, orm, ahp, combined);
    CHECK(weights.str() ==
          "indicator,orm,ahp,combined\na,0.5,0.25,0.375\nb,0.5,0.75,0.625\n");

    ScoreReport report;
    report.entries = {{"palace", 0.9375, Gradient::first, true},
                      {"plaza", 0.25, Gradient::third, false}};
    std::ostringstream scores;
    write_scores_csv(scores, report);
    CHECK(scores.str() ==
          "id,score,gradient,protect\npalace,0.9375,first,true\nplaza,0.25,third,false\n");
}
