#include <abstain/estimation.hpp>
#include <abstain/random.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace abstain;
using Catch::Approx;

namespace {

/// `good` members wrong with probability `err`, then `noise` coin-flip members.
LabeledSet planted(Rng& rng, std::size_t m, std::size_t good, std::size_t noise, double err)
{
    std::vector<double> y(m);
    for (double& v : y)
        v = rng.sign();
    std::vector<std::vector<double>> rows(good + noise, std::vector<double>(m));
    for (std::size_t i = 0; i < good + noise; ++i)
        for (std::size_t j = 0; j < m; ++j)
            rows[i][j] = i < good ? (rng.uniform() < err ? -y[j] : y[j]) : rng.sign();
    return LabeledSet(EnsembleMatrix::from_rows(rows), y);
}

} // namespace

TEST_CASE("plugin_b examples")
{
    const std::vector<double> y{1.0, -1.0, -1.0, -1.0};
    const LabeledSet d(EnsembleMatrix::from_rows({y, {-1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, -1.0, -1.0}}), y);
    const auto b = plugin_b(d);
    CHECK(b[0] == 1.0);
    CHECK(b[1] == -1.0);
    CHECK(b[2] == 0.5);
}

TEST_CASE("labeled set validation")
{
    CHECK_THROWS_AS(LabeledSet(EnsembleMatrix::from_rows({{1.0, 1.0}}), {1.0, 0.0}), DataError);
    CHECK_THROWS_AS(LabeledSet(EnsembleMatrix::from_rows({{1.0, 1.0}}), {1.0}), DimensionError);
    const LabeledSet d(EnsembleMatrix::from_rows({{1.0, -0.5, 0.25}}), {1.0, -1.0, 1.0});
    const auto s = d.subset({2, 0});
    CHECK(s.size() == 2);
    CHECK(s.F(0, 0) == 0.25);
    CHECK(s.y == std::vector<double>{1.0, 1.0});
}

TEST_CASE("Hoeffding half-width")
{
    CHECK(hoeffding_halfwidth(4, 800, 0.05) == Approx(std::sqrt(2.0 * std::log(80.0) / 800.0)));
    CHECK(hoeffding_halfwidth(4, 800, 0.05) == Approx(0.1047).margin(1e-4));
    CHECK(hoeffding_halfwidth(4, 100000000, 0.05) < 1e-3);
    CHECK_THROWS_AS(hoeffding_halfwidth(4, 800, 1.0), DomainError);
    CHECK_THROWS_AS(hoeffding_halfwidth(4, 800, 0.0), DomainError);
}

TEST_CASE("corrected_b shifts every member by the same gap")
{
    Rng rng(3);
    const auto d = planted(rng, 200, 2, 3, 0.2);
    const auto b = plugin_b(d);
    const auto c = corrected_b(d, 0.1);
    const double h = hoeffding_halfwidth(5, 200, 0.1);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(c[i] <= b[i]);
        CHECK(b[i] - c[i] == Approx(h).margin(1e-15));
    }
    CHECK_THROWS_AS(corrected_b(d, 1.5), DomainError);
    // the coin-flip members end up below zero and are listed, not dropped
    const auto bad = nonpositive_members(c);
    CHECK(c.size() == 5);
    CHECK(bad.size() >= 3);
}

TEST_CASE("corrected bounds cover the true correlations")
{
    // member i agrees with the label with probability q_i: true correlation 2 q_i - 1
    const std::vector<double> q{0.9, 0.75, 0.6, 0.5};
    const std::size_t m = 800, trials = 1000;
    const double delta = 0.05;
    Rng rng(2026);
    std::size_t covered = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> y(m);
        std::vector<std::vector<double>> rows(q.size(), std::vector<double>(m));
        for (std::size_t j = 0; j < m; ++j) {
            y[j] = rng.sign();
            for (std::size_t i = 0; i < q.size(); ++i)
                rows[i][j] = rng.uniform() < q[i] ? y[j] : -y[j];
        }
        const auto c = corrected_b(LabeledSet(EnsembleMatrix::from_rows(rows), y), delta);
        bool all = true;
        for (std::size_t i = 0; i < q.size(); ++i)
            all = all && c[i] <= 2 * q[i] - 1;
        covered += all ? 1 : 0;
    }
    const double need = 1 - delta - 3 * std::sqrt(delta * (1 - delta) / trials);
    CHECK(static_cast<double>(covered) / trials >= need);
}

TEST_CASE("realized loss accounting")
{
    const std::vector<double> y{1.0, -1.0, 1.0};
    const std::vector<Decision> d{{0.5, 1.0, 1.0}, {0.0, 0.0, 1.0}, {-0.5, 0.5, -1.0}};
    // 0, c, 0.5 * 1 + 0.5 * c
    CHECK(realized_loss(d, y, CostRegime{0.2}) == Approx((0.0 + 0.2 + 0.6) / 3));
    CHECK(realized_loss(d, y, PredictRegime{}) == Approx(0.5 / 3));
    CHECK_THROWS_AS(realized_loss(d, {1.0}, PredictRegime{}), DimensionError);
}

TEST_CASE("select_epsilon with a single candidate returns it")
{
    Rng rng(1);
    const auto d = planted(rng, 60, 2, 2, 0.2);
    CHECK(select_epsilon(d, {0.07}, 3, 5).epsilon == 0.07);
}

TEST_CASE("select_epsilon against a huge radius")
{
    Rng rng(2);
    const auto d = planted(rng, 100, 3, 0, 0.1);
    const double c = 0.25;
    const auto sel = select_epsilon(d, {5.0, 0.0}, 4, 7, CostRegime{c});
    REQUIRE(sel.grid == std::vector<double>{0.0, 5.0});
    CHECK(sel.mean_loss[1] == Approx(c).margin(1e-15));
    REQUIRE(sel.mean_loss[0] < c);
    CHECK(sel.epsilon == 0.0);
}

TEST_CASE("select_epsilon is deterministic given the seed")
{
    Rng r1(4), r2(4);
    const auto a = select_epsilon(planted(r1, 80, 2, 4, 0.3), {0.0, 0.05, 0.2}, 4, 11);
    const auto b = select_epsilon(planted(r2, 80, 2, 4, 0.3), {0.0, 0.05, 0.2}, 4, 11);
    CHECK(a.epsilon == b.epsilon);
    CHECK(a.mean_loss == b.mean_loss);
}

TEST_CASE("select_epsilon argument errors")
{
    Rng rng(5);
    const auto d = planted(rng, 10, 1, 1, 0.2);
    CHECK_THROWS_AS(select_epsilon(d, {}, 3, 1), DomainError);
    CHECK_THROWS_AS(select_epsilon(d, {0.1}, 1, 1), DomainError);
    CHECK_THROWS_AS(select_epsilon(d, {0.1}, 11, 1), DomainError);
    CHECK_THROWS_AS(select_epsilon(d, {-0.1}, 3, 1), DomainError);
}

TEST_CASE("select_epsilon prefers a positive radius under planted noise")
{
    std::size_t positive = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(1000 + s);
        const auto d = planted(rng, 100, 3, 10, 0.3);
        positive += select_epsilon(d, {0.0, 0.02, 0.05, 0.1, 0.2}, 5, s).epsilon > 0.0 ? 1 : 0;
    }
    CHECK(positive >= 8);
}
