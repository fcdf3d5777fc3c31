#include <abstain/frontier.hpp>
#include <abstain/predictor.hpp>
#include <abstain/random.hpp>
#include <abstain/synthetic.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace abstain;
using Catch::Approx;

TEST_CASE("decide_noabstain examples")
{
    CHECK(decide_noabstain(0.5).prediction == 0.5);
    CHECK(decide_noabstain(-3.0).prediction == -1.0);
    CHECK(decide_noabstain(0.0).prediction == 0.0);
    CHECK(decide_noabstain(0.0).predict_prob == 1.0);
    CHECK(decide_noabstain(-3.0).score == -3.0);
}

TEST_CASE("decide_abstain01 examples")
{
    const auto a = decide_abstain01(0.5);
    CHECK(a.predict_prob == 0.5);
    CHECK(a.prediction == 1.0);
    const auto b = decide_abstain01(-2.0);
    CHECK(b.predict_prob == 1.0);
    CHECK(b.prediction == -1.0);
    const auto c = decide_abstain01(0.0);
    CHECK(c.predict_prob == 0.0);
    CHECK(c.prediction == 1.0);
}

TEST_CASE("decide_general approaches the 0-1 rule as the surrogate sharpens")
{
    for (double score : {0.3, -0.6, 1.7}) {
        const double want = std::min(1.0, std::abs(score));
        double prev_err = 1e9;
        for (double tau : {0.05, 0.01, 0.002}) {
            const auto d = decide_general(score, losses::soft_zero_one(tau), 0.25);
            const double err = std::abs(d.predict_prob - want);
            CHECK(err <= prev_err + 1e-12);
            prev_err = err;
            if (std::abs(score) > 1e-9)
                CHECK(d.prediction * score > 0.0);
        }
        CHECK(prev_err <= 0.02);
    }
}

TEST_CASE("decide_general with the log loss")
{
    const auto log = losses::log_loss();
    SECTION("score 0 abstains")
    {
        REQUIRE(2 * 0.2 < phi(log, 0.0));
        const auto d = decide_general(0.0, log, 0.2);
        CHECK(d.predict_prob == 0.0);
    }
    SECTION("large scores predict with the inverse link")
    {
        for (double m : {3.0, -4.0, 6.0}) {
            const double c = 0.5 * K(log, m, 1.0) + 0.01;
            const auto d = decide_general(m, log, c);
            CHECK(d.predict_prob == 1.0);
            CHECK(d.prediction == Approx(std::tanh(m / 2)).margin(1e-8));
        }
    }
    SECTION("interior participation solves K(m, p) = 2c")
    {
        const double m = 1.0, c = 0.1;
        const auto d = decide_general(m, log, c);
        REQUIRE(d.predict_prob > 0.0);
        REQUIRE(d.predict_prob < 1.0);
        CHECK(K(log, m, d.predict_prob) == Approx(2 * c).margin(1e-8));
        CHECK(d.prediction == Approx(std::tanh(m / d.predict_prob / 2)).margin(1e-8));
    }
    CHECK_THROWS_AS(decide_general(0.3, log, 0.0), DomainError);
}

TEST_CASE("decide dispatches on the regime")
{
    CHECK(decide(0.4, PredictRegime{}).predict_prob == 1.0);
    CHECK(decide(0.4, PredictRegime{}).prediction == 0.4);
    CHECK(decide(0.4, CostRegime{0.1}).predict_prob == 0.4);
    const auto log = losses::log_loss();
    const auto d = decide(2.0, PredictRegime{log});
    CHECK(d.predict_prob == 1.0);
    CHECK(d.prediction == Approx(std::tanh(1.0)).margin(1e-8));
}

TEST_CASE("decide_batch examples")
{
    const auto F = EnsembleMatrix::from_rows({{1.0, -1.0, 1.0}, {1.0, -1.0, -1.0}});
    SECTION("all margins at least one never abstain")
    {
        const auto b = decide_batch(F, std::vector<double>{1.0, 0.0}, CostRegime{0.2});
        CHECK(b.realized_abstain_rate == 0.0);
        CHECK(b.regime == "cost");
        REQUIRE(b.decisions.size() == 3);
        CHECK(b.decisions[1].prediction == -1.0);
    }
    SECTION("zero weights abstain everywhere")
    {
        const auto b = decide_batch(F, WeightVector::zeros(2), CostRegime{0.2});
        CHECK(b.realized_abstain_rate == 1.0);
    }
    CHECK_THROWS_AS(decide_batch(F, std::vector<double>{1.0}, CostRegime{0.2}), DimensionError);
}

TEST_CASE("realized abstain rate at the multiplier's minimizer is the derivative of w")
{
    Rng rng(6);
    const auto inst = synthetic_instance(rng, 60, 4);
    for (double lam : {0.3, 0.6, 0.9}) {
        const auto wv = w(inst.F, inst.b, lam);
        const auto batch = decide_batch(inst.F, wv.sigma, CostRegime{0.5 * lam});
        CHECK(batch.realized_abstain_rate == Approx(wv.abstain_rate).margin(1e-12));
    }
}
