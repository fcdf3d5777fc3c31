#include <abstain/oracle.hpp>
#include <abstain/random.hpp>
#include <abstain/solver.hpp>
#include <abstain/synthetic.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <vector>

using namespace abstain;
using Catch::Approx;

namespace {

ObjectiveSpec tiny(Regime r = PredictRegime{}, std::optional<double> eps = std::nullopt)
{
    return ObjectiveSpec(EnsembleMatrix::from_rows({{1.0}}), CorrelationVector{0.6}, std::move(r),
                         eps);
}

} // namespace

TEST_CASE("minimize_orthant on the single-example instance")
{
    SECTION("prediction game")
    {
        const auto r = minimize_orthant(tiny());
        CHECK(r.objective_value == Approx(0.4).margin(1e-3));
        CHECK(r.certified_value == Approx(0.2).margin(1e-3));
        CHECK(r.sigma_star[0] == Approx(1.0).margin(1e-2));
    }
    SECTION("cost 0.1 abstains everywhere")
    {
        const auto r = minimize_orthant(tiny(CostRegime{0.1}));
        CHECK(r.objective_value == Approx(0.2).margin(1e-3));
        CHECK(r.certified_value == Approx(0.1).margin(1e-3));
        CHECK(r.sigma_star[0] == Approx(0.0).margin(1e-2));
        CHECK(abstain_rate(tiny().F, r.sigma_star.values()) ==
              Approx(1.0).margin(1e-2));
    }
    SECTION("cost 0.4 never abstains")
    {
        const auto r = minimize_orthant(tiny(CostRegime{0.4}));
        CHECK(r.objective_value == Approx(0.4).margin(1e-3));
        CHECK(r.certified_value == Approx(0.2).margin(1e-3));
        CHECK(abstain_rate(tiny().F, r.sigma_star.values()) == Approx(0.0).margin(1e-2));
    }
}

TEST_CASE("certify examples")
{
    CHECK(certify(tiny(), std::vector<double>{0.0}) == 0.5);
    const auto r = minimize_orthant(tiny(CostRegime{0.3}));
    CHECK(certify(tiny(CostRegime{0.3}), r.sigma_star) == r.certified_value);
    CHECK_THROWS_AS(certify(tiny(), std::vector<double>{-1.0}), DomainError);
    // the general-loss game value is half the slack plus c
    const auto log = losses::log_loss();
    CHECK(certify(tiny(GeneralCostRegime{log, 0.2}), std::vector<double>{0.0}) ==
          Approx(0.2).margin(1e-15));
}

TEST_CASE("minimize_l1 examples")
{
    Rng rng(12);
    const auto inst = synthetic_instance(rng, 40, 4);
    SECTION("a large radius keeps sigma at zero")
    {
        const ObjectiveSpec spec(inst.F, inst.b, CostRegime{0.3}, 2.0);
        const auto r = minimize_l1(spec);
        for (double v : r.sigma_star.values())
            CHECK(v == 0.0);
        CHECK(r.objective_value == slack(spec, std::vector<double>(4, 0.0)));
        CHECK(r.converged);
    }
    SECTION("radius zero matches the orthant solve when the orthant is inactive")
    {
        for (double c : {0.2, 0.3, 0.45}) {
            const auto a = minimize_orthant(tiny(CostRegime{c}));
            const auto b = minimize_l1(tiny(CostRegime{c}, 0.0));
            CHECK(b.sigma_star[0] >= 0.0);
            CHECK(b.objective_value == Approx(a.objective_value).margin(2e-3));
        }
        // in general the free problem can only do better
        const auto a = minimize_orthant(ObjectiveSpec(inst.F, inst.b, CostRegime{0.3}));
        const auto b = minimize_l1(ObjectiveSpec(inst.F, inst.b, CostRegime{0.3}, 0.0));
        CHECK(b.objective_value <= a.objective_value + 2e-3);
    }
    SECTION("regime mismatches are rejected")
    {
        CHECK_THROWS_AS(minimize_l1(ObjectiveSpec(inst.F, inst.b)), DomainError);
        CHECK_THROWS_AS(minimize_orthant(ObjectiveSpec(inst.F, inst.b, PredictRegime{}, 0.1)),
                        DomainError);
    }
}

TEST_CASE("c = 1/2 solve reproduces the prediction solve bit for bit")
{
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
        const auto inst = synthetic_instance(rng, 50, 5);
        const auto a = minimize_orthant(ObjectiveSpec(inst.F, inst.b, PredictRegime{}));
        const auto b = minimize_orthant(ObjectiveSpec(inst.F, inst.b, CostRegime{0.5}));
        CHECK(a.objective_value == b.objective_value);
        CHECK(a.sigma_star == b.sigma_star);
    }
}

TEST_CASE("certified value is sound against the oracle for the returned sigma")
{
    Rng rng(41);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + rng.index(2), p = 1 + rng.index(2);
        const auto inst = random_tiny_instance(rng, n, p);
        const auto r = minimize_orthant(ObjectiveSpec(inst.F, inst.b, CostRegime{0.25}));
        const auto oracle = game_value(inst, OracleCost{0.25});
        CHECK(r.certified_value >= oracle.value - 0.05 - 1e-9);
        CHECK(r.certified_value <= oracle.value + 0.05 + 5e-3);
    }
}

TEST_CASE("L1 solve matches the L-infinity oracle")
{
    Rng rng(77);
    for (double eps : {0.05, 0.2}) {
        for (int t = 0; t < 15; ++t) {
            const std::size_t n = 1 + rng.index(2), p = 1 + rng.index(2);
            const auto inst = random_tiny_instance(rng, n, p, ConstraintKind::linf_ball, eps);
            const auto r = minimize_l1(ObjectiveSpec(inst.F, inst.b, CostRegime{0.3}, eps));
            const auto oracle = game_value(inst, OracleCost{0.3});
            CHECK(r.certified_value == Approx(oracle.value).margin(0.05 + 5e-3));
        }
    }
}

TEST_CASE("solver is deterministic and thread-count independent")
{
    Rng rng(9);
    const auto inst = synthetic_instance(rng, 5000, 5);
    const ObjectiveSpec spec(inst.F, inst.b, CostRegime{0.2});
    SolveConfig cfg;
    cfg.max_iters = 300;
    set_threads(1);
    const auto a = minimize_orthant(spec, cfg);
    set_threads(3);
    const auto b = minimize_orthant(spec, cfg);
    set_threads(1);
    CHECK(a.sigma_star == b.sigma_star);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("more iterations never worsen the best value")
{
    Rng rng(19);
    const auto inst = synthetic_instance(rng, 60, 5);
    const ObjectiveSpec spec(inst.F, inst.b, CostRegime{0.15});
    double prev = 1e9;
    for (std::size_t it : {1u, 10u, 100u, 1000u}) {
        SolveConfig cfg;
        cfg.max_iters = it;
        cfg.window = 100000;
        const auto r = minimize_orthant(spec, cfg);
        CHECK(r.objective_value <= prev);
        CHECK(r.iterations <= it);
        prev = r.objective_value;
    }
}

TEST_CASE("warm start from a poor point still finds the optimum")
{
    Rng rng(23);
    const auto inst = synthetic_instance(rng, 60, 4);
    const ObjectiveSpec spec(inst.F, inst.b, CostRegime{0.05});
    const auto cold = minimize_orthant(spec);
    const std::vector<double> far(4, 50.0);
    const auto warm = minimize_orthant(spec, {}, std::span<const double>(far));
    CHECK(warm.objective_value == Approx(cold.objective_value).margin(5e-3));
    const std::vector<double> bad(3, 0.0);
    CHECK_THROWS_AS(minimize_orthant(spec, {}, std::span<const double>(bad)), DimensionError);
}

TEST_CASE("solver configuration is validated")
{
    SolveConfig cfg;
    cfg.step0 = 0.0;
    CHECK_THROWS_AS(minimize_orthant(tiny(), cfg), DomainError);
    cfg = {};
    cfg.window = 0;
    CHECK_THROWS_AS(minimize_orthant(tiny(), cfg), DomainError);
}
