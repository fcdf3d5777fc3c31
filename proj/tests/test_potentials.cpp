#include <abstain/potentials.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace abstain;
using Catch::Approx;

TEST_CASE("psi_pred examples")
{
    CHECK(psi_pred(0.0) == 1.0);
    CHECK(psi_pred(2.0) == 2.0);
    CHECK(psi_pred(-0.5) == 1.0);
}

TEST_CASE("psi_abstain examples")
{
    CHECK(psi_abstain(0.0, 0.2) == Approx(0.4).margin(1e-15));
    CHECK(psi_abstain(2.0, 0.2) == 2.0);
    CHECK(psi_abstain(0.3, 0.5) == 1.0);
    CHECK(psi_abstain(0.3, 0.5) == psi_pred(0.3));
    CHECK(psi_abstain(-1.0, 0.3) == 1.0);
}

TEST_CASE("psi_abstain rejects costs outside (0, 1/2]")
{
    CHECK_THROWS_AS(psi_abstain(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(psi_abstain(0.0, 0.6), DomainError);
    CHECK_THROWS_AS(psi_abstain(0.0, -0.1), DomainError);
    CHECK_THROWS_AS(psi_abstain_subgrad(0.0, 0.7), DomainError);
}

TEST_CASE("psi_abstain_subgrad selection")
{
    CHECK(psi_abstain_subgrad(0.5, 0.2) == Approx(0.6));
    CHECK(psi_abstain_subgrad(0.0, 0.2) == 0.0);
    CHECK(psi_abstain_subgrad(1.0, 0.2) == Approx(0.8));
    CHECK(psi_abstain_subgrad(-1.0, 0.2) == Approx(-0.8));
    CHECK(psi_abstain_subgrad(-3.0, 0.2) == -1.0);
}

TEST_CASE("c = 1/2 abstaining well coincides with the prediction well bit for bit")
{
    for (double m = -3.0; m <= 3.0; m += 0.0625) {
        CHECK(psi_abstain(m, 0.5) == psi_pred(m));
        CHECK(psi_abstain_subgrad(m, 0.5) == psi_pred_subgrad(m));
    }
}

TEST_CASE("dpsi_dlambda examples")
{
    CHECK(dpsi_dlambda(0.0) == 1.0);
    CHECK(dpsi_dlambda(1.0) == 0.0);
    CHECK(dpsi_dlambda(0.25) == 0.75);
    CHECK(dpsi_dlambda(-4.0) == 0.0);
}

TEST_CASE("psi_abstain is convex, even, monotone in c and 1-Lipschitz")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> M(-3.0, 3.0), C(1e-3, 0.5), T(0.0, 1.0);
    for (int k = 0; k < 5000; ++k) {
        const double a = M(rng), b = M(rng), t = T(rng);
        double c1 = C(rng), c2 = C(rng);
        if (c1 > c2)
            std::swap(c1, c2);
        CHECK(psi_abstain(t * a + (1 - t) * b, c1) <=
              t * psi_abstain(a, c1) + (1 - t) * psi_abstain(b, c1) + 1e-12);
        CHECK(psi_abstain(a, c1) == psi_abstain(-a, c1));
        CHECK(psi_abstain(a, c1) <= psi_abstain(a, c2));
        CHECK(std::abs(psi_abstain(a, c1) - psi_abstain(b, c1)) <= std::abs(a - b) + 1e-12);
    }
}

TEST_CASE("psi_abstain_subgrad is a valid subgradient on a grid")
{
    for (double c : {0.05, 0.2, 0.35, 0.5}) {
        for (int i = 0; i <= 1000; ++i) {
            const double m = -3.0 + 6.0 * i / 1000.0;
            const double s = psi_abstain_subgrad(m, c);
            for (int k = 0; k <= 40; ++k) {
                const double m2 = -3.0 + 6.0 * k / 40.0;
                CHECK(psi_abstain(m2, c) >= psi_abstain(m, c) + s * (m2 - m) - 1e-12);
            }
        }
    }
}

TEST_CASE("psi_abstain_subgrad matches central differences away from kinks")
{
    const double h = 1e-6;
    for (double c : {0.1, 0.3, 0.5}) {
        for (int i = 0; i <= 600; ++i) {
            const double m = -3.0 + 6.0 * i / 600.0;
            const double a = std::abs(m);
            if (a < 1e-3 || std::abs(a - 1.0) < 1e-3)
                continue;
            const double fd = (psi_abstain(m + h, c) - psi_abstain(m - h, c)) / (2 * h);
            CHECK(std::abs(fd - psi_abstain_subgrad(m, c)) <= 1e-6);
        }
    }
}
