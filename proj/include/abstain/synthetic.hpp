#ifndef ABSTAIN_SYNTHETIC_HPP
#define ABSTAIN_SYNTHETIC_HPP

// Seeded synthetic ensembles for tests, demos and the verify command.

#include <abstain/core_data.hpp>
#include <abstain/random.hpp>

#include <vector>

namespace abstain {

struct SyntheticInstance
{
    EnsembleMatrix F;
    CorrelationVector b; ///< exact correlations (1/n) F z minus `slack`
    std::vector<double> z;
};

/// n labels z in {-1, +1}; member i copies z with an error rate drawn from
/// [err_lo, err_hi] and, with probability `soft`, votes a real value of the
/// same sign instead of +-1.
inline SyntheticInstance synthetic_instance(Rng& rng, std::size_t n, std::size_t p,
                                            double err_lo = 0.15, double err_hi = 0.4,
                                            double soft = 0.3, double slack = 0.0)
{
    std::vector<double> z(n);
    for (double& v : z)
        v = rng.sign();
    std::vector<std::vector<double>> rows(p, std::vector<double>(n));
    for (std::size_t i = 0; i < p; ++i) {
        const double err = rng.uniform(err_lo, err_hi);
        for (std::size_t j = 0; j < n; ++j) {
            const double s = rng.uniform() < err ? -z[j] : z[j];
            rows[i][j] = rng.uniform() < soft ? s * rng.uniform(0.2, 1.0) : s;
        }
    }
    std::vector<double> b(p);
    for (std::size_t i = 0; i < p; ++i) {
        CompensatedSum s;
        for (std::size_t j = 0; j < n; ++j)
            s.add(rows[i][j] * z[j]);
        b[i] = s.value() / static_cast<double>(n) - slack;
    }
    return {EnsembleMatrix::from_rows(rows), CorrelationVector(b), std::move(z)};
}

} // namespace abstain

#endif // ABSTAIN_SYNTHETIC_HPP
