#ifndef ABSTAIN_RANDOM_HPP
#define ABSTAIN_RANDOM_HPP

// Seeded random numbers with a portable real conversion. The std
// distributions are implementation-defined, so reproducible files and
// reports draw through this wrapper instead.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace abstain {

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1 (rejection sampling, no modulo bias).
    std::uint64_t index(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit)
            v = engine_();
        return v % n;
    }

    /// +1 with probability q, -1 otherwise.
    double sign(double q = 0.5) { return uniform() < q ? 1.0 : -1.0; }

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace abstain

#endif // ABSTAIN_RANDOM_HPP
