#ifndef ABSTAIN_NUMERIC_HPP
#define ABSTAIN_NUMERIC_HPP

// Summation and scalar-inversion helpers shared by every module.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <vector>

namespace abstain {

/// Neumaier-compensated running sum.
class CompensatedSum
{
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept
    {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept
{
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i)
        s.add(a[i] * b[i]);
    return s.value();
}

namespace detail {
inline std::atomic<unsigned>& thread_setting()
{
    static std::atomic<unsigned> threads{1};
    return threads;
}
} // namespace detail

/// Worker threads used by reductions over examples (default 1).
inline void set_threads(unsigned n) { detail::thread_setting().store(std::max(1u, n)); }
inline unsigned threads() { return detail::thread_setting().load(); }

/// Chunk length of the example reduction. Chunk boundaries never depend on
/// the thread count, so the result is bit-identical for any schedule.
inline constexpr std::size_t kReduceChunk = 2048;

/// Runs chunk_fn(begin, end) over fixed-size chunks of [0, n) and returns the
/// per-chunk results in chunk order, using up to threads() workers.
template <typename ChunkFn>
auto map_chunks(std::size_t n, const ChunkFn& chunk_fn)
{
    using R = decltype(chunk_fn(std::size_t{0}, std::size_t{0}));
    const std::size_t chunks = std::max<std::size_t>(1, (n + kReduceChunk - 1) / kReduceChunk);
    std::vector<R> partial(chunks);
    auto run = [&](std::size_t c) {
        partial[c] = chunk_fn(c * kReduceChunk, std::min(n, (c + 1) * kReduceChunk));
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads(), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            run(c);
    } else {
        std::vector<std::future<void>> jobs;
        jobs.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t c = w; c < chunks; c += workers)
                    run(c);
            }));
        }
        for (auto& j : jobs)
            j.get();
    }
    return partial;
}

/// Sum of term(j) for j in [0, n): each chunk is summed with compensation,
/// then chunk totals are combined in index order.
template <typename Term>
double reduce_sum(std::size_t n, const Term& term)
{
    const auto partial = map_chunks(n, [&](std::size_t begin, std::size_t end) {
        CompensatedSum s;
        for (std::size_t j = begin; j < end; ++j)
            s.add(term(j));
        return s.value();
    });
    CompensatedSum total;
    for (double v : partial)
        total.add(v);
    return total.value();
}

/// Bisection on an increasing function over [lo, hi] for f(x) = target.
/// Stops at |f(x) - target| <= tol or when the bracket has no representable
/// midpoint; returns the last midpoint.
template <typename F>
double bisect_increasing(const F& f, double target, double lo, double hi, double tol)
{
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 2200; ++it) {
        mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            break;
        const double r = f(mid) - target;
        if (std::abs(r) <= tol)
            break;
        if (r < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

inline double sign_of(double x) noexcept { return x < 0.0 ? -1.0 : 1.0; }

} // namespace abstain

#endif // ABSTAIN_NUMERIC_HPP
