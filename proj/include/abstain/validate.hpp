#ifndef ABSTAIN_VALIDATE_HPP
#define ABSTAIN_VALIDATE_HPP

// Instance validation that reports instead of throwing.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/oracle.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace abstain {

struct ValidationReport
{
    bool ok = true;
    std::string diagnostic;

    explicit operator bool() const noexcept { return ok; }
};

/// Checks entry ranges and dimensions of raw member rows against b. With
/// `check_feasibility`, b_i > 1 is reported for any n, and for n <= 3 the
/// constraint polytope is tested for emptiness by the oracle.
inline ValidationReport validate_instance(const std::vector<std::vector<double>>& rows,
                                          const std::vector<double>& b,
                                          bool check_feasibility = true)
{
    auto fail = [](std::string msg) { return ValidationReport{false, std::move(msg)}; };
    if (rows.empty() || rows.front().empty())
        return fail("ensemble matrix needs at least one member and one example");
    const std::size_t n = rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n)
            return fail("dimension mismatch: member " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " predictions, expected " +
                        std::to_string(n));
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rows[i][j];
            if (!std::isfinite(v) || v < -1.0 || v > 1.0)
                return fail("entry out of range: member " + std::to_string(i) + ", example " +
                            std::to_string(j) + " has value " + std::to_string(v));
        }
    }
    if (b.size() != rows.size())
        return fail("dimension mismatch: " + std::to_string(b.size()) + " bounds for " +
                    std::to_string(rows.size()) + " members");
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!std::isfinite(b[i]))
            return fail("bound of member " + std::to_string(i) + " is not finite");
    if (!check_feasibility)
        return {};
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] > 1.0)
            return fail("infeasible: bound " + std::to_string(b[i]) + " of member " +
                        std::to_string(i) + " exceeds 1");
    if (n <= oracle::kMaxExamples) {
        try {
            TinyInstance inst{EnsembleMatrix::from_rows(rows), CorrelationVector(b)};
            (void)z_vertices(inst);
        } catch (const InfeasibleError&) {
            return fail("infeasible: no labeling z in [-1,1]^n satisfies (1/n) F z >= b");
        }
    }
    return {};
}

inline ValidationReport validate_instance(const EnsembleMatrix& F, const CorrelationVector& b,
                                          bool check_feasibility = true)
{
    // reweighted matrices leave [-1, 1] by design; only shapes are checked
    if (F.reweighted()) {
        if (b.size() != F.members())
            return {false, "dimension mismatch: " + std::to_string(b.size()) + " bounds for " +
                               std::to_string(F.members()) + " members"};
        return {};
    }
    std::vector<std::vector<double>> rows(F.members());
    for (std::size_t i = 0; i < F.members(); ++i)
        rows[i] = F.member_row(i);
    return validate_instance(rows, std::vector<double>(b.values().begin(), b.values().end()),
                             check_feasibility);
}

} // namespace abstain

#endif // ABSTAIN_VALIDATE_HPP
