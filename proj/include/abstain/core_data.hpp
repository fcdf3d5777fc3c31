#ifndef ABSTAIN_CORE_DATA_HPP
#define ABSTAIN_CORE_DATA_HPP

// Data model of the aggregation game: the ensemble's predictions on the
// unlabeled set, the correlation bounds, weight vectors and decisions.

#include <abstain/error.hpp>
#include <abstain/numeric.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace abstain {

/// Dense p x n prediction matrix F. Row i holds member h_i's votes, column j
/// is the example vector x_j. Stored column-major so each x_j is contiguous.
///
/// Entries lie in [-1, 1] unless the matrix is the output of the specialist
/// reweighting, which produces real-valued features (`reweighted()`).
class EnsembleMatrix
{
public:
    EnsembleMatrix() = default;

    EnsembleMatrix(std::size_t members, std::size_t examples, std::vector<double> column_major,
                   bool reweighted = false)
        : members_(members), examples_(examples), data_(std::move(column_major)),
          reweighted_(reweighted)
    {
        if (members_ == 0 || examples_ == 0)
            throw DataError("ensemble matrix needs at least one member and one example");
        if (data_.size() != members_ * examples_)
            throw DimensionError("ensemble matrix storage has " + std::to_string(data_.size()) +
                                 " entries, expected " + std::to_string(members_ * examples_));
        for (std::size_t k = 0; k < data_.size(); ++k) {
            const double v = data_[k];
            if (!std::isfinite(v))
                throw DataError("non-finite ensemble prediction");
            if (!reweighted_ && (v < -1.0 || v > 1.0))
                throw DataError("prediction " + std::to_string(v) + " of member " +
                                std::to_string(k % members_) + " on example " +
                                std::to_string(k / members_) + " lies outside [-1, 1]");
        }
    }

    /// Builds from member rows: rows[i][j] = h_i(x_j).
    static EnsembleMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                    bool reweighted = false)
    {
        if (rows.empty() || rows.front().empty())
            throw DataError("ensemble matrix needs at least one member and one example");
        const std::size_t p = rows.size();
        const std::size_t n = rows.front().size();
        std::vector<double> data(p * n);
        for (std::size_t i = 0; i < p; ++i) {
            if (rows[i].size() != n)
                throw DimensionError("member row " + std::to_string(i) + " has " +
                                     std::to_string(rows[i].size()) + " entries, expected " +
                                     std::to_string(n));
            for (std::size_t j = 0; j < n; ++j)
                data[j * p + i] = rows[i][j];
        }
        return EnsembleMatrix(p, n, std::move(data), reweighted);
    }

    [[nodiscard]] std::size_t members() const noexcept { return members_; }
    [[nodiscard]] std::size_t examples() const noexcept { return examples_; }
    [[nodiscard]] bool reweighted() const noexcept { return reweighted_; }

    [[nodiscard]] double operator()(std::size_t member, std::size_t example) const noexcept
    {
        return data_[example * members_ + member];
    }

    /// x_j, the p-vector of ensemble predictions on example j.
    [[nodiscard]] std::span<const double> example(std::size_t j) const noexcept
    {
        return {data_.data() + j * members_, members_};
    }

    [[nodiscard]] std::vector<double> member_row(std::size_t i) const
    {
        std::vector<double> row(examples_);
        for (std::size_t j = 0; j < examples_; ++j)
            row[j] = (*this)(i, j);
        return row;
    }

    friend bool operator==(const EnsembleMatrix&, const EnsembleMatrix&) = default;

private:
    std::size_t members_ = 0;
    std::size_t examples_ = 0;
    std::vector<double> data_;
    bool reweighted_ = false;
};

/// Lower bounds b on (1/n) F z, one per member. Entries <= 0 are admitted
/// (conservative estimates); entries > 1 make the game infeasible and are
/// reported by validate_instance rather than rejected here.
class CorrelationVector
{
public:
    CorrelationVector() = default;
    explicit CorrelationVector(std::vector<double> values) : values_(std::move(values))
    {
        for (double v : values_)
            if (!std::isfinite(v))
                throw DataError("non-finite correlation bound");
    }
    CorrelationVector(std::initializer_list<double> values)
        : CorrelationVector(std::vector<double>(values))
    {
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const CorrelationVector&, const CorrelationVector&) = default;

private:
    std::vector<double> values_;
};

/// Dual weights sigma over the ensemble. Orthant-constrained vectors belong
/// to the b-inequality games; free vectors to the L1-regularized game.
class WeightVector
{
public:
    WeightVector() = default;
    WeightVector(std::vector<double> values, bool orthant_constrained)
        : values_(std::move(values)), orthant_(orthant_constrained)
    {
        for (double v : values_) {
            if (!std::isfinite(v))
                throw DataError("non-finite weight");
            if (orthant_ && v < 0.0)
                throw DomainError("orthant-constrained weight vector has a negative component");
        }
    }

    static WeightVector zeros(std::size_t p, bool orthant_constrained = true)
    {
        return WeightVector(std::vector<double>(p, 0.0), orthant_constrained);
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] bool orthant_constrained() const noexcept { return orthant_; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> values_;
    bool orthant_ = true;
};

/// Per-example output of a learned classifier: score m_j = x_j . sigma,
/// probability of predicting p_j, and the prediction g_j used when predicting.
struct Decision
{
    double score = 0.0;
    double predict_prob = 1.0;
    double prediction = 0.0;
};

/// Unlabeled scores F^T sigma.
inline std::vector<double> scores(const EnsembleMatrix& F, std::span<const double> sigma)
{
    if (sigma.size() != F.members())
        throw DimensionError("weight vector has " + std::to_string(sigma.size()) +
                             " components for an ensemble of " + std::to_string(F.members()));
    std::vector<double> out(F.examples());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = compensated_dot(F.example(j), sigma);
    return out;
}

inline std::vector<double> scores(const EnsembleMatrix& F, const WeightVector& sigma)
{
    return scores(F, sigma.values());
}

inline void require_same_members(const EnsembleMatrix& F, const CorrelationVector& b)
{
    if (b.size() != F.members())
        throw DimensionError("correlation vector has " + std::to_string(b.size()) +
                             " entries for an ensemble of " + std::to_string(F.members()));
}

} // namespace abstain

#endif // ABSTAIN_CORE_DATA_HPP
