#ifndef ABSTAIN_SPECIALISTS_HPP
#define ABSTAIN_SPECIALISTS_HPP

// Specialists: members that predict only on part of the data. Row i of the
// participation matrix v holds the probability that member i predicts on
// each example; S_ij = n rho_i(x_j) h_i(x_j) with rho_i = v_i / sum_k v_i(x_k).

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/numeric.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace abstain {

class ParticipationMatrix
{
public:
    ParticipationMatrix() = default;

    ParticipationMatrix(std::size_t members, std::size_t examples, std::vector<double> column_major)
        : members_(members), examples_(examples), data_(std::move(column_major))
    {
        if (data_.size() != members_ * examples_)
            throw DimensionError("participation matrix storage has the wrong size");
        for (double v : data_)
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("participation " + std::to_string(v) + " outside [0, 1]");
        for (std::size_t i = 0; i < members_; ++i) {
            bool any = false;
            for (std::size_t j = 0; j < examples_ && !any; ++j)
                any = (*this)(i, j) > 0.0;
            if (!any)
                throw DataError("member " + std::to_string(i) +
                                " abstains on every example (useless specialist)");
        }
    }

    static ParticipationMatrix from_rows(const std::vector<std::vector<double>>& rows)
    {
        if (rows.empty() || rows.front().empty())
            throw DataError("participation matrix needs at least one member and one example");
        const std::size_t p = rows.size(), n = rows.front().size();
        std::vector<double> data(p * n);
        for (std::size_t i = 0; i < p; ++i) {
            if (rows[i].size() != n)
                throw DimensionError("participation rows have unequal lengths");
            for (std::size_t j = 0; j < n; ++j)
                data[j * p + i] = rows[i][j];
        }
        return ParticipationMatrix(p, n, std::move(data));
    }

    static ParticipationMatrix ones(std::size_t members, std::size_t examples)
    {
        return ParticipationMatrix(members, examples, std::vector<double>(members * examples, 1.0));
    }

    /// v_ij = 0 where the prediction is exactly 0, 1 elsewhere.
    static ParticipationMatrix from_zeros(const EnsembleMatrix& F)
    {
        std::vector<double> data(F.members() * F.examples());
        for (std::size_t j = 0; j < F.examples(); ++j)
            for (std::size_t i = 0; i < F.members(); ++i)
                data[j * F.members() + i] = F(i, j) == 0.0 ? 0.0 : 1.0;
        return ParticipationMatrix(F.members(), F.examples(), std::move(data));
    }

    [[nodiscard]] std::size_t members() const noexcept { return members_; }
    [[nodiscard]] std::size_t examples() const noexcept { return examples_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept
    {
        return data_[j * members_ + i];
    }

private:
    std::size_t members_ = 0;
    std::size_t examples_ = 0;
    std::vector<double> data_;
};

/// rho_i(x_j) = v_ij / sum_k v_ik.
inline std::vector<std::vector<double>> participation_weights(const ParticipationMatrix& v)
{
    std::vector<std::vector<double>> rho(v.members(), std::vector<double>(v.examples()));
    for (std::size_t i = 0; i < v.members(); ++i) {
        CompensatedSum s;
        for (std::size_t j = 0; j < v.examples(); ++j)
            s.add(v(i, j));
        const double total = s.value();
        for (std::size_t j = 0; j < v.examples(); ++j)
            rho[i][j] = v(i, j) / total;
    }
    return rho;
}

/// The reweighted matrix S. Rows with constant participation are copied
/// unchanged, so v = 1 reproduces F bit for bit.
inline EnsembleMatrix reweight(const EnsembleMatrix& F, const ParticipationMatrix& v)
{
    if (v.members() != F.members() || v.examples() != F.examples())
        throw DimensionError("participation matrix shape differs from the prediction matrix");
    const std::size_t p = F.members(), n = F.examples();
    std::vector<double> data(p * n);
    for (std::size_t i = 0; i < p; ++i) {
        bool constant = true;
        for (std::size_t j = 1; j < n && constant; ++j)
            constant = v(i, j) == v(i, 0);
        CompensatedSum s;
        for (std::size_t j = 0; j < n; ++j)
            s.add(v(i, j));
        const double total = s.value();
        for (std::size_t j = 0; j < n; ++j) {
            const double scale = constant ? 1.0 : static_cast<double>(n) * v(i, j) / total;
            data[j * p + i] = scale * F(i, j);
        }
    }
    return EnsembleMatrix(p, n, std::move(data), true);
}

/// b_S enters downstream exactly as b. Entries above 1 are infeasible and
/// reported through `warning` rather than rejected.
inline CorrelationVector effective_correlation_note(const CorrelationVector& b_S,
                                                    std::size_t members,
                                                    std::string* warning = nullptr)
{
    if (b_S.size() != members)
        throw DimensionError("specialist bounds have " + std::to_string(b_S.size()) +
                             " entries for " + std::to_string(members) + " members");
    if (warning) {
        warning->clear();
        for (std::size_t i = 0; i < b_S.size(); ++i)
            if (b_S[i] > 1.0)
                *warning += "bound of member " + std::to_string(i) + " exceeds 1 (infeasible); ";
    }
    return b_S;
}

} // namespace abstain

#endif // ABSTAIN_SPECIALISTS_HPP
