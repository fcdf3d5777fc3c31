#ifndef ABSTAIN_ESTIMATION_HPP
#define ABSTAIN_ESTIMATION_HPP

// Correlation bounds from labeled data: plugin estimates, a one-sided
// Hoeffding correction, and cross-validation of the L1 radius.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/numeric.hpp>
#include <abstain/objective.hpp>
#include <abstain/predictor.hpp>
#include <abstain/random.hpp>
#include <abstain/solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace abstain {

/// Ensemble predictions on m labeled examples with labels in {-1, +1}.
struct LabeledSet
{
    EnsembleMatrix F;
    std::vector<double> y;

    LabeledSet() = default;
    LabeledSet(EnsembleMatrix F_, std::vector<double> y_) : F(std::move(F_)), y(std::move(y_))
    {
        if (y.size() != F.examples())
            throw DimensionError("label count " + std::to_string(y.size()) + " differs from " +
                                 std::to_string(F.examples()) + " labeled examples");
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] != 1.0 && y[j] != -1.0)
                throw DataError("label " + std::to_string(y[j]) + " of example " +
                                std::to_string(j) + " is not -1 or +1");
    }

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }

    /// The labeled examples listed in `idx`, in that order.
    [[nodiscard]] LabeledSet subset(const std::vector<std::size_t>& idx) const
    {
        const std::size_t p = F.members();
        std::vector<double> data;
        data.reserve(idx.size() * p);
        std::vector<double> labels;
        labels.reserve(idx.size());
        for (std::size_t j : idx) {
            const auto x = F.example(j);
            data.insert(data.end(), x.begin(), x.end());
            labels.push_back(y[j]);
        }
        return LabeledSet(EnsembleMatrix(p, idx.size(), std::move(data), F.reweighted()),
                          std::move(labels));
    }
};

/// b_i = (1/m) sum_j F_ij y_j.
inline CorrelationVector plugin_b(const LabeledSet& data)
{
    const std::size_t p = data.F.members(), m = data.size();
    std::vector<double> b(p);
    for (std::size_t i = 0; i < p; ++i) {
        CompensatedSum s;
        for (std::size_t j = 0; j < m; ++j)
            s.add(data.F(i, j) * data.y[j]);
        b[i] = s.value() / static_cast<double>(m);
    }
    return CorrelationVector(b);
}

/// sqrt(2 ln(p / delta) / m): one-sided Hoeffding for summands in [-1, 1]
/// with a union bound over p members.
inline double hoeffding_halfwidth(std::size_t members, std::size_t m, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("delta must lie in (0, 1)");
    if (members == 0 || m == 0)
        throw DomainError("half-width needs at least one member and one labeled example");
    return std::sqrt(2.0 * std::log(static_cast<double>(members) / delta) /
                     static_cast<double>(m));
}

/// plugin_b minus the Hoeffding half-width. Entries may be <= 0; they are kept.
inline CorrelationVector corrected_b(const LabeledSet& data, double delta)
{
    const double h = hoeffding_halfwidth(data.F.members(), data.size(), delta);
    const CorrelationVector b = plugin_b(data);
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        out[i] = b[i] - h;
    return CorrelationVector(out);
}

/// Members whose bound is <= 0 (kept, but worth a diagnostic).
inline std::vector<std::size_t> nonpositive_members(const CorrelationVector& b)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] <= 0.0)
            out.push_back(i);
    return out;
}

/// Mean realized loss of decisions against known labels: p l(y, g) + (1 - p) c,
/// with c = 0 for the prediction regime.
inline double realized_loss(const std::vector<Decision>& d, const std::vector<double>& y,
                            const Regime& regime)
{
    if (d.size() != y.size())
        throw DimensionError("decision and label counts differ");
    LossSpec loss = losses::zero_one();
    double c = 0.0;
    if (const auto* r = std::get_if<PredictRegime>(&regime))
        loss = r->loss;
    else if (const auto* r = std::get_if<CostRegime>(&regime))
        c = r->c;
    else {
        const auto& g = std::get<GeneralCostRegime>(regime);
        loss = g.loss;
        c = g.c;
    }
    CompensatedSum s;
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double l = y[j] > 0 ? loss.loss_plus(d[j].prediction) : loss.loss_minus(d[j].prediction);
        s.add(d[j].predict_prob == 0.0 ? c : d[j].predict_prob * l + (1.0 - d[j].predict_prob) * c);
    }
    return s.value() / static_cast<double>(d.size());
}

struct EpsilonSelection
{
    double epsilon = 0.0;
    std::vector<double> grid;       ///< sorted candidates
    std::vector<double> mean_loss;  ///< held-out loss per candidate
};

/// k-fold cross-validation of the L1 radius. Fold k trains on the held-out
/// fold's predictions (its unlabeled view) with plugin bounds from the other
/// folds, then scores the decisions against the held-out labels. Ties go to
/// the smallest radius.
inline EpsilonSelection select_epsilon(const LabeledSet& data, std::vector<double> grid,
                                       std::size_t folds, std::uint64_t seed,
                                       const Regime& regime = CostRegime{0.25},
                                       const SolveConfig& cfg = {})
{
    if (grid.empty())
        throw DomainError("epsilon grid is empty");
    if (folds < 2)
        throw DomainError("cross-validation needs at least 2 folds");
    if (folds > data.size())
        throw DomainError("more folds than labeled examples");
    for (double e : grid)
        if (!(e >= 0.0) || !std::isfinite(e))
            throw DomainError("epsilon candidates must be nonnegative");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<std::size_t> order(data.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        order[j] = j;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<CompensatedSum> totals(grid.size());
    for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> train, held;
        for (std::size_t r = 0; r < order.size(); ++r)
            (r % folds == k ? held : train).push_back(order[r]);
        const LabeledSet tr = data.subset(train);
        const LabeledSet ho = data.subset(held);
        const CorrelationVector b = plugin_b(tr);
        for (std::size_t e = 0; e < grid.size(); ++e) {
            const ObjectiveSpec spec(ho.F, b, regime, grid[e]);
            const SolveResult res = minimize_l1(spec, cfg);
            const DecisionBatch dec = decide_batch(ho.F, res.sigma_star, regime);
            totals[e].add(realized_loss(dec.decisions, ho.y, regime));
        }
    }

    EpsilonSelection out;
    out.grid = grid;
    out.mean_loss.resize(grid.size());
    std::size_t best = 0;
    for (std::size_t e = 0; e < grid.size(); ++e) {
        out.mean_loss[e] = totals[e].value() / static_cast<double>(folds);
        if (out.mean_loss[e] < out.mean_loss[best])
            best = e;
    }
    out.epsilon = grid[best];
    return out;
}

} // namespace abstain

#endif // ABSTAIN_ESTIMATION_HPP
