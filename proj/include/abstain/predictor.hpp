#ifndef ABSTAIN_PREDICTOR_HPP
#define ABSTAIN_PREDICTOR_HPP

// Decision rules: the (p_j, g_j) strategy induced by a weight vector.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/losses.hpp>
#include <abstain/numeric.hpp>
#include <abstain/objective.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace abstain {

/// No abstention: predict clamp(score, -1, 1).
inline Decision decide_noabstain(double score) noexcept
{
    return {score, 1.0, std::clamp(score, -1.0, 1.0)};
}

/// 0-1 loss with abstention: p = min(1, |score|), g = sgn(score), g = +1 at 0.
inline Decision decide_abstain01(double score) noexcept
{
    return {score, std::min(1.0, std::abs(score)), sign_of(score)};
}

/// Prediction g = Gamma^{-1}(score / p) with the endpoint branches, for p > 0.
inline double general_prediction(const LossSpec& loss, double score, double p)
{
    if (!(p > 0.0))
        return 1.0;
    if (score <= p * loss.gamma_lo)
        return -1.0;
    if (score >= p * loss.gamma_hi)
        return 1.0;
    return gamma_inverse(loss, score / p);
}

/// General smooth loss with abstention at cost c: p = K^{-1}(score, 2c).
inline Decision decide_general(double score, const LossSpec& loss, double c)
{
    if (!(c > 0.0))
        throw DomainError("abstain cost must be positive");
    const double p = std::clamp(K_inverse(loss, score, 2.0 * c), 0.0, 1.0);
    return {score, p, general_prediction(loss, score, p)};
}

/// General loss without abstention: p = 1, g = Gamma^{-1}(score) clamped to [-1, 1].
inline Decision decide_predict_general(double score, const LossSpec& loss)
{
    return {score, 1.0, general_prediction(loss, score, 1.0)};
}

/// Decision rule for one example under a regime.
inline Decision decide(double score, const Regime& regime)
{
    if (const auto* r = std::get_if<PredictRegime>(&regime))
        return is_zero_one(r->loss) ? decide_noabstain(score)
                                    : decide_predict_general(score, r->loss);
    if (std::holds_alternative<CostRegime>(regime))
        return decide_abstain01(score);
    const auto& g = std::get<GeneralCostRegime>(regime);
    return decide_general(score, g.loss, g.c);
}

struct DecisionBatch
{
    std::vector<Decision> decisions;
    std::string regime;
    double realized_abstain_rate = 0.0;
};

inline double mean_abstain(const std::vector<Decision>& d)
{
    CompensatedSum s;
    for (const auto& x : d)
        s.add(1.0 - x.predict_prob);
    return d.empty() ? 0.0 : s.value() / static_cast<double>(d.size());
}

/// Applies the regime's rule to every score of F^T sigma.
inline DecisionBatch decide_batch(const EnsembleMatrix& F, std::span<const double> sigma,
                                  const Regime& regime)
{
    const std::vector<double> m = scores(F, sigma);
    DecisionBatch out;
    out.regime = regime_name(regime);
    out.decisions.resize(m.size());
    for (std::size_t j = 0; j < m.size(); ++j)
        out.decisions[j] = decide(m[j], regime);
    out.realized_abstain_rate = mean_abstain(out.decisions);
    return out;
}

inline DecisionBatch decide_batch(const EnsembleMatrix& F, const WeightVector& sigma,
                                  const Regime& regime)
{
    return decide_batch(F, sigma.values(), regime);
}

} // namespace abstain

#endif // ABSTAIN_PREDICTOR_HPP
