#ifndef ABSTAIN_OBJECTIVE_HPP
#define ABSTAIN_OBJECTIVE_HPP

// Slack functions: -b . sigma + mean potential(x_j . sigma), their
// subgradients, and the L1-penalized variant.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/losses.hpp>
#include <abstain/numeric.hpp>
#include <abstain/potentials.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace abstain {

/// No abstention; the loss defaults to 0-1 (well max(|m|, 1)).
struct PredictRegime
{
    LossSpec loss = losses::zero_one();
};

/// 0-1 loss with abstention at flat cost c in (0, 1/2].
struct CostRegime
{
    double c = 0.5;
};

/// Smooth general loss with abstention at flat cost c > 0.
struct GeneralCostRegime
{
    LossSpec loss;
    double c = 0.5;
};

using Regime = std::variant<PredictRegime, CostRegime, GeneralCostRegime>;

inline std::string regime_name(const Regime& r)
{
    if (std::holds_alternative<PredictRegime>(r))
        return "predict";
    if (std::holds_alternative<CostRegime>(r))
        return "cost";
    return "general_cost";
}

/// A training problem: data, bounds, regime and optional L1 radius.
struct ObjectiveSpec
{
    EnsembleMatrix F;
    CorrelationVector b;
    Regime regime = PredictRegime{};
    std::optional<double> l1_epsilon;

    ObjectiveSpec() = default;
    ObjectiveSpec(EnsembleMatrix F_, CorrelationVector b_, Regime regime_ = PredictRegime{},
                  std::optional<double> l1 = std::nullopt)
        : F(std::move(F_)), b(std::move(b_)), regime(std::move(regime_)), l1_epsilon(l1)
    {
        validate();
    }

    void validate() const
    {
        require_same_members(F, b);
        if (const auto* c = std::get_if<CostRegime>(&regime))
            require_abstain_cost(c->c);
        if (const auto* g = std::get_if<GeneralCostRegime>(&regime)) {
            detail::require_smooth(g->loss);
            if (!(g->c > 0.0) || !std::isfinite(g->c))
                throw DomainError("abstain cost must be positive and finite");
        }
        if (l1_epsilon && (!(*l1_epsilon >= 0.0) || !std::isfinite(*l1_epsilon)))
            throw DomainError("L1 radius must be nonnegative and finite");
    }

    [[nodiscard]] std::size_t members() const noexcept { return F.members(); }
    [[nodiscard]] std::size_t examples() const noexcept { return F.examples(); }
};

/// Objective value and (optionally) a subgradient at one sigma.
struct SlackEval
{
    double value = 0.0;
    std::vector<double> subgrad;
};

namespace detail {

inline void require_sigma(const EnsembleMatrix& F, std::span<const double> sigma)
{
    if (sigma.size() != F.members())
        throw DimensionError("weight vector has " + std::to_string(sigma.size()) +
                             " components for an ensemble of " + std::to_string(F.members()));
}

/// Generic evaluator. `pot(m)` returns {value, slope} of the per-example
/// potential. Chunked compensated reduction; bit-identical for any thread count.
template <typename Pot>
SlackEval evaluate_slack(const EnsembleMatrix& F, const CorrelationVector& b,
                         std::span<const double> sigma, const Pot& pot, bool want_grad)
{
    require_same_members(F, b);
    require_sigma(F, sigma);
    const std::size_t p = F.members();
    const std::size_t n = F.examples();

    struct Partial
    {
        double value = 0.0;
        std::vector<double> grad;
    };
    const auto parts = map_chunks(n, [&](std::size_t begin, std::size_t end) {
        CompensatedSum v;
        std::vector<CompensatedSum> g(want_grad ? p : 0);
        for (std::size_t j = begin; j < end; ++j) {
            const auto x = F.example(j);
            const auto [val, slope] = pot(compensated_dot(x, sigma));
            v.add(val);
            if (want_grad && slope != 0.0)
                for (std::size_t i = 0; i < p; ++i)
                    g[i].add(slope * x[i]);
        }
        Partial out;
        out.value = v.value();
        out.grad.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            out.grad[i] = g[i].value();
        return out;
    });

    CompensatedSum total;
    std::vector<CompensatedSum> grad(want_grad ? p : 0);
    for (const auto& part : parts) {
        total.add(part.value);
        for (std::size_t i = 0; i < part.grad.size(); ++i)
            grad[i].add(part.grad[i]);
    }
    const double inv_n = 1.0 / static_cast<double>(n);

    SlackEval out;
    out.value = -compensated_dot(b.values(), sigma) + total.value() * inv_n;
    if (want_grad) {
        out.subgrad.resize(p);
        for (std::size_t i = 0; i < p; ++i)
            out.subgrad[i] = -b[i] + grad[i].value() * inv_n;
    }
    return out;
}

struct PotValue
{
    double value;
    double slope;
};

template <typename Fn>
auto dispatch_potential(const Regime& regime, const Fn& fn)
{
    if (const auto* r = std::get_if<PredictRegime>(&regime)) {
        if (is_zero_one(r->loss))
            return fn([](double m) { return PotValue{psi_pred(m), psi_pred_subgrad(m)}; });
        const LossSpec& loss = r->loss;
        return fn([&loss](double m) {
            return PotValue{psi_general(loss, m), psi_general_slope(loss, m)};
        });
    }
    if (const auto* r = std::get_if<CostRegime>(&regime)) {
        const double c = r->c;
        return fn([c](double m) { return PotValue{psi_abstain(m, c), psi_abstain_subgrad(m, c)}; });
    }
    const auto& g = std::get<GeneralCostRegime>(regime);
    const LossSpec& loss = g.loss;
    const double lam = 2.0 * g.c;
    return fn([&loss, lam](double m) {
        const QValue q = Q_and_slope(loss, m, lam);
        return PotValue{q.value, q.slope};
    });
}

} // namespace detail

/// Slack of the regime (without the L1 penalty) and its subgradient.
inline SlackEval slack_eval(const ObjectiveSpec& spec, std::span<const double> sigma,
                            bool want_grad = true)
{
    return detail::dispatch_potential(spec.regime, [&](const auto& pot) {
        return detail::evaluate_slack(spec.F, spec.b, sigma, pot, want_grad);
    });
}

/// -b . sigma + mean max(|m_j|, 1).
inline double slack_predict(const ObjectiveSpec& spec, std::span<const double> sigma)
{
    return detail::evaluate_slack(
               spec.F, spec.b, sigma,
               [](double m) { return detail::PotValue{psi_pred(m), 0.0}; }, false)
        .value;
}

/// -b . sigma + mean Psi(m_j, c).
inline double slack_abstain(const ObjectiveSpec& spec, std::span<const double> sigma, double c)
{
    require_abstain_cost(c);
    return detail::evaluate_slack(
               spec.F, spec.b, sigma,
               [c](double m) { return detail::PotValue{psi_abstain(m, c), 0.0}; }, false)
        .value;
}

/// -b . sigma + mean Q(m_j, 2c). The game value is half the minimum plus c.
inline double slack_general(const ObjectiveSpec& spec, std::span<const double> sigma, double c,
                            const LossSpec& loss)
{
    detail::require_smooth(loss);
    if (!(c > 0.0))
        throw DomainError("abstain cost must be positive");
    return detail::evaluate_slack(
               spec.F, spec.b, sigma,
               [&loss, c](double m) { return detail::PotValue{Q(loss, m, 2.0 * c), 0.0}; }, false)
        .value;
}

/// Subgradient of the slack of `regime` at sigma: -b + mean slope(m_j) x_j.
inline std::vector<double> slack_subgrad(const ObjectiveSpec& spec, std::span<const double> sigma,
                                         const Regime& regime)
{
    return detail::dispatch_potential(regime, [&](const auto& pot) {
               return detail::evaluate_slack(spec.F, spec.b, sigma, pot, true);
           })
        .subgrad;
}

inline std::vector<double> slack_subgrad(const ObjectiveSpec& spec, std::span<const double> sigma)
{
    return slack_subgrad(spec, sigma, spec.regime);
}

/// Slack of the spec's regime.
inline double slack(const ObjectiveSpec& spec, std::span<const double> sigma)
{
    return slack_eval(spec, sigma, false).value;
}

inline double l1_norm(std::span<const double> sigma)
{
    CompensatedSum s;
    for (double v : sigma)
        s.add(std::abs(v));
    return s.value();
}

/// Regime slack + eps ||sigma||_1, sigma free in sign.
inline double l1_objective(const ObjectiveSpec& spec, std::span<const double> sigma, double eps)
{
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw DomainError("L1 radius must be nonnegative and finite");
    return slack(spec, sigma) + eps * l1_norm(sigma);
}

/// The spec's full training objective: slack, plus the L1 term when set.
inline double objective_value(const ObjectiveSpec& spec, std::span<const double> sigma)
{
    return spec.l1_epsilon ? l1_objective(spec, sigma, *spec.l1_epsilon) : slack(spec, sigma);
}

/// -b . sigma + mean |m_j|: the abstaining slack with cost 0. Half of it
/// bounds the worst-case error of the 0-1 abstaining strategy at sigma.
inline double error_slack(const EnsembleMatrix& F, const CorrelationVector& b,
                          std::span<const double> sigma)
{
    return detail::evaluate_slack(
               F, b, sigma, [](double m) { return detail::PotValue{std::abs(m), 0.0}; }, false)
        .value;
}

/// Mean [1 - |m_j|]_+ : the abstain rate of the 0-1 abstaining strategy.
inline double abstain_rate(const EnsembleMatrix& F, std::span<const double> sigma)
{
    detail::require_sigma(F, sigma);
    return reduce_sum(F.examples(),
                      [&](std::size_t j) {
                          return dpsi_dlambda(compensated_dot(F.example(j), sigma));
                      }) /
           static_cast<double>(F.examples());
}

} // namespace abstain

#endif // ABSTAIN_OBJECTIVE_HPP
