#ifndef ABSTAIN_SOLVER_HPP
#define ABSTAIN_SOLVER_HPP

// Projected and proximal subgradient minimization of the slack objectives,
// with best-iterate tracking and a sound certificate at the returned point.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/objective.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace abstain {

struct SolveConfig
{
    std::size_t max_iters = 20000;
    double step0 = 1.0;
    /// Stop once the best value improved by at most tol * max(1, |best|)
    /// over the last `window` iterations.
    double tol = 1e-6;
    std::size_t window = 200;
    /// Divide each step by the subgradient norm, so that step t has length
    /// step0 / sqrt(t) whatever the local slope.
    bool normalized = true;

    void validate() const
    {
        if (max_iters < 1)
            throw DomainError("max_iters must be at least 1");
        if (!(step0 > 0.0) || !std::isfinite(step0))
            throw DomainError("step0 must be positive");
        if (!(tol > 0.0))
            throw DomainError("tol must be positive");
        if (window < 1)
            throw DomainError("window must be at least 1");
    }
};

struct SolveResult
{
    WeightVector sigma_star;
    double objective_value = 0.0;
    double certified_value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Sound upper bound on the worst-case (abstaining) loss of the strategy
/// induced by sigma: half the objective, plus c for a general-loss cost regime.
inline double certify(const ObjectiveSpec& spec, std::span<const double> sigma)
{
    if (!spec.l1_epsilon)
        for (double v : sigma)
            if (v < 0.0)
                throw DomainError("certify: sigma must be nonnegative outside the L1 regime");
    double v = 0.5 * objective_value(spec, sigma);
    if (const auto* g = std::get_if<GeneralCostRegime>(&spec.regime))
        v += g->c;
    return v;
}

inline double certify(const ObjectiveSpec& spec, const WeightVector& sigma)
{
    return certify(spec, sigma.values());
}

namespace detail {

struct Iterate
{
    std::vector<double> sigma;
    double value = 0.0;
};

/// Shared loop. `step_fn(sigma, eval, step)` produces the next point;
/// `stationary(sigma, eval)` reports an exact optimality certificate.
template <typename Eval, typename Step, typename Stationary>
SolveResult run_descent(const ObjectiveSpec& spec, const SolveConfig& cfg,
                        std::vector<double> start, bool orthant, const Eval& eval,
                        const Step& step_fn, const Stationary& stationary,
                        bool also_try_zero)
{
    cfg.validate();
    const std::size_t p = spec.members();
    if (start.size() != p)
        throw DimensionError("warm start has the wrong number of members");

    std::vector<double> sigma = std::move(start);
    SlackEval cur = eval(sigma);
    Iterate best{sigma, cur.value};
    if (also_try_zero) {
        std::vector<double> zero(p, 0.0);
        const SlackEval z = eval(zero);
        if (z.value < best.value) {
            best = {zero, z.value};
            sigma = std::move(zero);
            cur = z;
        }
    }

    std::vector<double> history; // best value after each iteration
    history.reserve(std::min<std::size_t>(cfg.max_iters, 1 << 16));
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iters) {
        if (stationary(sigma, cur)) {
            converged = true;
            break;
        }
        ++it;
        double step = cfg.step0 / std::sqrt(static_cast<double>(it));
        if (cfg.normalized) {
            CompensatedSum g2;
            for (double v : cur.subgrad)
                g2.add(v * v);
            if (g2.value() > 0.0)
                step /= std::sqrt(g2.value());
        }
        sigma = step_fn(sigma, cur, step);
        cur = eval(sigma);
        if (cur.value < best.value) {
            best.sigma = sigma;
            best.value = cur.value;
        }
        history.push_back(best.value);
        if (history.size() > cfg.window) {
            const double before = history[history.size() - 1 - cfg.window];
            if (before - best.value <= cfg.tol * std::max(1.0, std::abs(best.value))) {
                converged = true;
                break;
            }
        }
    }

    SolveResult out;
    out.sigma_star = WeightVector(best.sigma, orthant);
    out.objective_value = best.value;
    out.certified_value = certify(spec, best.sigma);
    out.iterations = it;
    out.converged = converged;
    return out;
}

} // namespace detail

/// min over sigma >= 0 of the regime's slack by projected subgradient descent
/// with steps step0 / sqrt(t). Starts from sigma = 0, or from `warm_start`
/// (in which case sigma = 0 is also evaluated and kept if better).
inline SolveResult minimize_orthant(const ObjectiveSpec& spec, const SolveConfig& cfg = {},
                                    std::optional<std::span<const double>> warm_start = {})
{
    if (spec.l1_epsilon)
        throw DomainError("minimize_orthant: spec carries an L1 radius, use minimize_l1");
    const std::size_t p = spec.members();
    std::vector<double> start(p, 0.0);
    if (warm_start) {
        if (warm_start->size() != p)
            throw DimensionError("warm start has the wrong number of members");
        for (std::size_t i = 0; i < p; ++i)
            start[i] = std::max(0.0, (*warm_start)[i]);
    }
    auto eval = [&](const std::vector<double>& s) { return slack_eval(spec, s, true); };
    auto step = [](const std::vector<double>& s, const SlackEval& e, double h) {
        std::vector<double> next(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            next[i] = std::max(0.0, s[i] - h * e.subgrad[i]);
        return next;
    };
    auto stationary = [](const std::vector<double>& s, const SlackEval& e) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double g = e.subgrad[i];
            if (!(g == 0.0 || (s[i] == 0.0 && g > 0.0)))
                return false;
        }
        return true;
    };
    return detail::run_descent(spec, cfg, std::move(start), true, eval, step, stationary,
                               warm_start.has_value());
}

/// min over free sigma of slack + eps ||sigma||_1 by proximal subgradient
/// descent: a subgradient step on the slack, then soft-thresholding by step * eps.
inline SolveResult minimize_l1(const ObjectiveSpec& spec, const SolveConfig& cfg = {})
{
    if (!spec.l1_epsilon)
        throw DomainError("minimize_l1: spec has no L1 radius");
    const double eps = *spec.l1_epsilon;
    auto eval = [&](const std::vector<double>& s) {
        SlackEval e = slack_eval(spec, s, true);
        e.value += eps * l1_norm(s);
        return e;
    };
    auto step = [eps](const std::vector<double>& s, const SlackEval& e, double h) {
        std::vector<double> next(s.size());
        const double thr = h * eps;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double u = s[i] - h * e.subgrad[i];
            next[i] = u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
        }
        return next;
    };
    auto stationary = [eps](const std::vector<double>& s, const SlackEval& e) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double g = e.subgrad[i];
            const bool ok = s[i] == 0.0 ? std::abs(g) <= eps : g + eps * sign_of(s[i]) == 0.0;
            if (!ok)
                return false;
        }
        return true;
    };
    return detail::run_descent(spec, cfg, std::vector<double>(spec.members(), 0.0), false, eval,
                               step, stationary, false);
}

/// minimize_l1 when the spec has an L1 radius, minimize_orthant otherwise.
inline SolveResult solve(const ObjectiveSpec& spec, const SolveConfig& cfg = {})
{
    return spec.l1_epsilon ? minimize_l1(spec, cfg) : minimize_orthant(spec, cfg);
}

} // namespace abstain

#endif // ABSTAIN_SOLVER_HPP
