#ifndef ABSTAIN_FRONTIER_HPP
#define ABSTAIN_FRONTIER_HPP

// Abstain/error trade-off of the 0-1 game: the dual function
// w(lam) = min_sigma gamma(sigma, lam / 2), the multiplier for a given abstain
// budget, and the frontier V(alpha).
//
// The strategy induced by sigma abstains at rate r(sigma) = mean [1 - |m_j|]_+
// and has certified error (1/2)(-b . sigma + mean |m_j|), which equals
// (1/2)(gamma(sigma, lam / 2) - lam r(sigma)). Mixing two strategies mixes
// both coordinates, so the lower convex hull of the certified points is an
// achievable, convex, nonincreasing frontier.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/objective.hpp>
#include <abstain/solver.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace abstain {

/// Solver settings for frontier solves: a longer stall window than the
/// solver default, since the realized rates depend on the minimizer itself.
inline SolveConfig frontier_config()
{
    SolveConfig cfg;
    cfg.window = 1000;
    return cfg;
}

struct WValue
{
    double value = 0.0;       ///< w(lam), the minimized slack
    WeightVector sigma;       ///< minimizer
    double abstain_rate = 1.0;///< mean [1 - |m_j|]_+ at sigma, the envelope derivative
    double certified = 0.0;   ///< (1/2)(-b . sigma + mean |m_j|)
    SolveResult solve;
};

/// w(lam) for lam in [0, 1]. lam = 0 is answered in closed form (sigma = 0).
inline WValue w(const EnsembleMatrix& F, const CorrelationVector& b, double lambda,
                const SolveConfig& cfg = frontier_config(),
                std::optional<std::span<const double>> warm_start = {})
{
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw DomainError("lambda must lie in [0, 1]");
    require_same_members(F, b);
    WValue out;
    if (lambda == 0.0) {
        out.sigma = WeightVector::zeros(F.members());
        out.value = 0.0;
        out.abstain_rate = 1.0;
        out.certified = 0.0;
        out.solve.sigma_star = out.sigma;
        out.solve.converged = true;
        return out;
    }
    const ObjectiveSpec spec(F, b, CostRegime{0.5 * lambda});
    out.solve = minimize_orthant(spec, cfg, warm_start);
    out.sigma = out.solve.sigma_star;
    out.value = out.solve.objective_value;
    out.abstain_rate = abstain_rate(F, out.sigma.values());
    out.certified = 0.5 * error_slack(F, b, out.sigma.values());
    return out;
}

struct FrontierPoint
{
    double alpha = 0.0;
    double lambda = 0.0;
    double V = 0.0;
    double certified = 0.0;
    WeightVector sigma;
    /// Realized abstain rates bracketing alpha when it falls in a jump of
    /// the rate map (lower, upper); equal to alpha otherwise.
    double rate_lo = 0.0;
    double rate_hi = 0.0;
};

struct FrontierCurve
{
    std::vector<FrontierPoint> points; ///< sorted by alpha, endpoints included
    std::vector<FrontierPoint> raw;    ///< every swept point, in sweep order

    /// Piecewise-linear V between the hull vertices.
    [[nodiscard]] double value_at(double alpha) const
    {
        if (points.empty())
            throw DomainError("empty frontier");
        alpha = std::clamp(alpha, 0.0, 1.0);
        for (std::size_t k = 1; k < points.size(); ++k) {
            const auto& a = points[k - 1];
            const auto& c = points[k];
            if (alpha <= c.alpha) {
                if (c.alpha == a.alpha)
                    return std::min(a.V, c.V);
                const double t = (alpha - a.alpha) / (c.alpha - a.alpha);
                return a.V + t * (c.V - a.V);
            }
        }
        return points.back().V;
    }
};

namespace detail {

/// Lower convex hull of points sorted by alpha (ties keep the lowest V).
inline std::vector<FrontierPoint> lower_hull(std::vector<FrontierPoint> pts)
{
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& c) {
        return a.alpha < c.alpha || (a.alpha == c.alpha && a.V < c.V);
    });
    std::vector<FrontierPoint> h;
    for (auto& q : pts) {
        if (!h.empty() && h.back().alpha == q.alpha)
            continue;
        while (h.size() >= 2) {
            const auto& a = h[h.size() - 2];
            const auto& c = h.back();
            // drop c if it lies on or above segment a-q
            const double cross = (c.alpha - a.alpha) * (q.V - a.V) - (c.V - a.V) * (q.alpha - a.alpha);
            if (cross <= 0.0)
                h.pop_back();
            else
                break;
        }
        h.push_back(std::move(q));
    }
    return h;
}

inline std::vector<double> lambda_grid(std::size_t k)
{
    std::vector<double> g;
    for (std::size_t i = 0; i < k; ++i)
        g.push_back(1.0 - static_cast<double>(i) / static_cast<double>(k));
    const std::size_t geo = std::max<std::size_t>(2, k / 2);
    const double top = 1.0 / static_cast<double>(k);
    const double bottom = 1e-4;
    for (std::size_t i = 0; i < geo; ++i)
        g.push_back(top * std::pow(bottom / top, static_cast<double>(i + 1) / static_cast<double>(geo)));
    std::sort(g.begin(), g.end(), std::greater<>());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

} // namespace detail

inline constexpr double kLambdaMin = 1e-4;

/// Sweeps lam from 1 down to 1e-4 over a linear grid of k points plus a
/// geometric tail, warm-starting each solve from the previous minimizer.
/// The lam = 1 solve starts cold, so V(0) reproduces the prediction game value.
inline FrontierCurve trace(const EnsembleMatrix& F, const CorrelationVector& b, std::size_t k,
                           const SolveConfig& cfg = frontier_config())
{
    if (k < 2)
        throw DomainError("frontier grid needs at least 2 points");
    require_same_members(F, b);
    FrontierCurve curve;
    std::optional<std::vector<double>> warm;
    double v_pred = 0.0;
    for (double lam : detail::lambda_grid(k)) {
        const WValue wv = warm ? w(F, b, lam, cfg, std::span<const double>(*warm))
                               : w(F, b, lam, cfg);
        if (lam == 1.0)
            v_pred = 0.5 * wv.value;
        FrontierPoint pt;
        pt.alpha = wv.abstain_rate;
        pt.lambda = lam;
        pt.V = wv.certified;
        pt.certified = wv.certified;
        pt.sigma = wv.sigma;
        pt.rate_lo = pt.rate_hi = pt.alpha;
        curve.raw.push_back(pt);
        warm = std::vector<double>(wv.sigma.values().begin(), wv.sigma.values().end());
    }

    std::vector<FrontierPoint> cand;
    FrontierPoint start;
    start.alpha = 0.0;
    start.lambda = 1.0;
    start.V = start.certified = v_pred;
    start.sigma = curve.raw.front().sigma;
    cand.push_back(start);
    for (const auto& pt : curve.raw)
        if (pt.alpha > 0.0 && pt.alpha < 1.0)
            cand.push_back(pt);
    FrontierPoint end;
    end.alpha = 1.0;
    end.lambda = 0.0;
    end.V = end.certified = 0.0;
    end.rate_lo = end.rate_hi = 1.0;
    end.sigma = WeightVector::zeros(F.members());
    cand.push_back(end);
    curve.points = detail::lower_hull(std::move(cand));
    return curve;
}

/// The multiplier whose minimizer abstains at rate alpha: bisection on
/// lam in [0, 1] until |rate - alpha| <= 0.01 or the bracket is below 1e-6.
/// In a jump of the rate map, V is interpolated between the two bracketing
/// certified points and [rate_lo, rate_hi] reports the achievable rates;
/// sigma is taken from the side that abstains at most alpha.
inline FrontierPoint lambda_for_alpha(const EnsembleMatrix& F, const CorrelationVector& b,
                                      double alpha, const SolveConfig& cfg = frontier_config(),
                                      double rate_tol = 0.01, double bracket_tol = 1e-6)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("abstain rate must lie in (0, 1)");
    require_same_members(F, b);

    auto point_from = [&](const WValue& wv, double lam) {
        FrontierPoint pt;
        pt.alpha = alpha;
        pt.lambda = lam;
        pt.V = 0.5 * (wv.value - lam * alpha);
        pt.certified = wv.certified;
        pt.sigma = wv.sigma;
        pt.rate_lo = pt.rate_hi = wv.abstain_rate;
        return pt;
    };

    WValue hi_w = w(F, b, 1.0, cfg);
    if (std::abs(hi_w.abstain_rate - alpha) <= rate_tol)
        return point_from(hi_w, 1.0);
    if (hi_w.abstain_rate > alpha) {
        // Even lam = 1 abstains more than alpha: mix the no-abstain strategy
        // (rate 0, error V_PRED) with sigma*(1).
        FrontierPoint pt = point_from(hi_w, 1.0);
        const double v_pred = 0.5 * hi_w.value;
        const double t = alpha / hi_w.abstain_rate;
        pt.V = v_pred + t * (hi_w.certified - v_pred);
        pt.rate_lo = 0.0;
        pt.rate_hi = hi_w.abstain_rate;
        return pt;
    }
    WValue lo_w = w(F, b, 0.0, cfg);
    double lo = 0.0, hi = 1.0;
    while (hi - lo > bracket_tol) {
        const double mid = 0.5 * (lo + hi);
        WValue mw = w(F, b, mid, cfg);
        if (std::abs(mw.abstain_rate - alpha) <= rate_tol)
            return point_from(mw, mid);
        if (mw.abstain_rate > alpha) {
            lo = mid;
            lo_w = std::move(mw);
        } else {
            hi = mid;
            hi_w = std::move(mw);
        }
    }
    FrontierPoint pt = point_from(hi_w, 0.5 * (lo + hi));
    const double r_lo = hi_w.abstain_rate; // abstains less than alpha
    const double r_hi = lo_w.abstain_rate; // abstains more than alpha
    const double t = r_hi > r_lo ? (alpha - r_lo) / (r_hi - r_lo) : 0.0;
    pt.V = hi_w.certified + t * (lo_w.certified - hi_w.certified);
    pt.rate_lo = r_lo;
    pt.rate_hi = r_hi;
    return pt;
}

/// Smallest abstain rate with zero worst-case error, when w'(0+) = 0.
/// w'(0+) is read off the sweep's smallest multiplier (1e-4).
inline std::optional<double> zero_error_alpha(const FrontierCurve& curve)
{
    if (curve.raw.empty())
        return std::nullopt;
    if (curve.raw.back().alpha > 0.005)
        return std::nullopt;
    for (const auto& pt : curve.points)
        if (pt.V <= 1e-4)
            return pt.alpha;
    return std::nullopt;
}

inline std::optional<double> zero_error_alpha(const EnsembleMatrix& F, const CorrelationVector& b,
                                              std::size_t k = 20,
                                              const SolveConfig& cfg = frontier_config())
{
    return zero_error_alpha(trace(F, b, k, cfg));
}

} // namespace abstain

#endif // ABSTAIN_FRONTIER_HPP
