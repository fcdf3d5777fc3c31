#ifndef ABSTAIN_LOSSES_HPP
#define ABSTAIN_LOSSES_HPP

// General partial losses: score function, potential well, and the
// phi / K / Q machinery that drives abstaining under an arbitrary loss.
//
// Every quantity on the middle branch of the well is evaluated in the
// prediction coordinate g rather than the score m = Gamma(g):
//
//   S(g) = l+(g) + l-(g)                       (the well at m = Gamma(g))
//   D(g) = (l+'(g) + l-'(g)) / (l-'(g) - l+'(g))  (its slope at m = Gamma(g))
//   phi(Gamma(g)) = S(g) - Gamma(g) D(g)
//
// so each scalar inversion is a single monotone bisection over g in (-1, 1).

#include <abstain/error.hpp>
#include <abstain/numeric.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace abstain {

/// Partial losses l+(g) = loss(+1, g), l-(g) = loss(-1, g) and their
/// derivatives on (-1, 1). gamma_lo / gamma_hi are Gamma(-1), Gamma(1) and
/// may be infinite.
///
/// `smooth` marks losses whose induced well is differentiable and strictly
/// convex on the middle branch; only those are accepted by phi, K and Q.
struct LossSpec
{
    std::string name;
    std::function<double(double)> loss_plus;
    std::function<double(double)> loss_minus;
    std::function<double(double)> dloss_plus;
    std::function<double(double)> dloss_minus;
    double gamma_lo = -1.0;
    double gamma_hi = 1.0;
    bool smooth = false;
};

namespace losses {

inline LossSpec zero_one()
{
    return LossSpec{"zero_one",
                    [](double g) { return 0.5 * (1.0 - g); },
                    [](double g) { return 0.5 * (1.0 + g); },
                    [](double) { return -0.5; },
                    [](double) { return 0.5; },
                    -1.0,
                    1.0,
                    false};
}

/// Misclassification costs c_fn (true label +1) and c_fp (true label -1).
inline LossSpec asymmetric_cost(double c_fn, double c_fp)
{
    if (!(c_fn > 0.0 && c_fp > 0.0) || !std::isfinite(c_fn) || !std::isfinite(c_fp))
        throw DomainError("asymmetric costs must be positive and finite");
    char buf[96];
    std::snprintf(buf, sizeof buf, "asymmetric_cost:%.17g,%.17g", c_fn, c_fp);
    return LossSpec{buf,
                    [c_fn](double g) { return 0.5 * c_fn * (1.0 - g); },
                    [c_fp](double g) { return 0.5 * c_fp * (1.0 + g); },
                    [c_fn](double) { return -0.5 * c_fn; },
                    [c_fp](double) { return 0.5 * c_fp; },
                    -c_fn,
                    c_fp,
                    false};
}

inline LossSpec log_loss()
{
    const double ln2 = std::numbers::ln2;
    return LossSpec{"log_loss",
                    [ln2](double g) { return ln2 - std::log1p(g); },
                    [ln2](double g) { return ln2 - std::log1p(-g); },
                    [](double g) { return -1.0 / (1.0 + g); },
                    [](double g) { return 1.0 / (1.0 - g); },
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(),
                    true};
}

/// Zero-one loss plus tau times log loss. Its well tends to max(|m|, 1) as
/// tau -> 0 while staying smooth and strictly convex for every tau > 0.
inline LossSpec soft_zero_one(double tau)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw DomainError("soft_zero_one smoothing must be positive");
    const double ln2 = std::numbers::ln2;
    char buf[64];
    std::snprintf(buf, sizeof buf, "soft_zero_one:%.17g", tau);
    return LossSpec{buf,
                    [tau, ln2](double g) { return 0.5 * (1.0 - g) + tau * (ln2 - std::log1p(g)); },
                    [tau, ln2](double g) { return 0.5 * (1.0 + g) + tau * (ln2 - std::log1p(-g)); },
                    [tau](double g) { return -0.5 - tau / (1.0 + g); },
                    [tau](double g) { return 0.5 + tau / (1.0 - g); },
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(),
                    true};
}

/// Parses "zero_one", "log_loss", "asymmetric_cost:<c_fn>,<c_fp>", "soft_zero_one:<tau>".
inline LossSpec by_name(const std::string& spec)
{
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size())
            throw DomainError("bad loss parameter '" + s + "' in '" + spec + "'");
        return v;
    };
    if (head == "zero_one" && args.empty())
        return zero_one();
    if ((head == "log_loss" || head == "log") && args.empty())
        return log_loss();
    if (head == "asymmetric_cost") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw DomainError("asymmetric_cost needs two costs: asymmetric_cost:<c_fn>,<c_fp>");
        return asymmetric_cost(number(args.substr(0, comma)), number(args.substr(comma + 1)));
    }
    if (head == "soft_zero_one")
        return soft_zero_one(number(args));
    throw DomainError("unknown loss '" + spec + "'");
}

} // namespace losses

inline bool is_zero_one(const LossSpec& loss) { return loss.name == "zero_one"; }

namespace detail {

inline constexpr double kGammaTol = 1e-10;

inline double open_interval(double g) noexcept
{
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(g, -hi, hi);
}

inline double well_mid(const LossSpec& l, double g) { return l.loss_plus(g) + l.loss_minus(g); }

inline double slope_mid(const LossSpec& l, double g)
{
    const double dp = l.dloss_plus(g);
    const double dm = l.dloss_minus(g);
    return (dp + dm) / (dm - dp);
}

inline double gamma_mid(const LossSpec& l, double g) { return l.loss_minus(g) - l.loss_plus(g); }

inline double phi_mid(const LossSpec& l, double g)
{
    return well_mid(l, g) - gamma_mid(l, g) * slope_mid(l, g);
}

inline void require_smooth(const LossSpec& l)
{
    if (!l.smooth)
        throw DomainError("loss '" + l.name +
                          "' has a piecewise-linear well; phi/K/Q need a smooth loss");
}

} // namespace detail

/// Gamma(g) = l-(g) - l+(g), increasing on [-1, 1].
inline double gamma_score(const LossSpec& loss, double g)
{
    if (!(g >= -1.0 && g <= 1.0))
        throw DomainError("prediction " + std::to_string(g) + " outside [-1, 1]");
    if (g == -1.0)
        return loss.gamma_lo;
    if (g == 1.0)
        return loss.gamma_hi;
    return detail::gamma_mid(loss, g);
}

/// Pseudoinverse of Gamma: -1 below Gamma(-1), +1 above Gamma(1), otherwise
/// the bisection root with |Gamma(g) - m| <= 1e-10 (or a collapsed bracket).
inline double gamma_inverse(const LossSpec& loss, double m)
{
    if (std::isnan(m))
        throw DomainError("score is NaN");
    if (m <= loss.gamma_lo)
        return -1.0;
    if (m >= loss.gamma_hi)
        return 1.0;
    return bisect_increasing([&](double g) { return detail::gamma_mid(loss, g); }, m, -1.0, 1.0,
                             detail::kGammaTol);
}

/// The general potential well: -m + 2 l-(-1) below Gamma(-1), m + 2 l+(1)
/// above Gamma(1), l+(g) + l-(g) at g = Gamma^{-1}(m) in between.
///
/// The middle branch adds the first-order correction (m - Gamma(g)) D(g) for
/// the bisection residual; where Gamma^{-1} saturates in floating point (log
/// loss beyond |m| ~ 37) this continues the well along its asymptote.
inline double psi_general(const LossSpec& loss, double m)
{
    if (m <= loss.gamma_lo)
        return -m + 2.0 * loss.loss_minus(-1.0);
    if (m >= loss.gamma_hi)
        return m + 2.0 * loss.loss_plus(1.0);
    const double g = detail::open_interval(gamma_inverse(loss, m));
    return detail::well_mid(loss, g) + (m - detail::gamma_mid(loss, g)) * detail::slope_mid(loss, g);
}

/// Derivative of psi_general (outer branches have slopes -1 and +1).
inline double psi_general_slope(const LossSpec& loss, double m)
{
    if (m <= loss.gamma_lo)
        return -1.0;
    if (m >= loss.gamma_hi)
        return 1.0;
    return detail::slope_mid(loss, detail::open_interval(gamma_inverse(loss, m)));
}

/// phi(x) = Psi(x) - x Psi'(x). Nonnegative, decreasing for x >= 0 and
/// increasing for x < 0.
inline double phi(const LossSpec& loss, double x)
{
    detail::require_smooth(loss);
    if (x <= loss.gamma_lo)
        return 2.0 * loss.loss_minus(-1.0);
    if (x >= loss.gamma_hi)
        return 2.0 * loss.loss_plus(1.0);
    return detail::phi_mid(loss, detail::open_interval(gamma_inverse(loss, x)));
}

/// Root of phi(x) = lam on one branch, with the matching prediction coordinate.
struct PhiRoot
{
    double x = 0.0; ///< may be +-infinity when lam lies below the branch's tail
    double g = 0.0; ///< Gamma^{-1}(x), clamped into the open interval
};

namespace detail {

inline PhiRoot phi_root(const LossSpec& loss, double lam, double branch)
{
    require_smooth(loss);
    const double g0 = open_interval(gamma_inverse(loss, 0.0));
    const double top = phi_mid(loss, g0);
    if (!(lam > 0.0) || lam > top * (1.0 + 1e-12) + 1e-15)
        throw DomainError("phi level " + std::to_string(lam) + " outside (0, phi(0)] = (0, " +
                          std::to_string(top) + "]");
    if (branch >= 0.0) {
        const double g_end = open_interval(1.0);
        if (phi_mid(loss, g_end) > lam)
            return {std::numeric_limits<double>::infinity(), g_end};
        const double g = bisect_increasing([&](double t) { return -phi_mid(loss, t); }, -lam, g0,
                                           g_end, 0.0);
        return {gamma_mid(loss, g), g};
    }
    const double g_end = open_interval(-1.0);
    if (phi_mid(loss, g_end) > lam)
        return {-std::numeric_limits<double>::infinity(), g_end};
    const double g =
        bisect_increasing([&](double t) { return phi_mid(loss, t); }, lam, g_end, g0, 0.0);
    return {gamma_mid(loss, g), g};
}

} // namespace detail

/// x on the requested branch (branch >= 0: x >= 0; branch < 0: x < 0) with
/// phi(x) = lam. Requires 0 < lam <= phi(0).
inline double phi_branch_inverse(const LossSpec& loss, double lam, double branch)
{
    return detail::phi_root(loss, lam, branch).x;
}

/// K(p) = phi(m / p): marginal value of predicting with probability p.
inline double K(const LossSpec& loss, double m, double p)
{
    detail::require_smooth(loss);
    if (!(p > 0.0))
        throw DomainError("K needs a positive prediction probability");
    const double x = m / p;
    if (!std::isfinite(x))
        return detail::phi_mid(loss, detail::open_interval(x > 0 ? 1.0 : -1.0));
    return phi(loss, x);
}

/// p in [0, 1] solving K(m, p) = lam, clamped to 1 when lam >= K(m, 1).
inline double K_inverse(const LossSpec& loss, double m, double lam)
{
    detail::require_smooth(loss);
    if (!(lam > 0.0))
        throw DomainError("K_inverse needs a positive level");
    if (lam >= phi(loss, m))
        return 1.0;
    if (m == 0.0)
        return 0.0;
    const PhiRoot r = detail::phi_root(loss, lam, m);
    if (!std::isfinite(r.x))
        return 0.0;
    return std::min(1.0, std::abs(m) / std::abs(r.x));
}

/// Abstaining well Q(m, lam): m Psi'(phi^{-1}_{sgn m}(lam)) when lam <= K(m, 1),
/// Psi(m) - lam otherwise. Convex in m, concave and nonincreasing in lam.
inline double Q(const LossSpec& loss, double m, double lam)
{
    detail::require_smooth(loss);
    if (!(lam >= 0.0))
        throw DomainError("Q needs a nonnegative level");
    if (lam > phi(loss, m))
        return psi_general(loss, m) - lam;
    if (m == 0.0)
        return 0.0;
    if (lam == 0.0)
        return std::abs(m);
    const PhiRoot r = detail::phi_root(loss, lam, m);
    return m * detail::slope_mid(loss, r.g);
}

/// Q(m, lam) together with dQ/dm, sharing one branch inversion.
struct QValue
{
    double value = 0.0;
    double slope = 0.0;
};

inline QValue Q_and_slope(const LossSpec& loss, double m, double lam)
{
    detail::require_smooth(loss);
    if (!(lam >= 0.0))
        throw DomainError("Q needs a nonnegative level");
    if (lam > phi(loss, m))
        return {psi_general(loss, m) - lam, psi_general_slope(loss, m)};
    if (lam == 0.0)
        return {std::abs(m), m == 0.0 ? 0.0 : sign_of(m)};
    if (m == 0.0) {
        const PhiRoot up = detail::phi_root(loss, lam, 1.0);
        const PhiRoot down = detail::phi_root(loss, lam, -1.0);
        return {0.0, 0.5 * (detail::slope_mid(loss, up.g) + detail::slope_mid(loss, down.g))};
    }
    const double d = detail::slope_mid(loss, detail::phi_root(loss, lam, m).g);
    return {m * d, d};
}

/// dQ/dm: Psi'(x*) at the branch root, Psi'(m) on the no-abstain branch.
/// At m = 0 inside the abstain region the midpoint of the two one-sided
/// slopes is returned.
inline double Q_slope(const LossSpec& loss, double m, double lam)
{
    detail::require_smooth(loss);
    if (!(lam >= 0.0))
        throw DomainError("Q needs a nonnegative level");
    if (lam > phi(loss, m))
        return psi_general_slope(loss, m);
    if (lam == 0.0)
        return m == 0.0 ? 0.0 : sign_of(m);
    if (m == 0.0) {
        const PhiRoot up = detail::phi_root(loss, lam, 1.0);
        const PhiRoot down = detail::phi_root(loss, lam, -1.0);
        return 0.5 * (detail::slope_mid(loss, up.g) + detail::slope_mid(loss, down.g));
    }
    return detail::slope_mid(loss, detail::phi_root(loss, lam, m).g);
}

/// Checks that l+ decreases, l- increases, and the induced well is midpoint
/// convex, on sampled grids. Throws DomainError naming the first violation.
inline void validate_loss(const LossSpec& loss)
{
    constexpr int kGrid = 1000;
    double prev_plus = loss.loss_plus(-1.0 + 1.0 / kGrid);
    double prev_minus = loss.loss_minus(-1.0 + 1.0 / kGrid);
    for (int k = 2; k < 2 * kGrid; ++k) {
        const double g = -1.0 + static_cast<double>(k) / kGrid;
        const double lp = loss.loss_plus(g);
        const double lm = loss.loss_minus(g);
        if (lp > prev_plus + 1e-12)
            throw DomainError("loss '" + loss.name + "': l+ increases near g = " + std::to_string(g));
        if (lm < prev_minus - 1e-12)
            throw DomainError("loss '" + loss.name + "': l- decreases near g = " + std::to_string(g));
        prev_plus = lp;
        prev_minus = lm;
    }
    const double span = 8.0;
    const double h = 2.0 * span / kGrid;
    for (int k = 1; k < kGrid; ++k) {
        const double m = -span + k * h;
        const double mid = psi_general(loss, m);
        const double avg = 0.5 * (psi_general(loss, m - h) + psi_general(loss, m + h));
        if (mid > avg + 1e-9)
            throw DomainError("loss '" + loss.name + "': induced well not convex near m = " +
                              std::to_string(m));
    }
}

} // namespace abstain

#endif // ABSTAIN_LOSSES_HPP
