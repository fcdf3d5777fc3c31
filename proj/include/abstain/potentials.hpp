#ifndef ABSTAIN_POTENTIALS_HPP
#define ABSTAIN_POTENTIALS_HPP

// Potential wells of the 0-1 loss and their subgradients.

#include <abstain/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace abstain {

inline void require_abstain_cost(double c)
{
    if (!(c > 0.0 && c <= 0.5))
        throw DomainError("abstain cost " + std::to_string(c) +
                          " outside (0, 0.5]; costs above 1/2 never abstain, use the prediction well");
}

/// Prediction well max(|m|, 1).
inline double psi_pred(double m) noexcept { return std::max(std::abs(m), 1.0); }

/// Subgradient of psi_pred, using the same kink selection as
/// psi_abstain_subgrad at c = 1/2.
inline double psi_pred_subgrad(double m) noexcept
{
    const double a = std::abs(m);
    if (a < 1.0)
        return 0.0;
    const double s = m < 0.0 ? -1.0 : 1.0;
    return a == 1.0 ? 0.5 * s : s;
}

/// Abstaining well: |m| + 2c(1 - |m|) inside the unit margin, |m| outside.
/// Written as 2c + |m|(1 - 2c) so that c = 1/2 reproduces psi_pred exactly.
inline double psi_abstain(double m, double c)
{
    require_abstain_cost(c);
    const double a = std::abs(m);
    if (a > 1.0)
        return a;
    return 2.0 * c + a * (1.0 - 2.0 * c);
}

/// Subgradient selection: 0 at m = 0, sign(m)(1 - 2c) inside the unit
/// margin, sign(m)(1 - c) at |m| = 1 (midpoint of [1 - 2c, 1]), sign(m) outside.
inline double psi_abstain_subgrad(double m, double c)
{
    require_abstain_cost(c);
    const double a = std::abs(m);
    if (a == 0.0)
        return 0.0;
    const double s = m < 0.0 ? -1.0 : 1.0;
    if (a < 1.0)
        return s * (1.0 - 2.0 * c);
    if (a == 1.0)
        return s * (1.0 - c);
    return s;
}

/// [1 - |m|]_+ : the lambda-derivative of psi_abstain(m, lambda/2), and the
/// abstain probability 1 - min(1, |m|) of the induced strategy.
inline double dpsi_dlambda(double m) noexcept { return std::max(0.0, 1.0 - std::abs(m)); }

} // namespace abstain

#endif // ABSTAIN_POTENTIALS_HPP
