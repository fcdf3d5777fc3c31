#ifndef ABSTAIN_ORACLE_HPP
#define ABSTAIN_ORACLE_HPP

// Brute-force reference for tiny games (n <= 3): the adversary's polytope is
// enumerated vertex by vertex and the learner's strategy is searched on a grid.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/losses.hpp>
#include <abstain/random.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace abstain {

enum class ConstraintKind
{
    inequality, ///< (1/n) F z >= b
    linf_ball,  ///< |(1/n) F z - b|_inf <= eps
};

struct TinyInstance
{
    EnsembleMatrix F;
    CorrelationVector b;
    ConstraintKind kind = ConstraintKind::inequality;
    double eps = 0.0;
};

struct StrategyGrid
{
    double g_pitch = 0.05;
    double p_pitch = 0.05;

    void validate() const
    {
        if (!(g_pitch > 0.0 && g_pitch <= 0.5) || !(p_pitch > 0.0 && p_pitch <= 0.5))
            throw DomainError("strategy grid pitches must lie in (0, 0.5]");
    }
};

namespace oracle {

inline constexpr std::size_t kMaxExamples = 3;
inline constexpr double kFeasTol = 1e-9;

/// Halfspace a . z <= rhs.
struct Halfspace
{
    std::vector<double> a;
    double rhs = 0.0;
};

inline std::vector<Halfspace> halfspaces(const TinyInstance& inst)
{
    const std::size_t n = inst.F.examples();
    const std::size_t p = inst.F.members();
    require_same_members(inst.F, inst.b);
    std::vector<Halfspace> hs;
    for (std::size_t j = 0; j < n; ++j) {
        Halfspace up{std::vector<double>(n, 0.0), 1.0};
        up.a[j] = 1.0;
        Halfspace down{std::vector<double>(n, 0.0), 1.0};
        down.a[j] = -1.0;
        hs.push_back(up);
        hs.push_back(down);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < p; ++i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j)
            row[j] = inst.F(i, j) * inv_n;
        Halfspace ge{row, -inst.b[i]}; // -(1/n) F_i z <= -b_i
        for (double& v : ge.a)
            v = -v;
        hs.push_back(ge);
        if (inst.kind == ConstraintKind::linf_ball) {
            hs.back().rhs = inst.eps - inst.b[i];
            hs.push_back(Halfspace{row, inst.b[i] + inst.eps});
        }
    }
    return hs;
}

/// Solves the square system by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> A,
                                                       std::vector<double> y)
{
    const std::size_t n = y.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c]))
                piv = r;
        if (std::abs(A[piv][c]) < 1e-12)
            return std::nullopt;
        std::swap(A[piv], A[c]);
        std::swap(y[piv], y[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k)
                A[r][k] -= f * A[c][k];
            y[r] -= f * y[c];
        }
    }
    std::vector<double> z(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = y[r];
        for (std::size_t k = r + 1; k < n; ++k)
            s -= A[r][k] * z[k];
        z[r] = s / A[r][r];
    }
    return z;
}

inline bool feasible(const std::vector<Halfspace>& hs, const std::vector<double>& z)
{
    for (const auto& h : hs) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j)
            s += h.a[j] * z[j];
        if (s > h.rhs + kFeasTol)
            return false;
    }
    return true;
}

} // namespace oracle

/// Vertices of {z in [-1,1]^n : constraints}, from every n-subset of facets.
inline std::vector<std::vector<double>> z_vertices(const TinyInstance& inst)
{
    const std::size_t n = inst.F.examples();
    if (n > oracle::kMaxExamples)
        throw DomainError("oracle supports at most " + std::to_string(oracle::kMaxExamples) +
                          " examples");
    const auto hs = oracle::halfspaces(inst);
    const std::size_t H = hs.size();
    std::vector<std::vector<double>> out;

    std::vector<std::size_t> pick(n);
    for (std::size_t k = 0; k < n; ++k)
        pick[k] = k;
    while (true) {
        std::vector<std::vector<double>> A(n);
        std::vector<double> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            A[k] = hs[pick[k]].a;
            y[k] = hs[pick[k]].rhs;
        }
        if (auto z = oracle::solve_square(A, y); z && oracle::feasible(hs, *z)) {
            for (double& v : *z)
                v = std::clamp(v, -1.0, 1.0);
            const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& w) {
                for (std::size_t j = 0; j < n; ++j)
                    if (std::abs(w[j] - (*z)[j]) > oracle::kFeasTol)
                        return false;
                return true;
            });
            if (!dup)
                out.push_back(std::move(*z));
        }
        // next n-subset in lexicographic order
        std::size_t k = n;
        while (k > 0 && pick[k - 1] == H - n + (k - 1))
            --k;
        if (k == 0)
            break;
        ++pick[k - 1];
        for (std::size_t r = k; r < n; ++r)
            pick[r] = pick[r - 1] + 1;
    }
    if (out.empty())
        throw InfeasibleError("constraint set {z : (1/n) F z >= b} is empty");
    std::sort(out.begin(), out.end());
    return out;
}

/// Loss and abstention accounting of an oracle game.
struct OraclePredict
{
    LossSpec loss = losses::zero_one();
};
struct OracleCost
{
    double c = 0.5;
    LossSpec loss = losses::zero_one();
};
/// 0-1 error with an abstain budget: mean p >= 1 - alpha, abstention free.
struct OracleAlpha
{
    double alpha = 0.0;
};
using OracleRegime = std::variant<OraclePredict, OracleCost, OracleAlpha>;

namespace oracle {

/// Per-example expected loss as an affine function A + B z of the label.
struct Affine
{
    double A = 0.0;
    double B = 0.0;
};

inline Affine example_loss(const LossSpec& loss, double p, double g, double c)
{
    const double lp = loss.loss_plus(g);
    const double lm = loss.loss_minus(g);
    // p * [(1+z)/2 l+(g) + (1-z)/2 l-(g)] + (1-p) c
    return {p * 0.5 * (lp + lm) + (1.0 - p) * c, p * 0.5 * (lp - lm)};
}

inline double max_over(const std::vector<std::vector<double>>& verts,
                       const std::vector<Affine>& terms)
{
    const double inv_n = 1.0 / static_cast<double>(terms.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& z : verts) {
        double s = 0.0;
        for (std::size_t j = 0; j < terms.size(); ++j)
            s += terms[j].A + terms[j].B * z[j];
        best = std::max(best, s * inv_n);
    }
    return best;
}

struct Option
{
    double p = 1.0;
    double g = 0.0;
    Affine f;
};

inline std::vector<double> grid_points(double lo, double hi, double pitch)
{
    const auto steps = static_cast<long>(std::llround((hi - lo) / pitch));
    std::vector<double> v;
    for (long k = 0; k <= steps; ++k)
        v.push_back(std::min(hi, lo + static_cast<double>(k) * pitch));
    if (v.back() < hi)
        v.push_back(hi);
    return v;
}

inline std::vector<Option> options(const OracleRegime& regime, const StrategyGrid& grid)
{
    const LossSpec* loss = nullptr;
    const LossSpec zero_one = losses::zero_one();
    double c = 0.0;
    bool abstain = true;
    if (const auto* r = std::get_if<OraclePredict>(&regime)) {
        loss = &r->loss;
        abstain = false;
    } else if (const auto* r = std::get_if<OracleCost>(&regime)) {
        loss = &r->loss;
        c = r->c;
    } else {
        loss = &zero_one;
    }
    // predictions at +-1 are excluded for losses that are infinite there
    const bool open = !std::isfinite(loss->gamma_lo) || !std::isfinite(loss->gamma_hi);
    std::vector<double> gs = grid_points(-1.0, 1.0, grid.g_pitch);
    if (open)
        gs = std::vector<double>(gs.begin() + 1, gs.end() - 1);
    const std::vector<double> ps = abstain ? grid_points(0.0, 1.0, grid.p_pitch)
                                           : std::vector<double>{1.0};
    std::vector<Option> out;
    for (double p : ps) {
        if (p == 0.0) {
            out.push_back({0.0, 1.0, {c, 0.0}});
            continue;
        }
        for (double g : gs)
            out.push_back({p, g, example_loss(*loss, p, g, c)});
    }
    return out;
}

} // namespace oracle

/// max over feasible z of the expected loss of strategy (p, g). `c` is the
/// abstention charge (0 for the abstain-budget game).
inline double worst_case_loss(const TinyInstance& inst, std::span<const double> p,
                              std::span<const double> g, const LossSpec& loss, double c)
{
    const std::size_t n = inst.F.examples();
    if (p.size() != n || g.size() != n)
        throw DimensionError("strategy length differs from the number of examples");
    std::vector<oracle::Affine> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(p[j] >= 0.0 && p[j] <= 1.0) || !(g[j] >= -1.0 && g[j] <= 1.0))
            throw DomainError("strategy outside [0,1] x [-1,1]");
        terms[j] = p[j] == 0.0 ? oracle::Affine{c, 0.0} : oracle::example_loss(loss, p[j], g[j], c);
    }
    return oracle::max_over(z_vertices(inst), terms);
}

/// Same, for the regime's loss and charge.
inline double worst_case_loss(const TinyInstance& inst, std::span<const double> p,
                              std::span<const double> g, const OracleRegime& regime)
{
    if (const auto* r = std::get_if<OraclePredict>(&regime))
        return worst_case_loss(inst, p, g, r->loss, 0.0);
    if (const auto* r = std::get_if<OracleCost>(&regime))
        return worst_case_loss(inst, p, g, r->loss, r->c);
    return worst_case_loss(inst, p, g, losses::zero_one(), 0.0);
}

struct OracleResult
{
    double value = 0.0;
    std::vector<double> p;
    std::vector<double> g;
};

/// min over gridded strategies of the worst-case loss. The abstain-budget
/// regime keeps only strategies with mean p >= 1 - alpha.
inline OracleResult game_value(const TinyInstance& inst, const OracleRegime& regime,
                               const StrategyGrid& grid = {})
{
    grid.validate();
    const std::size_t n = inst.F.examples();
    const auto verts = z_vertices(inst);
    const auto opts = oracle::options(regime, grid);
    const std::size_t K = opts.size();
    double total = 1.0;
    for (std::size_t j = 0; j < n; ++j)
        total *= static_cast<double>(K);
    if (total > 2e8)
        throw DomainError("strategy grid too large for the oracle; use coarser pitches");

    const auto* alpha = std::get_if<OracleAlpha>(&regime);
    const double need = alpha ? (1.0 - alpha->alpha) * static_cast<double>(n) - 1e-12 : 0.0;

    OracleResult best;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(n, 0);
    std::vector<oracle::Affine> terms(n);
    while (true) {
        bool ok = true;
        if (alpha) {
            double sp = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                sp += opts[idx[j]].p;
            ok = sp >= need;
        }
        if (ok) {
            for (std::size_t j = 0; j < n; ++j)
                terms[j] = opts[idx[j]].f;
            const double v = oracle::max_over(verts, terms);
            if (v < best.value) {
                best.value = v;
                best.p.resize(n);
                best.g.resize(n);
                for (std::size_t j = 0; j < n; ++j) {
                    best.p[j] = opts[idx[j]].p;
                    best.g[j] = opts[idx[j]].g;
                }
            }
        }
        std::size_t j = 0;
        while (j < n && ++idx[j] == K)
            idx[j++] = 0;
        if (j == n)
            break;
    }
    return best;
}

/// max over sampled feasible z (vertices and seeded convex combinations) of
/// the best gridded response. Never exceeds game_value on the same grid.
inline double max_min(const TinyInstance& inst, const OracleRegime& regime,
                      const StrategyGrid& grid = {}, std::size_t samples = 64,
                      std::uint64_t seed = 1)
{
    grid.validate();
    const std::size_t n = inst.F.examples();
    const auto verts = z_vertices(inst);
    const auto opts = oracle::options(regime, grid);
    std::vector<std::vector<double>> zs = verts;
    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> w(verts.size());
        double tot = 0.0;
        for (double& x : w) {
            x = rng.uniform();
            tot += x;
        }
        std::vector<double> z(n, 0.0);
        for (std::size_t v = 0; v < verts.size(); ++v)
            for (std::size_t j = 0; j < n; ++j)
                z[j] += w[v] / tot * verts[v][j];
        zs.push_back(std::move(z));
    }
    const auto* alpha = std::get_if<OracleAlpha>(&regime);
    const double need = alpha ? (1.0 - alpha->alpha) * static_cast<double>(n) - 1e-12 : 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& z : zs) {
        double inner = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            double sp = 0.0, v = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sp += opts[idx[j]].p;
                v += opts[idx[j]].f.A + opts[idx[j]].f.B * z[j];
            }
            if (!alpha || sp >= need)
                inner = std::min(inner, v * inv_n);
            std::size_t j = 0;
            while (j < n && ++idx[j] == opts.size())
                idx[j++] = 0;
            if (j == n)
                break;
        }
        best = std::max(best, inner);
    }
    return best;
}

/// Random feasible instance: z is drawn first and b is set at or below
/// (1/n) F z (inequality), or within eps of it (L-infinity ball).
inline TinyInstance random_tiny_instance(Rng& rng, std::size_t n, std::size_t p,
                                         ConstraintKind kind = ConstraintKind::inequality,
                                         double eps = 0.0, double max_slack = 0.2)
{
    if (n < 1 || n > oracle::kMaxExamples || p < 1)
        throw DomainError("tiny instances need 1 <= n <= 3 and p >= 1");
    std::vector<std::vector<double>> rows(p, std::vector<double>(n));
    for (auto& r : rows)
        for (double& v : r)
            v = rng.uniform() < 0.5 ? rng.sign() : rng.uniform(-1.0, 1.0);
    std::vector<double> z(n);
    for (double& v : z)
        v = rng.uniform() < 0.5 ? rng.sign() : rng.uniform(-1.0, 1.0);
    std::vector<double> b(p);
    for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += rows[i][j] * z[j];
        s /= static_cast<double>(n);
        b[i] = kind == ConstraintKind::inequality ? s - rng.uniform(0.0, max_slack)
                                                  : s + rng.uniform(-eps, eps);
    }
    return {EnsembleMatrix::from_rows(rows), CorrelationVector(b), kind, eps};
}

} // namespace abstain

#endif // ABSTAIN_ORACLE_HPP
