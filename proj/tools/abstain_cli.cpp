// abstain: estimate bounds, train, predict, trace the frontier and verify
// the solver against the brute-force oracle.

#include <abstain/abstain.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace abstain;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kVerify = 3;

struct UsageError : Error
{
    using Error::Error;
};

std::string num(double v) { return io::format_double(v); }

void emit(const std::optional<std::string>& out, const std::string& content)
{
    if (out)
        io::atomic_write(*out, content);
    else
        std::cout << content;
}

struct SolverFlags
{
    std::size_t max_iters = frontier_config().max_iters;
    double step0 = frontier_config().step0;
    double tol = frontier_config().tol;
    std::size_t window = frontier_config().window;

    void add(CLI::App* app)
    {
        app->add_option("--max-iters", max_iters, "Solver iteration cap")->capture_default_str();
        app->add_option("--step0", step0, "Initial step length")->capture_default_str();
        app->add_option("--tol", tol, "Relative stall tolerance")->capture_default_str();
        app->add_option("--window", window, "Stall window in iterations")->capture_default_str();
    }

    [[nodiscard]] SolveConfig config() const
    {
        SolveConfig c;
        c.max_iters = max_iters;
        c.step0 = step0;
        c.tol = tol;
        c.window = window;
        c.validate();
        return c;
    }
};

void require_same_names(const std::vector<std::string>& a, const std::vector<std::string>& b,
                        const std::string& what)
{
    if (a.size() != b.size())
        throw DimensionError(what + ": " + std::to_string(a.size()) + " members vs " +
                             std::to_string(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            throw DataError(what + ": member " + std::to_string(i + 1) + " is '" + a[i] +
                            "' in one file and '" + b[i] + "' in the other");
}

/// Participation from an explicit file, or from the zero entries of F.
ParticipationMatrix participation(const EnsembleMatrix& F, const std::string& path)
{
    if (path.empty())
        return ParticipationMatrix::from_zeros(F);
    const auto f = io::read_predictions(path, false);
    if (f.F.members() != F.members() || f.F.examples() != F.examples())
        throw DimensionError("participation file '" + path +
                             "' does not have the shape of the predictions file");
    std::vector<double> data;
    data.reserve(F.members() * F.examples());
    for (std::size_t j = 0; j < F.examples(); ++j)
        for (std::size_t i = 0; i < F.members(); ++i)
            data.push_back(f.F(i, j));
    return ParticipationMatrix(F.members(), F.examples(), std::move(data));
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs
{
    std::string labeled;
    std::optional<std::string> out;
    double delta = 0.05;
    bool no_correction = false;
};

int run_estimate(const EstimateArgs& a)
{
    const auto f = io::read_predictions(a.labeled, true);
    const LabeledSet data(f.F, f.labels);
    const CorrelationVector b = a.no_correction ? plugin_b(data) : corrected_b(data, a.delta);
    for (std::size_t i : nonpositive_members(b))
        std::cerr << "note: member '" << f.members[i] << "' has bound " << num(b[i])
                  << " <= 0 (kept)\n";
    emit(a.out, io::bounds_csv(f.members, b));
    return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs
{
    std::string unlabeled, bounds;
    std::optional<std::string> out;
    std::optional<double> cost, abstain_rate, lambda;
    bool predict_only = false;
    std::string loss = "zero_one";
    std::optional<double> l1;
    std::string l1_grid;
    std::string labeled;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    bool specialists = false;
    std::string specialists_path;
    SolverFlags solver;
};

std::vector<double> parse_grid(const std::string& s)
{
    std::vector<double> g;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            g.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--l1-grid: '" + item + "' is not a number");
        }
    }
    if (g.empty())
        throw UsageError("--l1-grid is empty");
    return g;
}

int run_train(const TrainArgs& a)
{
    const int selectors = (a.cost ? 1 : 0) + (a.abstain_rate ? 1 : 0) + (a.lambda ? 1 : 0) +
                          (a.predict_only ? 1 : 0);
    if (selectors != 1)
        throw UsageError("choose exactly one of --cost, --abstain-rate, --lambda, --predict-only");
    if (a.l1 && !a.l1_grid.empty())
        throw UsageError("--l1 and --l1-grid are mutually exclusive");
    if (!a.l1_grid.empty() && a.labeled.empty())
        throw UsageError("--l1-grid needs --labeled for cross-validation");
    const LossSpec loss = [&] {
        try {
            return losses::by_name(a.loss);
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }();
    const bool zero_one = is_zero_one(loss);
    if ((a.abstain_rate || a.lambda) && !zero_one)
        throw UsageError("--abstain-rate and --lambda are defined for the 0-1 loss only");
    if ((a.abstain_rate || a.lambda) && (a.l1 || !a.l1_grid.empty()))
        throw UsageError("--l1 applies to --cost and --predict-only");
    const SolveConfig cfg = a.solver.config();

    const auto pf = io::read_predictions(a.unlabeled, false);
    const auto bf = io::read_bounds(a.bounds);
    require_same_names(pf.members, bf.members, "predictions vs bounds");
    EnsembleMatrix F = pf.F;
    CorrelationVector b = bf.b;
    if (a.specialists) {
        F = reweight(F, participation(pf.F, a.specialists_path));
        std::string warn;
        b = effective_correlation_note(b, F.members(), &warn);
        if (!warn.empty())
            std::cerr << "warning: " << warn << "\n";
    }
    bool all_ge_one = true;
    for (double v : b.values())
        all_ge_one = all_ge_one && v >= 1.0;
    if (all_ge_one)
        throw DataError("every correlation bound is >= 1: the bounds look infeasible");
    if (const auto rep = validate_instance(F, b); !rep)
        throw DataError(rep.diagnostic);

    io::Model model;
    model.loss = a.loss;
    model.reweighted = a.specialists;
    model.members = pf.members;
    std::ostringstream report;

    if (a.cost || a.predict_only) {
        Regime regime = PredictRegime{loss};
        if (a.cost) {
            if (zero_one) {
                if (!(*a.cost > 0.0 && *a.cost <= 0.5))
                    throw UsageError("--cost must lie in (0, 0.5] for the 0-1 loss");
                regime = CostRegime{*a.cost};
            } else {
                if (!(*a.cost > 0.0))
                    throw UsageError("--cost must be positive");
                regime = GeneralCostRegime{loss, *a.cost};
            }
        }
        std::optional<double> eps = a.l1;
        if (!a.l1_grid.empty()) {
            const auto lf = io::read_predictions(a.labeled, true);
            require_same_names(pf.members, lf.members, "predictions vs labeled");
            const auto sel = select_epsilon(LabeledSet(lf.F, lf.labels), parse_grid(a.l1_grid),
                                            a.folds, a.seed, regime, cfg);
            eps = sel.epsilon;
            report << "epsilon=" << num(*eps) << "\n";
        }
        const ObjectiveSpec spec(F, b, regime, eps);
        const SolveResult r = solve(spec, cfg);
        model.regime = a.cost ? "cost" : "predict";
        model.c = a.cost;
        model.epsilon = eps;
        model.sigma.assign(r.sigma_star.values().begin(), r.sigma_star.values().end());
        report << "V=" << num(r.certified_value) << "\n";
        report << "iterations=" << r.iterations << "\n";
        report << "converged=" << (r.converged ? 1 : 0) << "\n";
    } else if (a.lambda) {
        if (!(*a.lambda > 0.0 && *a.lambda <= 1.0))
            throw UsageError("--lambda must lie in (0, 1]");
        const WValue wv = w(F, b, *a.lambda, cfg);
        model.regime = "lambda";
        model.lambda = *a.lambda;
        model.sigma.assign(wv.sigma.values().begin(), wv.sigma.values().end());
        report << "V=" << num(wv.certified) << "\n";
        report << "w=" << num(wv.value) << "\n";
    } else {
        if (!(*a.abstain_rate > 0.0 && *a.abstain_rate < 1.0))
            throw UsageError("--abstain-rate must lie in (0, 1)");
        const FrontierPoint pt = lambda_for_alpha(F, b, *a.abstain_rate, cfg);
        model.regime = "abstain_rate";
        model.alpha = *a.abstain_rate;
        model.lambda = pt.lambda;
        model.sigma.assign(pt.sigma.values().begin(), pt.sigma.values().end());
        report << "V=" << num(0.5 * error_slack(F, b, pt.sigma.values())) << "\n";
        report << "frontier_V=" << num(pt.V) << "\n";
        report << "lambda=" << num(pt.lambda) << "\n";
        report << "rate_interval=[" << num(pt.rate_lo) << "," << num(pt.rate_hi) << "]\n";
    }

    const DecisionBatch batch = decide_batch(F, model.sigma, model.decision_regime());
    report << "abstain_rate=" << num(batch.realized_abstain_rate) << "\n";
    if (a.out)
        io::atomic_write(*a.out, io::model_text(model));
    else
        report << io::model_text(model);
    std::cout << "regime=" << model.regime << "\n" << report.str();
    return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs
{
    std::string model, unlabeled;
    std::optional<std::string> out;
    bool specialists = false;
    std::string specialists_path;
};

int run_predict(const PredictArgs& a)
{
    const io::Model m = io::read_model(a.model);
    const auto pf = io::read_predictions(a.unlabeled, false);
    require_same_names(m.members, pf.members, "model vs predictions");
    if (m.reweighted && !a.specialists)
        throw DataError("model '" + a.model +
                        "' was trained on reweighted specialist predictions; pass --specialists");
    const EnsembleMatrix F =
        a.specialists ? reweight(pf.F, participation(pf.F, a.specialists_path)) : pf.F;
    const DecisionBatch batch = decide_batch(F, m.sigma, m.decision_regime());
    emit(a.out, io::decisions_csv(pf.example_ids, batch.decisions));
    if (a.out)
        std::cout << "abstain_rate=" << num(batch.realized_abstain_rate) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- frontier

struct FrontierArgs
{
    std::string unlabeled, bounds;
    std::optional<std::string> out;
    std::size_t grid = 20;
    std::optional<std::string> loss;
    SolverFlags solver;
};

int run_frontier(const FrontierArgs& a)
{
    if (a.loss)
        throw UsageError("the frontier is defined for the 0-1 loss only; drop --loss");
    if (a.grid < 2)
        throw UsageError("--grid must be at least 2");
    const SolveConfig cfg = a.solver.config();
    const auto pf = io::read_predictions(a.unlabeled, false);
    const auto bf = io::read_bounds(a.bounds);
    require_same_names(pf.members, bf.members, "predictions vs bounds");
    if (const auto rep = validate_instance(pf.F, bf.b); !rep)
        throw DataError(rep.diagnostic);
    const FrontierCurve curve = trace(pf.F, bf.b, a.grid, cfg);
    emit(a.out, io::frontier_csv(curve));
    if (a.out) {
        std::cout << "points=" << curve.points.size() << "\n";
        if (const auto z = zero_error_alpha(curve))
            std::cout << "zero_error_alpha=" << num(*z) << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs
{
    std::uint64_t seed = 1;
    std::size_t trials = 20;
};

int run_verify(const VerifyArgs& a)
{
    const double pitch = StrategyGrid{}.g_pitch;
    const double tol = pitch + 5e-3;
    const SolveConfig cfg = frontier_config();
    Rng rng(a.seed);
    double gap_pred = 0.0, gap_cost = 0.0, gap_alpha = 0.0, weak = -1.0;
    bool fail = false;
    for (std::size_t t = 0; t < a.trials; ++t) {
        const std::size_t n = 1 + rng.index(2), p = 1 + rng.index(2);
        const TinyInstance inst = random_tiny_instance(rng, n, p);

        const ObjectiveSpec pred(inst.F, inst.b, PredictRegime{});
        const SolveResult rp = minimize_orthant(pred, cfg);
        gap_pred = std::max(gap_pred,
                            std::abs(rp.certified_value - game_value(inst, OraclePredict{}).value));

        for (double c : {0.1, 0.25, 0.4}) {
            const ObjectiveSpec spec(inst.F, inst.b, CostRegime{c});
            const SolveResult r = minimize_orthant(spec, cfg);
            gap_cost = std::max(gap_cost,
                                std::abs(r.certified_value - game_value(inst, OracleCost{c}).value));
            // weak duality at the returned sigma
            const DecisionBatch d = decide_batch(inst.F, r.sigma_star, CostRegime{c});
            std::vector<double> pp, gg;
            for (const auto& x : d.decisions) {
                pp.push_back(x.predict_prob);
                gg.push_back(x.prediction);
            }
            weak = std::max(weak, worst_case_loss(inst, pp, gg, OracleCost{c}) - r.certified_value);
        }
        for (double alpha : {0.25, 0.5}) {
            const FrontierPoint pt = lambda_for_alpha(inst.F, inst.b, alpha, cfg);
            gap_alpha =
                std::max(gap_alpha, std::abs(pt.V - game_value(inst, OracleAlpha{alpha}).value));
        }
    }
    fail = gap_pred > tol || gap_cost > tol || gap_alpha > tol || weak > 1e-9;
    std::cout << a.trials << " instances x 3 regimes (seed " << a.seed << ")\n";
    if (a.trials > 0) {
        std::cout << "predict max_gap=" << num(gap_pred) << "\n";
        std::cout << "cost max_gap=" << num(gap_cost) << "\n";
        std::cout << "abstain_rate max_gap=" << num(gap_alpha) << "\n";
        std::cout << "weak_duality max_excess=" << num(weak) << "\n";
    }
    std::cout << "tolerance=" << num(tol) << "\n";
    std::cout << (fail ? "FAIL" : "OK") << "\n";
    return fail ? kVerify : kOk;
}

} // namespace

int main(int argc, char** argv)
{
    if (const char* t = std::getenv("THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(t, &end, 10);
        if (end == t || *end != '\0' || v < 1) {
            std::cerr << "error: THREADS must be a positive integer\n";
            return kUsage;
        }
        set_threads(static_cast<std::size_t>(v));
    }

    CLI::App app{"Abstaining ensemble aggregation from unlabeled data and correlation bounds"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* ce = app.add_subcommand("estimate", "Correlation bounds from a labeled CSV");
    ce->add_option("labeled", est.labeled, "Labeled predictions CSV")->required();
    ce->add_option("-o,--out", est.out, "Output bounds CSV (stdout if omitted)");
    ce->add_option("--delta", est.delta, "Failure probability of the bound")->capture_default_str();
    ce->add_flag("--no-correction", est.no_correction, "Write the plug-in estimates");

    TrainArgs tr;
    auto* ct = app.add_subcommand("train", "Learn weights for one regime");
    ct->add_option("unlabeled", tr.unlabeled, "Unlabeled predictions CSV")->required();
    ct->add_option("bounds", tr.bounds, "Bounds CSV (member,bound)")->required();
    ct->add_option("-o,--out", tr.out, "Output model file (stdout if omitted)");
    ct->add_option("--cost", tr.cost, "Abstain at flat cost c");
    ct->add_option("--abstain-rate", tr.abstain_rate, "Abstain on at most this fraction");
    ct->add_option("--lambda", tr.lambda, "Multiplier of the abstain rate (c = lambda / 2)");
    ct->add_flag("--predict-only", tr.predict_only, "Never abstain");
    ct->add_option("--loss", tr.loss, "zero_one, log_loss, asymmetric_cost:<a>,<b>, soft_zero_one:<tau>")
        ->capture_default_str();
    ct->add_option("--l1", tr.l1, "L-infinity radius of the bounds (L1 penalty)");
    ct->add_option("--l1-grid", tr.l1_grid, "Comma-separated radii chosen by cross-validation");
    ct->add_option("--labeled", tr.labeled, "Labeled CSV for --l1-grid");
    ct->add_option("--folds", tr.folds, "Cross-validation folds")->capture_default_str();
    ct->add_option("--seed", tr.seed, "Fold assignment seed")->capture_default_str();
    ct->add_option("--specialists", tr.specialists_path,
                   "Reweight specialists (participation CSV, or zeros of the predictions)")
        ->expected(0, 1);
    tr.solver.add(ct);

    PredictArgs pr;
    auto* cp = app.add_subcommand("predict", "Apply a model to unlabeled predictions");
    cp->add_option("model", pr.model, "Model file")->required();
    cp->add_option("unlabeled", pr.unlabeled, "Unlabeled predictions CSV")->required();
    cp->add_option("-o,--out", pr.out, "Output decisions CSV (stdout if omitted)");
    cp->add_option("--specialists", pr.specialists_path, "Reweight specialists as in training")
        ->expected(0, 1);

    FrontierArgs fr;
    auto* cf = app.add_subcommand("frontier", "Trace the error/abstain-rate frontier");
    cf->add_option("unlabeled", fr.unlabeled, "Unlabeled predictions CSV")->required();
    cf->add_option("bounds", fr.bounds, "Bounds CSV (member,bound)")->required();
    cf->add_option("-o,--out", fr.out, "Output frontier CSV (stdout if omitted)");
    cf->add_option("--grid", fr.grid, "Linear multiplier grid size")->capture_default_str();
    cf->add_option("--loss", fr.loss, "Rejected: the frontier is 0-1 only");
    fr.solver.add(cf);

    VerifyArgs ve;
    auto* cv = app.add_subcommand("verify", "Check the solver against the brute-force oracle");
    cv->add_option("--seed", ve.seed, "Instance seed")->capture_default_str();
    cv->add_option("--trials", ve.trials, "Random instances")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*ce)
            return run_estimate(est);
        if (*ct) {
            tr.specialists = ct->count("--specialists") > 0;
            return run_train(tr);
        }
        if (*cp) {
            pr.specialists = cp->count("--specialists") > 0;
            return run_predict(pr);
        }
        if (*cf)
            return run_frontier(fr);
        return run_verify(ve);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}
