#ifndef ABSTAIN_IO_HPP
#define ABSTAIN_IO_HPP

// File formats: prediction / labeled / bound / decision / frontier CSVs and
// the key=value model file. Numbers are written with 17 significant digits
// so that every double survives a round trip. Writes are atomic.

#include <abstain/core_data.hpp>
#include <abstain/error.hpp>
#include <abstain/frontier.hpp>
#include <abstain/losses.hpp>
#include <abstain/objective.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace abstain::io {

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void atomic_write(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot replace '" + path + "': " + ec.message());
    }
}

struct CsvTable
{
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line; ///< 1-based source line of each row
};

inline std::vector<std::string> split_csv_line(const std::string& s, const std::string& path,
                                               std::size_t line_no)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == '"')
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": quoted fields are not supported");
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    CsvTable t;
    t.path = path;
    std::string s;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, s)) {
        ++line_no;
        if (!s.empty() && s.back() == '\r')
            s.pop_back();
        if (line_no == 1 && s.size() >= 3 && s.compare(0, 3, "\xEF\xBB\xBF") == 0)
            s.erase(0, 3);
        if (s.empty())
            continue;
        auto fields = split_csv_line(s, path, line_no);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " columns, found " +
                            std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line.push_back(line_no);
    }
    if (!have_header)
        throw DataError("'" + path + "' is empty");
    return t;
}

inline double parse_double(const std::string& field, const std::string& path, std::size_t line,
                           std::size_t column)
{
    const char* b = field.data();
    const char* e = b + field.size();
    while (b < e && (*b == ' ' || *b == '\t'))
        ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t'))
        --e;
    if (b < e && *b == '+')
        ++b;
    double v = 0.0;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || b == e || !std::isfinite(v))
        throw DataError(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
                        ": '" + field + "' is not a finite number");
    return v;
}

/// Examples-as-rows prediction file, optionally with a trailing label column.
struct PredictionFile
{
    std::vector<std::string> example_ids;
    std::vector<std::string> members;
    EnsembleMatrix F;
    std::vector<double> labels; ///< empty unless labeled
};

inline PredictionFile read_predictions(const std::string& path, bool labeled)
{
    const CsvTable t = read_csv(path);
    const std::size_t extra = labeled ? 2 : 1;
    if (t.header.size() < extra + 1 || t.header.front() != "example_id")
        throw DataError(path + ":1: header must be 'example_id,<member names...>" +
                        std::string(labeled ? ",label'" : "'"));
    if (labeled && t.header.back() != "label")
        throw DataError(path + ":1: last column of a labeled file must be 'label'");
    if (t.rows.empty())
        throw DataError("'" + path + "' has a header but no examples");
    PredictionFile f;
    f.members.assign(t.header.begin() + 1, t.header.end() - (labeled ? 1 : 0));
    const std::size_t p = f.members.size();
    const std::size_t n = t.rows.size();
    std::vector<double> data(p * n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& r = t.rows[j];
        f.example_ids.push_back(r[0]);
        for (std::size_t i = 0; i < p; ++i) {
            const double v = parse_double(r[i + 1], path, t.line[j], i + 2);
            if (v < -1.0 || v > 1.0)
                throw DataError(path + ":" + std::to_string(t.line[j]) + ":" +
                                std::to_string(i + 2) + ": prediction " + r[i + 1] +
                                " outside [-1, 1]");
            data[j * p + i] = v;
        }
        if (labeled) {
            const double y = parse_double(r.back(), path, t.line[j], r.size());
            if (y != 1.0 && y != -1.0)
                throw DataError(path + ":" + std::to_string(t.line[j]) + ":" +
                                std::to_string(r.size()) + ": label " + r.back() +
                                " is not -1 or +1");
            f.labels.push_back(y);
        }
    }
    f.F = EnsembleMatrix(p, n, std::move(data));
    return f;
}

inline std::string predictions_csv(const std::vector<std::string>& ids,
                                   const std::vector<std::string>& members,
                                   const EnsembleMatrix& F,
                                   const std::vector<double>* labels = nullptr)
{
    std::string s = "example_id";
    for (const auto& m : members)
        s += "," + m;
    if (labels)
        s += ",label";
    s += "\n";
    for (std::size_t j = 0; j < F.examples(); ++j) {
        s += ids[j];
        for (std::size_t i = 0; i < F.members(); ++i)
            s += "," + format_double(F(i, j));
        if (labels)
            s += "," + format_double((*labels)[j]);
        s += "\n";
    }
    return s;
}

inline std::vector<std::string> default_ids(std::size_t n)
{
    std::vector<std::string> ids(n);
    for (std::size_t j = 0; j < n; ++j)
        ids[j] = "x" + std::to_string(j + 1);
    return ids;
}

struct BoundsFile
{
    std::vector<std::string> members;
    CorrelationVector b;
};

inline BoundsFile read_bounds(const std::string& path)
{
    const CsvTable t = read_csv(path);
    if (t.header.size() != 2 || t.header[0] != "member" || t.header[1] != "bound")
        throw DataError(path + ":1: header must be 'member,bound'");
    if (t.rows.empty())
        throw DataError("'" + path + "' lists no bounds");
    BoundsFile f;
    std::vector<double> b;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        f.members.push_back(t.rows[k][0]);
        b.push_back(parse_double(t.rows[k][1], path, t.line[k], 2));
    }
    f.b = CorrelationVector(b);
    return f;
}

inline std::string bounds_csv(const std::vector<std::string>& members, const CorrelationVector& b)
{
    std::string s = "member,bound\n";
    for (std::size_t i = 0; i < b.size(); ++i)
        s += members[i] + "," + format_double(b[i]) + "\n";
    return s;
}

inline std::string decisions_csv(const std::vector<std::string>& ids,
                                 const std::vector<Decision>& d)
{
    std::string s = "example_id,score,predict_prob,prediction\n";
    for (std::size_t j = 0; j < d.size(); ++j)
        s += ids[j] + "," + format_double(d[j].score) + "," + format_double(d[j].predict_prob) +
             "," + format_double(d[j].prediction) + "\n";
    return s;
}

inline std::string frontier_csv(const FrontierCurve& c)
{
    std::string s = "alpha,lambda,V,certified\n";
    for (const auto& pt : c.points)
        s += format_double(pt.alpha) + "," + format_double(pt.lambda) + "," + format_double(pt.V) +
             "," + format_double(pt.certified) + "\n";
    return s;
}

/// A trained model: weights plus everything needed to reproduce decisions.
struct Model
{
    int version = 1;
    std::string loss = "zero_one";
    std::string regime = "predict"; ///< predict | cost | abstain_rate | lambda
    std::optional<double> c;
    std::optional<double> lambda;
    std::optional<double> alpha;
    std::optional<double> epsilon;
    bool reweighted = false;
    std::vector<std::string> members;
    std::vector<double> sigma;

    /// The decision rule the model's strategy follows.
    [[nodiscard]] Regime decision_regime() const
    {
        LossSpec l = losses::by_name(loss);
        if (regime == "predict")
            return PredictRegime{l};
        if (regime == "cost") {
            if (is_zero_one(l))
                return CostRegime{*c};
            return GeneralCostRegime{l, *c};
        }
        // abstain-rate and multiplier models use the 0-1 abstaining rule
        return CostRegime{0.5};
    }
};

inline std::string model_text(const Model& m)
{
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : "none"; };
    std::string s;
    s += "version=" + std::to_string(m.version) + "\n";
    s += "loss=" + m.loss + "\n";
    s += "regime=" + m.regime + "\n";
    s += "c=" + opt(m.c) + "\n";
    s += "lambda=" + opt(m.lambda) + "\n";
    s += "alpha=" + opt(m.alpha) + "\n";
    s += "epsilon=" + opt(m.epsilon) + "\n";
    s += std::string("reweighted=") + (m.reweighted ? "1" : "0") + "\n";
    for (std::size_t i = 0; i < m.sigma.size(); ++i)
        s += "sigma," + m.members[i] + "," + format_double(m.sigma[i]) + "\n";
    return s;
}

inline Model read_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open model '" + path + "'");
    Model m;
    bool seen_version = false;
    std::string s;
    std::size_t line = 0;
    auto where = [&] { return path + ":" + std::to_string(line) + ": "; };
    auto opt = [&](const std::string& v) -> std::optional<double> {
        if (v == "none")
            return std::nullopt;
        return parse_double(v, path, line, 1);
    };
    while (std::getline(in, s)) {
        ++line;
        if (!s.empty() && s.back() == '\r')
            s.pop_back();
        if (s.empty())
            continue;
        if (s.rfind("sigma,", 0) == 0) {
            const auto comma = s.rfind(',');
            if (comma <= 6)
                throw DataError(where() + "expected 'sigma,<member>,<value>'");
            m.members.push_back(s.substr(6, comma - 6));
            m.sigma.push_back(parse_double(s.substr(comma + 1), path, line, 3));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw DataError(where() + "expected key=value");
        const std::string key = s.substr(0, eq), val = s.substr(eq + 1);
        if (key == "version") {
            m.version = static_cast<int>(parse_double(val, path, line, 1));
            seen_version = true;
        } else if (key == "loss")
            m.loss = val;
        else if (key == "regime")
            m.regime = val;
        else if (key == "c")
            m.c = opt(val);
        else if (key == "lambda")
            m.lambda = opt(val);
        else if (key == "alpha")
            m.alpha = opt(val);
        else if (key == "epsilon")
            m.epsilon = opt(val);
        else if (key == "reweighted")
            m.reweighted = val == "1";
        else
            throw DataError(where() + "unknown key '" + key + "'");
    }
    if (!seen_version || m.version != 1)
        throw DataError("'" + path + "' is not a version-1 model file");
    if (m.sigma.empty())
        throw DataError("'" + path + "' has no sigma lines");
    if (m.regime != "predict" && m.regime != "cost" && m.regime != "abstain_rate" &&
        m.regime != "lambda")
        throw DataError("'" + path + "': unknown regime '" + m.regime + "'");
    if (m.regime == "cost" && !m.c)
        throw DataError("'" + path + "': cost model without c");
    (void)losses::by_name(m.loss);
    return m;
}

} // namespace abstain::io

#endif // ABSTAIN_IO_HPP
