#include <abstain/io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace abstain;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ABSTAIN_CLI_PATH;
const std::string kData = ABSTAIN_SAMPLE_DATA;

struct Run
{
    int code = -1;
    std::string out;
    std::string err;
};

struct Sandbox
{
    fs::path dir;
    Sandbox()
    {
        dir = fs::temp_directory_path() / ("abstain_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Sandbox()
    {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    [[nodiscard]] std::string path(const std::string& name) const { return (dir / name).string(); }

    Run run(const std::string& args) const
    {
        const std::string o = path("stdout.txt"), e = path("stderr.txt");
        const int status = std::system(("'" + kCli + "' " + args + " > " + o + " 2> " + e).c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(o);
        r.err = slurp(e);
        return r;
    }

    static std::string slurp(const std::string& p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }
};

/// key=value lines of a command's report.
std::map<std::string, std::string> report(const std::string& s)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
        if (const auto eq = line.find('='); eq != std::string::npos)
            kv[line.substr(0, eq)] = line.substr(eq + 1);
    return kv;
}

const std::string U = kData + "/unlabeled.csv";
const std::string L = kData + "/labeled.csv";
const std::string TU = kData + "/tiny_unlabeled.csv";
const std::string TB = kData + "/tiny_bounds.csv";

} // namespace

TEST_CASE("estimate writes corrected and plug-in bounds")
{
    Sandbox sb;
    REQUIRE(sb.run("estimate " + L + " -o " + sb.path("b.csv")).code == 0);
    REQUIRE(sb.run("estimate " + L + " --no-correction -o " + sb.path("p.csv")).code == 0);
    const auto b = io::read_bounds(sb.path("b.csv"));
    const auto p = io::read_bounds(sb.path("p.csv"));
    const auto lf = io::read_predictions(L, true);
    const double h = std::sqrt(2.0 * std::log(5.0 / 0.05) / static_cast<double>(lf.labels.size()));
    for (std::size_t i = 0; i < b.b.size(); ++i)
        CHECK(p.b[i] - b.b[i] == Catch::Approx(h).margin(1e-12));
    CHECK(b.members == lf.members);

    const std::string perfect = sb.path("perfect.csv");
    std::ofstream(perfect) << "example_id,h1,label\na,1,1\nb,-1,-1\nc,1,1\nd,-1,-1\n";
    REQUIRE(sb.run("estimate " + perfect + " -o " + sb.path("pb.csv")).code == 0);
    const double hw = std::sqrt(2.0 * std::log(1.0 / 0.05) / 4.0);
    CHECK(io::read_bounds(sb.path("pb.csv")).b[0] == Catch::Approx(1.0 - hw).margin(1e-15));
}

TEST_CASE("estimate reports malformed input as a data error")
{
    Sandbox sb;
    const std::string empty = sb.path("empty.csv");
    std::ofstream(empty) << "";
    const auto r = sb.run("estimate " + empty);
    CHECK(r.code == 2);
    CHECK(r.err.find(empty) != std::string::npos);

    const std::string bad = sb.path("bad.csv");
    std::ofstream(bad) << "example_id,h1,label\nx,0.5,1\ny,zz,1\n";
    const auto r2 = sb.run("estimate " + bad);
    CHECK(r2.code == 2);
    CHECK(r2.err.find(":3:2") != std::string::npos);
}

TEST_CASE("train on the single-example files")
{
    Sandbox sb;
    const auto cost = report(sb.run("train " + TU + " " + TB + " --cost 0.1 -o " + sb.path("m.txt")).out);
    CHECK(std::stod(cost.at("V")) == Catch::Approx(0.1).margin(1e-3));
    CHECK(std::stod(cost.at("abstain_rate")) == 1.0);

    REQUIRE(sb.run("estimate " + L + " -o " + sb.path("b.csv")).code == 0);
    const auto c5 = report(sb.run("train " + U + " " + sb.path("b.csv") + " --cost 0.5 -o " + sb.path("c.txt")).out);
    const auto pr = report(sb.run("train " + U + " " + sb.path("b.csv") + " --predict-only -o " + sb.path("p.txt")).out);
    CHECK(c5.at("V") == pr.at("V"));
}

TEST_CASE("abstain-rate training hits the rate and predict reproduces it")
{
    Sandbox sb;
    REQUIRE(sb.run("estimate " + L + " -o " + sb.path("b.csv")).code == 0);
    const auto tr = report(
        sb.run("train " + U + " " + sb.path("b.csv") + " --abstain-rate 0.25 -o " + sb.path("m.txt")).out);
    const double rate = std::stod(tr.at("abstain_rate"));
    CHECK(std::abs(rate - 0.25) <= 0.01);
    const auto pr = sb.run("predict " + sb.path("m.txt") + " " + U + " -o " + sb.path("d.csv"));
    REQUIRE(pr.code == 0);
    CHECK(std::stod(report(pr.out).at("abstain_rate")) == Catch::Approx(rate).margin(1e-9));
    const auto d = Sandbox::slurp(sb.path("d.csv"));
    CHECK(d.rfind("example_id,score,predict_prob,prediction\nu1,", 0) == 0);
}

TEST_CASE("a zero-weight model abstains everywhere")
{
    Sandbox sb;
    io::Model m;
    m.regime = "cost";
    m.c = 0.2;
    m.members = {"h1"};
    m.sigma = {0.0};
    io::atomic_write(sb.path("m.txt"), io::model_text(m));
    const auto r = sb.run("predict " + sb.path("m.txt") + " " + TU);
    REQUIRE(r.code == 0);
    CHECK(r.out == "example_id,score,predict_prob,prediction\nx1,0,0,1\n");
}

TEST_CASE("specialist models demand --specialists at prediction time")
{
    Sandbox sb;
    REQUIRE(sb.run("estimate " + L + " -o " + sb.path("b.csv")).code == 0);
    REQUIRE(sb.run("train " + U + " " + sb.path("b.csv") + " --cost 0.2 --specialists --max-iters 500 -o " +
                   sb.path("m.txt"))
                .code == 0);
    const auto bad = sb.run("predict " + sb.path("m.txt") + " " + U);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("--specialists") != std::string::npos);
    CHECK(sb.run("predict " + sb.path("m.txt") + " " + U + " --specialists -o " + sb.path("d.csv")).code == 0);
}

TEST_CASE("frontier endpoints match the prediction game and zero")
{
    Sandbox sb;
    REQUIRE(sb.run("estimate " + L + " -o " + sb.path("b.csv")).code == 0);
    REQUIRE(sb.run("frontier " + U + " " + sb.path("b.csv") + " --grid 10 -o " + sb.path("f.csv")).code == 0);
    const auto t = io::read_csv(sb.path("f.csv"));
    REQUIRE(t.header == std::vector<std::string>{"alpha", "lambda", "V", "certified"});
    REQUIRE(t.rows.size() >= 2);
    CHECK(t.rows.front()[0] == "0");
    CHECK(t.rows.back()[0] == "1");
    CHECK(t.rows.back()[2] == "0");
    double prev_a = -1, prev_v = 1e9;
    for (const auto& r : t.rows) {
        CHECK(std::stod(r[0]) > prev_a);
        CHECK(std::stod(r[2]) <= prev_v);
        prev_a = std::stod(r[0]);
        prev_v = std::stod(r[2]);
    }
    const auto pr = report(sb.run("train " + U + " " + sb.path("b.csv") + " --predict-only").out);
    CHECK(t.rows.front()[2] == pr.at("V"));
}

TEST_CASE("usage errors exit with status 1")
{
    Sandbox sb;
    CHECK(sb.run("").code == 1);
    CHECK(sb.run("train " + TU + " " + TB + " --cost 0.1 --predict-only").code == 1);
    CHECK(sb.run("train " + TU + " " + TB).code == 1);
    CHECK(sb.run("train " + TU + " " + TB + " --cost 0.7").code == 1);
    CHECK(sb.run("train " + TU + " " + TB + " --lambda 0.5 --loss log_loss").code == 1);
    CHECK(sb.run("train " + TU + " " + TB + " --cost 0.2 --loss nonsense").code == 1);
    CHECK(sb.run("frontier " + TU + " " + TB + " --loss log_loss").code == 1);
    CHECK(sb.run("frontier " + TU + " " + TB + " --grid 1").code == 1);
}

TEST_CASE("data errors exit with status 2")
{
    Sandbox sb;
    const std::string b = sb.path("b.csv");
    std::ofstream(b) << "member,bound\nh1,1.5\n";
    CHECK(sb.run("train " + TU + " " + b + " --cost 0.2").code == 2);
    const std::string b2 = sb.path("b2.csv");
    std::ofstream(b2) << "member,bound\nother,0.5\n";
    CHECK(sb.run("train " + TU + " " + b2 + " --cost 0.2").code == 2);
    CHECK(sb.run("train " + sb.path("nope.csv") + " " + TB + " --cost 0.2").code == 2);
}

TEST_CASE("verify reports and is reproducible")
{
    Sandbox sb;
    const auto empty = sb.run("verify --trials 0");
    CHECK(empty.code == 0);
    CHECK(empty.out.rfind("0 instances x 3 regimes", 0) == 0);
    const auto a = sb.run("verify --seed 4 --trials 5");
    const auto b = sb.run("verify --seed 4 --trials 5");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("OK") != std::string::npos);
}
