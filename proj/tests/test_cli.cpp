#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "afos/cli.hpp"
#include "afos/error.hpp"
#include "afos/ranktest.hpp"

using namespace afos;
using namespace afos::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("afos_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> log_without_wall_time(const fs::path& p) {
    std::vector<std::string> out;
    for (const auto& line : lines_of(slurp(p))) {
        auto j = nlohmann::json::parse(line);
        j.erase("wall_time");
        out.push_back(j.dump());
    }
    return out;
}

bool has(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

// value column of one checklist row
std::string cell(const std::string& text, const std::string& property) {
    for (const auto& line : lines_of(text))
        if (line.rfind(property + " ", 0) == 0) {
            std::istringstream in(line.substr(property.size()));
            std::string v;
            in >> v;
            return v;
        }
    return "?";
}

std::string fixture(const char* name) { return (fs::path(AFOS_DATA_DIR) / name).string(); }

}  // namespace

TEST_CASE("config files") {
    const auto dir = scratch("config");
    std::ofstream(dir / "ok.cfg") << "# desk run\npreset = desk\nJ = 12\nx_prob=0.5  # inline\n\nmode = relaxed\n";
    const auto cfg = load_config(dir / "ok.cfg");
    CHECK(cfg.ga.J == 12);
    CHECK(cfg.ga.x_prob == 0.5);
    CHECK(cfg.ga.mode == searchspace::GrammarMode::relaxed);
    CHECK(cfg.ga.N == 5);

    std::ofstream(dir / "bad.cfg") << "J = 10\n\nN = five\n";
    try {
        load_config(dir / "bad.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has(e.what(), "bad.cfg:3"));
    }
    std::ofstream(dir / "nokey.cfg") << "J = 10\njust words\n";
    CHECK_THROWS_WITH_AS(load_config(dir / "nokey.cfg"), doctest::Contains("nokey.cfg:2"), ConfigError);
    std::ofstream(dir / "unknown.cfg") << "colour = blue\n";
    CHECK_THROWS_WITH_AS(load_config(dir / "unknown.cfg"), doctest::Contains("unknown.cfg:1"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), ConfigError);

    const auto r = run({"search", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o").string()});
    CHECK(r.code == kUsage);
    CHECK(has(r.err, "config error"));
    CHECK(has(r.err, ":3"));

    const auto paper = preset("paper");
    CHECK(paper.ga.J == 30);
    CHECK(paper.ga.N == 40);
    CHECK(paper.network == "phi");
    CHECK_THROWS_AS(preset("huge"), ConfigError);

    RunConfig c = preset("desk");
    CHECK_THROWS_AS(apply(c, "workers", "-2x"), ConfigError);
    CHECK_THROWS_AS(apply(c, "evaluator", "oracle"), ConfigError);
    CHECK_THROWS_AS(apply(c, "val_count", "-1"), ConfigError);
    apply(c, "seed", "99");
    CHECK(to_map(c)["seed"] == "99");
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == kUsage);
    CHECK(run({"bogus"}).code == kUsage);
    const auto dir = scratch("usage");
    const auto out = (dir / "o").string();

    auto r = run({"eval", "mul(x", "--out", out});
    CHECK(r.code == kUsage);
    CHECK(has(r.err, "parse error"));
    r = run({"eval", "relu", "--set", "colour=blue", "--out", out});
    CHECK(r.code == kUsage);
    CHECK(has(r.err, "colour"));
    r = run({"eval", "relu", "--set", "nonsense", "--out", out});
    CHECK(r.code == kUsage);
    r = run({"export", "curve", "nosuchfn", "--out", out});
    CHECK(r.code == kUsage);
    CHECK(has(r.err, "unknown name"));
    r = run({"export", "surface", "relu", "--out", out});
    CHECK(r.code == kUsage);
    r = run({"search", "--workers", "0", "--out", out});
    CHECK(r.code == kUsage);
    r = run({"friedman", fixture("networks5.csv"), "--dof", "guess"});
    CHECK(r.code == kUsage);
    fs::remove_all(dir);
}

TEST_CASE("friedman command") {
    const auto dir = scratch("friedman");
    std::ofstream(dir / "one.csv") << "function,a\nrelu,0.9\n";
    auto r = run({"friedman", (dir / "one.csv").string()});
    CHECK(r.code == kData);
    CHECK(has(r.err, "data error"));
    r = run({"friedman", (dir / "missing.csv").string()});
    CHECK(r.code == kData);

    const auto paper = run({"friedman", fixture("networks5.csv"), "--json"});
    const auto standard = run({"friedman", fixture("networks5.csv"), "--dof", "standard", "--json"});
    REQUIRE(paper.code == kOk);
    REQUIRE(standard.code == kOk);
    const auto a = nlohmann::json::parse(paper.out), b = nlohmann::json::parse(standard.out);
    CHECK(a["chi2"].get<double>() == b["chi2"].get<double>());
    CHECK(a["dof"] == 4);
    CHECK(b["dof"] == 9);
    CHECK(a["p_value"].get<double>() != b["p_value"].get<double>());
    CHECK(a["reject_h0"] == true);
    CHECK(a["ranking"][0]["function"] == "EELU-2");

    const auto text = run({"friedman", fixture("datasets16.csv")});
    CHECK(text.code == kOk);
    CHECK(has(text.out, "EELU-2"));
    fs::remove_all(dir);
}

TEST_CASE("export command") {
    const auto dir = scratch("export");
    auto r = run({"export", "curve", "eelu2", "--range", "-5", "5", "--samples", "1001", "--out", dir.string()});
    REQUIRE(r.code == kOk);
    CHECK(has(r.out, "1001 rows"));
    const auto curve = lines_of(slurp(dir / "curve_eelu2.csv"));
    REQUIRE(curve.size() == 1002);
    CHECK(curve[0] == "x,f,df");
    CHECK(curve[1].rfind("-5,", 0) == 0);
    CHECK(curve.back().rfind("5,", 0) == 0);
    CHECK(fs::exists(dir / "manifest.json"));

    r = run({"export", "landscape", "relu", "--resolution", "64", "--landscape-seed", "1", "--out", dir.string()});
    REQUIRE(r.code == kOk);
    CHECK(has(r.out, "64x64"));
    const auto grid = lines_of(slurp(dir / "landscape_relu.csv"));
    REQUIRE(grid.size() == 64);
    for (const auto& row : grid) CHECK(std::count(row.begin(), row.end(), ',') == 63);
    const auto first = slurp(dir / "landscape_relu.csv");
    REQUIRE(run({"export", "landscape", "relu", "--resolution", "64", "--out", dir.string()}).code == kOk);
    CHECK(slurp(dir / "landscape_relu.csv") == first);

    r = run({"export", "curve", "add(x, tanh(x))", "--samples", "11", "--out", dir.string()});
    REQUIRE(r.code == kOk);
    CHECK(lines_of(slurp(dir / "curve_expr.csv")).size() == 12);
    fs::remove_all(dir);
}

TEST_CASE("analyze command") {
    auto r = run({"analyze", "eelu1"});
    REQUIRE(r.code == kOk);
    CHECK(has(r.out, "eelu1"));
    CHECK(has(r.out, "global minimum on [-20, 20]: f("));
    const auto at = r.out.find("global minimum on");
    const double fmin = std::stod(r.out.substr(r.out.find(" = ", at) + 3));
    CHECK(std::abs(fmin + 0.3985) < 2e-3);
    CHECK(has(r.out, "bump side: negative"));

    CHECK(cell(r.out, "non-monotonic") == "yes");
    CHECK(cell(r.out, "upper-bounded") == "no");

    r = run({"analyze", "x"});
    REQUIRE(r.code == kOk);
    CHECK(cell(r.out, "non-linear") == "no");
    CHECK(cell(r.out, "non-monotonic") == "no");
    CHECK(has(r.out, "f(-20) = -20"));

    // mish minimum: -0.30884 near x = -1.1924
    r = run({"analyze", "mish"});
    REQUIRE(r.code == kOk);
    CHECK(cell(r.out, "non-monotonic") == "yes");
    CHECK(cell(r.out, "lower-bounded") == "yes");
    CHECK(has(r.out, "bump side: negative"));
    CHECK(has(r.out, "lower bound -0.3088"));

    r = run({"analyze", "arcsin(x)", "--range", "2", "3"});
    CHECK(r.code == kOk);
    CHECK(has(r.out, "undefined"));
    CHECK(run({"analyze", "relu", "--range", "3", "2"}).code == kUsage);
}

TEST_CASE("eval command") {
    const auto dir = scratch("eval");
    const auto r = run({"eval", "relu", "--reps", "3", "--out", dir.string()});
    REQUIRE(r.code == kOk);
    int reps = 0;
    for (const auto& line : lines_of(r.out)) reps += line.rfind("rep ", 0) == 0;
    CHECK(reps == 3);
    CHECK(has(r.out, "relu: "));
    CHECK(has(r.out, "(3 runs)"));

    const auto table = ranktest::read_csv(dir / "eval.csv");
    CHECK(table.rows == std::vector<std::string>{"relu"});
    CHECK(table.columns == std::vector<std::string>{"synth"});
    CHECK(table.cells[0][0] > 50.0);
    CHECK(table.cells[0][0] <= 100.0);

    // deterministic given the seed
    const auto again = run({"eval", "relu", "--reps", "3", "--out", dir.string()});
    CHECK(again.out == r.out);
    CHECK(run({"eval", "relu", "--reps", "0", "--out", dir.string()}).code == kUsage);

    const auto e2 = run({"eval", "eelu2", "--reps", "1", "--out", dir.string()});
    REQUIRE(e2.code == kOk);
    CHECK(ranktest::read_csv(dir / "eval.csv").rows == std::vector<std::string>{"eelu2"});
    fs::remove_all(dir);
}

TEST_CASE("desk search is reproducible") {
    const auto a = scratch("search_a"), b = scratch("search_b");
    const auto r1 = run({"search", "--preset", "desk", "--seed", "7", "-N", "5", "-J", "10", "--out", a.string()});
    REQUIRE(r1.code == kOk);
    CHECK(fs::exists(a / "manifest.json"));
    CHECK(fs::exists(a / "checkpoint.json"));
    CHECK(fs::exists(a / "report.txt"));
    CHECK(has(r1.out, "best per repetition"));

    const auto log = lines_of(slurp(a / "run.jsonl"));
    REQUIRE(log.size() == 5);
    for (const auto& line : log) CHECK(nlohmann::json::parse(line)["members"].size() == 10);

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["command"] == "search");
    CHECK(manifest["seeds"]["master_seed"] == 7);
    CHECK(manifest["config"]["J"] == "10");

    const auto r2 = run({"search", "--preset", "desk", "--seed", "7", "-N", "5", "-J", "10", "--workers", "2",
                         "--out", b.string()});
    REQUIRE(r2.code == kOk);
    CHECK(log_without_wall_time(a / "run.jsonl") == log_without_wall_time(b / "run.jsonl"));

    // interrupted then resumed
    const auto c = scratch("search_c");
    const std::vector<std::string> base{"search", "--seed", "7", "-N", "5", "-J", "10", "--out", c.string()};
    auto part = base;
    part.insert(part.end(), {"--stop-after", "2"});
    const auto r3 = run(part);
    REQUIRE(r3.code == kOk);
    CHECK(has(r3.out, "--resume"));
    auto cont = base;
    cont.push_back("--resume");
    REQUIRE(run(cont).code == kOk);
    CHECK(log_without_wall_time(c / "run.jsonl") == log_without_wall_time(a / "run.jsonl"));

    // resuming under a different config is refused
    auto other = base;
    other[2] = "8";
    other.push_back("--resume");
    CHECK(run(other).code == kData);

    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("paper preset provenance under the surrogate") {
    const auto dir = scratch("paper");
    const auto r = run({"search", "--preset", "paper", "--set", "evaluator=surrogate", "-N", "3", "--out", dir.string()});
    REQUIRE(r.code == kOk);
    const auto log = lines_of(slurp(dir / "run.jsonl"));
    REQUIRE(log.size() == 3);
    for (std::size_t g = 1; g < log.size(); ++g) {
        const auto j = nlohmann::json::parse(log[g]);
        REQUIRE(j["members"].size() == 30);
        int counts[4] = {};
        for (const auto& m : j["members"]) {
            const auto p = m["provenance"].get<std::string>();
            counts[p == "selected" ? 0 : p == "crossover" ? 1 : p == "mutation" ? 2 : 3]++;
        }
        CHECK(counts[0] == 6);
        CHECK(counts[1] <= 6);
        CHECK(counts[2] <= 1);
        CHECK(counts[3] >= 17);
        CHECK(counts[0] + counts[1] + counts[2] + counts[3] == 30);
    }
    fs::remove_all(dir);
}
