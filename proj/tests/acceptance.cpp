// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "afos/datahub.hpp"
#include "afos/evaluators.hpp"
#include "afos/evolver.hpp"
#include "afos/profiler.hpp"
#include "afos/ranktest.hpp"
#include "afos/searchspace.hpp"
#include "afos/tinynet.hpp"

using namespace afos;
using funcdsl::Binary;
using funcdsl::catalog;
using funcdsl::Expr;
using funcdsl::Unary;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::ostringstream notes;
    bool ok = true;
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes << "  failed: " << what << '\n';
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s (%.2f s)\n", c.ok ? "PASS" : "FAIL", id, title, secs);
    std::fputs(c.notes.str().c_str(), stdout);
    std::fflush(stdout);
    failures += c.ok ? 0 : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// every tree of depth <= d over the given primitives
std::vector<Expr> all_trees(int d, const std::vector<Unary>& us, const std::vector<Binary>& bs) {
    if (d == 1) return {Expr::leaf()};
    const auto smaller = all_trees(d - 1, us, bs);
    std::vector<Expr> out{Expr::leaf()};
    for (Unary op : us)
        for (const auto& c : smaller) out.push_back(Expr::unary(op, c));
    for (Binary op : bs)
        for (const auto& a : smaller)
            for (const auto& b : smaller) out.push_back(Expr::binary(op, a, b));
    return out;
}

// b(u(x), u(x)) or b(core, core) with single unary links
bool counted_shape(const Expr& e, std::size_t i, int cores) {
    const auto& n = e.node(i);
    if (n.kind != funcdsl::NodeKind::binary) return false;
    const auto l = e.child(i, 0), r = e.child(i, 1);
    if (cores == 2) return counted_shape(e, l, 1) && counted_shape(e, r, 1);
    for (auto c : {l, r})
        if (e.node(c).kind != funcdsl::NodeKind::unary || e.node(c + 1).kind != funcdsl::NodeKind::leaf) return false;
    return true;
}

using namespace tinynet;

TensorBundle uniform_batch(Shape shape, std::uint64_t seed, double lo, double hi) {
    TensorBundle t(std::move(shape));
    SeededStream rng(seed);
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

double loss_of(Model& m, const TensorBundle& x, const TensorBundle& y) {
    return loss_and_grad(m.forward(x, false), y).loss;
}

// worst |analytic - central difference| as a multiple of rel * scale + floor
double gradient_violation(Model& m, const TensorBundle& x, const TensorBundle& y) {
    const double h = 1e-5, rel = 1e-4;
    m.backward(loss_and_grad(m.forward(x, false), y).grad);
    std::vector<std::vector<double>> analytic;
    for (auto g : m.gradients()) analytic.emplace_back(g.begin(), g.end());
    double worst = 0.0;
    auto params = m.parameters();
    for (std::size_t p = 0; p < params.size(); ++p)
        for (std::size_t i = 0; i < params[p].size(); ++i) {
            const double keep = params[p][i];
            params[p][i] = keep + h;
            const double up = loss_of(m, x, y);
            params[p][i] = keep - h;
            const double down = loss_of(m, x, y);
            params[p][i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double a = analytic[p][i];
            if (!std::isfinite(a) || !std::isfinite(numeric)) return INFINITY;
            worst = std::max(worst, std::abs(a - numeric) / (rel * std::max(std::abs(a), std::abs(numeric)) + 1e-9));
        }
    return worst;
}

std::vector<std::string> log_lines(const fs::path& p) {
    std::vector<std::string> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        j.erase("wall_time");
        out.push_back(j.dump());
    }
    return out;
}

}  // namespace

int main() {
    criterion(1, "EELU global minima on [-20, 20]", [](Check& c) {
        const struct {
            const char* name;
            double f;
        } rows[] = {{"eelu1", -0.3985}, {"eelu2", -0.3985}, {"eelu3", -0.1898}, {"eelu4", -0.2755}};
        for (const auto& r : rows) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto m = profiler::global_min(catalog(r.name), -20, 20);
            const double t = seconds_since(t0);
            c.expect(m.has_value(), std::string(r.name) + " has a minimum");
            if (!m) continue;
            std::printf("     %s: f(%.6f) = %.6f in %.3f s\n", r.name, m->x, m->f, t);
            c.expect(std::abs(m->f - r.f) <= 2e-3, std::string(r.name) + " minimum " + num(m->f));
            c.expect(t < 1.0, std::string(r.name) + " runtime " + num(t));
        }
    });

    criterion(2, "EELU-2(x) mirrors EELU-1(-x)", [](Check& c) {
        const auto e1 = catalog("eelu1"), e2 = catalog("eelu2");
        double worst = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double x = -10.0 + 20.0 * i / 100000.0;
            worst = std::max(worst, std::abs(funcdsl::value(e2, x) - funcdsl::value(e1, -x)));
        }
        std::printf("     max deviation %.3g\n", worst);
        c.expect(worst < 1e-12, "max deviation " + num(worst));
    });

    criterion(3, "property checklist for ReLU and EELU-1..4", [](Check& c) {
        const char* names[] = {"relu", "eelu1", "eelu2", "eelu3", "eelu4"};
        std::vector<std::pair<std::string, profiler::PropertyReport>> cols;
        for (const char* n : names) {
            const auto p = profiler::probe_properties(catalog(n));
            const bool relu = std::string(n) == "relu";
            // rows: non-linear, upper-bounded, lower-bounded, differentiable, non-monotonic
            const bool want[5] = {true, false, true, !relu, !relu};
            const bool got[5] = {p.nonlinear, p.upper_bounded, p.lower_bounded, p.differentiable_everywhere,
                                 p.non_monotonic};
            for (int k = 0; k < 5; ++k) c.expect(got[k] == want[k], std::string(n) + " row " + std::to_string(k));
            cols.emplace_back(n, p);
        }
        std::fputs(profiler::checklist(cols).c_str(), stdout);
    });

    criterion(4, "search-space size", [](Check& c) {
        const auto n = searchspace::count_search_space();
        std::printf("     count = %llu\n", static_cast<unsigned long long>(n));
        c.expect(n == 173461222ull, "full count " + std::to_string(n));
        const std::vector<Unary> us{Unary::identity, Unary::erf};
        const std::vector<Binary> bs{Binary::add, Binary::mul};
        std::size_t counted = 0;
        for (const auto& e : all_trees(4, us, bs))
            counted += searchspace::validate(e) && (counted_shape(e, 0, 1) || counted_shape(e, 0, 2));
        std::printf("     shrunk catalog: formula %llu, enumeration %zu\n",
                    static_cast<unsigned long long>(searchspace::count_search_space({2, 2})), counted);
        c.expect(searchspace::count_search_space({2, 2}) == counted, "shrunk catalog matches enumeration");
    });

    criterion(5, "fitness arithmetic", [](Check& c) {
        c.expect(evolver::fitness(0.9, 0.01) == 90.0, "fitness(0.9, 0.01) = " + num(evolver::fitness(0.9, 0.01)));
        c.expect(evolver::fitness(0.1, 10) == 0.01, "fitness(0.1, 10) = " + num(evolver::fitness(0.1, 10)));
        const double ratio = std::exp(evolver::fitness(0.9, 0.01) - evolver::fitness(0.1, 10)) / 1.2e39;
        std::printf("     e^(90 - 0.01) / 1.2e39 = %.5f\n", ratio);
        c.expect(std::abs(ratio - 1.0) < 0.01, "exponential gap ratio " + num(ratio));
    });

    criterion(6, "Friedman test reproduction", [](Check& c) {
        const auto hand = ranktest::friedman(ranktest::RankMatrix{{1, 1}, {2, 2}, {3, 3}});
        c.expect(hand.chi2 == 4.0, "hand example chi2 " + num(hand.chi2));
        const auto top_is = [](const ranktest::FriedmanResult& r, std::size_t i) {
            return std::max_element(r.mean_ranks.begin(), r.mean_ranks.end()) - r.mean_ranks.begin() ==
                   static_cast<std::ptrdiff_t>(i);
        };
        const struct {
            const char* file;
            int dof;
        } fixtures[] = {{"networks5.csv", 4}, {"datasets16.csv", 15}};
        for (const auto& f : fixtures) {
            const auto t = ranktest::read_csv(fs::path(AFOS_DATA_DIR) / f.file);
            const auto r = ranktest::friedman(ranktest::rank_columns(t));
            const auto at = std::find(t.rows.begin(), t.rows.end(), "EELU-2") - t.rows.begin();
            std::printf("     %s: chi2 %.4f, dof %d, p %.4g, top %s\n", f.file, r.chi2, r.dof, r.p_value,
                        t.rows[std::max_element(r.mean_ranks.begin(), r.mean_ranks.end()) - r.mean_ranks.begin()].c_str());
            c.expect(r.reject_h0, std::string(f.file) + " rejects");
            c.expect(r.dof == f.dof, std::string(f.file) + " dof " + std::to_string(r.dof));
            c.expect(static_cast<std::size_t>(at) < t.rows.size() && top_is(r, static_cast<std::size_t>(at)),
                     std::string(f.file) + " EELU-2 top");
        }
    });

    criterion(7, "end-to-end gradients for EELU-1..4 and every unary primitive", [](Check& c) {
        std::vector<std::pair<std::string, Expr>> acts;
        for (const char* n : {"eelu1", "eelu2", "eelu3", "eelu4"}) acts.emplace_back(n, catalog(n));
        for (std::size_t i = 0; i < funcdsl::kUnaryCount; ++i) {
            const auto u = funcdsl::unary_at(i);
            acts.emplace_back(std::string(funcdsl::name(u)), Expr::unary(u, Expr::leaf()));
        }
        const auto x = uniform_batch({2, 4, 4, 2}, 21, -0.1, 0.1);
        const auto y = one_hot(std::vector<int>{2, 0}, 3);
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& [name, f] : acts) {
            Model m = Model::build({LayerSpec::conv(2, f), LayerSpec::maxpool(), LayerSpec::flatten(), LayerSpec::dense(3)},
                                   {4, 4, 2}, 5);
            const double v = gradient_violation(m, x, y);
            c.expect(v <= 1.0, name + " gradient mismatch x" + num(v));
        }
        const double t = seconds_since(t0);
        std::printf("     %zu activations checked in %.2f s\n", acts.size(), t);
        c.expect(t < 60.0, "runtime " + num(t));
    });

    criterion(8, "GA mechanics under the surrogate evaluator", [](Check& c) {
        const auto dir = fs::temp_directory_path() / "afos_acceptance_ga";
        fs::remove_all(dir);
        fs::create_directories(dir);
        evolver::GAConfig cfg;
        cfg.master_seed = 7;
        std::vector<std::vector<std::string>> logs;
        for (int workers : {1, 4, 1}) {
            evolver::Engine engine(cfg, evaluators::SurrogateEvaluator{}, workers);
            evolver::RunOptions opt;
            opt.workers = workers;
            opt.log_path = dir / ("run" + std::to_string(logs.size()) + ".jsonl");
            const auto res = engine.run(opt);
            logs.push_back(log_lines(opt.log_path));
            if (logs.size() > 1) continue;
            c.expect(res.records.size() == 40, "40 generations");
            double prev = -INFINITY;
            for (const auto& r : res.records) {
                c.expect(r.best_fitness >= prev, "best fitness drops at generation " + std::to_string(r.index));
                prev = r.best_fitness;
                const auto k = r.provenance_counts();
                c.expect(k[0] + k[1] + k[2] + k[3] == 30, "population of 30");
                if (r.index > 0) {
                    c.expect(k[0] == 6 && k[1] <= 6 && k[2] <= 1, "provenance at generation " + std::to_string(r.index));
                    c.expect(k[3] == 30 - k[0] - k[1] - k[2], "random fill");
                }
            }
            const auto last = res.records.back().provenance_counts();
            std::printf("     best %.6g -> %.6g; last generation (selected %d, crossover %d, mutation %d, random %d)\n",
                        res.records.front().best_fitness, res.records.back().best_fitness, last[0], last[1], last[2],
                        last[3]);
        }
        c.expect(logs[0] == logs[1], "workers 1 and 4 give identical logs");
        c.expect(logs[0] == logs[2], "repeat run gives an identical log");
        fs::remove_all(dir);
    });

    criterion(9, "phi output shapes for 32x32x3, 10 classes", [](Check& c) {
        const Model m = Model::build(phi_network(10, catalog("eelu2")), {32, 32, 3}, 1);
        const std::vector<Shape> expected{{32, 32, 28}, {32, 32, 32}, {16, 16, 32}, {16, 16, 32}, {16, 16, 64},
                                          {16, 16, 64}, {8, 8, 64},   {8, 8, 64},   {8, 8, 128},  {8, 8, 128},
                                          {4, 4, 128},  {4, 4, 128},  {1, 1, 2048}, {1, 1, 10}};
        const auto got = m.output_shapes();
        c.expect(got.size() == 14, "14 layers");
        c.expect(got == expected, "shapes match the table");
    });

    criterion(10, "trainer sanity on 4-class blobs", [](Check& c) {
        const auto data = datahub::synth_blobs(4, 100, 2, 8.0, 11);
        const auto [tr, va] = datahub::split_train_val(data, 80, 3);
        TrainConfig cfg;
        cfg.epochs = 15;
        cfg.batch_size = 16;
        cfg.seed = 5;
        for (const char* n : {"relu", "eelu1", "eelu2", "eelu3", "eelu4"}) {
            Model m = Model::build(desk_network(4, catalog(n)), {2}, 9);
            const auto out = train(m, tr, va, cfg);
            double best = 0.0;
            int epoch = 0;
            for (std::size_t e = 0; e < out.history.size(); ++e)
                if (out.history[e].val_accuracy > best) {
                    best = out.history[e].val_accuracy;
                    epoch = static_cast<int>(e) + 1;
                }
            std::printf("     %s: best val accuracy %.4f (epoch %d)\n", n, best, epoch);
            c.expect(out.abort == AbortReason::none, std::string(n) + " not aborted");
            c.expect(best >= 0.95, std::string(n) + " reaches 95%");
        }
        Model nan_model = Model::build(desk_network(4, funcdsl::parse("arctanh(x)")), {2}, 1);
        c.expect(train(nan_model, tr, va, cfg).abort == AbortReason::nan, "arctanh aborts as nan");
        const auto balanced = datahub::synth_blobs(4, 25, 2, 8.0, 7);
        Model stuck = Model::build(desk_network(4, funcdsl::parse("add(x, negate(x))")), {2}, 1);
        const auto s = train(stuck, tr, balanced, cfg);
        std::printf("     stuck model: epoch-1 val accuracy %.4f\n", s.v_a);
        c.expect(s.abort == AbortReason::threshold, "stuck model aborts on threshold");
    });

    criterion(11, "erf microbenchmark", [](Check& c) {
        const double t = profiler::microbench_activation(funcdsl::parse("erf(x)"), 1000, 10000);
        std::printf("     mean %.3g s per run over 1000 elements (reference %.3g s, report only)\n", t,
                    profiler::kPaperErfSeconds);
        c.expect(std::isfinite(t) && t > 0.0, "positive finite time");
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
