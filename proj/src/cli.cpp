#include "afos/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "afos/datahub.hpp"
#include "afos/error.hpp"
#include "afos/evaluators.hpp"
#include "afos/profiler.hpp"
#include "afos/ranktest.hpp"

#ifndef AFOS_VERSION
#define AFOS_VERSION "0.0.0"
#endif

namespace afos::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    std::istringstream ss(v);
    ss >> out;
    if (!ss || !(ss >> std::ws).eof()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    return out;
}

int as_int(const std::string& k, const std::string& v) { return parse_number<int>(k, v); }
double as_double(const std::string& k, const std::string& v) { return parse_number<double>(k, v); }
std::size_t as_size(const std::string& k, const std::string& v) {
    if (!v.empty() && v[0] == '-') throw ConfigError("'" + k + "' must be non-negative");
    return parse_number<std::size_t>(k, v);
}
std::uint64_t as_u64(const std::string& k, const std::string& v) {
    if (!v.empty() && v[0] == '-') throw ConfigError("'" + k + "' must be non-negative");
    return parse_number<std::uint64_t>(k, v);
}
std::string one_of(const std::string& k, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
    throw ConfigError("'" + k + "' must be one of " + list + ", got '" + v + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
    const char* name;
    Setter set;
    Getter get;
};

#define AFOS_INT(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = as_int(k, v); }, \
                        [](const RunConfig& c) { return std::to_string(c.field); }
#define AFOS_SIZE(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = as_size(k, v); }, \
                         [](const RunConfig& c) { return std::to_string(c.field); }
#define AFOS_U64(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = as_u64(k, v); }, \
                        [](const RunConfig& c) { return std::to_string(c.field); }
#define AFOS_REAL(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = as_double(k, v); }, \
                         [](const RunConfig& c) { return fmt(c.field); }
#define AFOS_TEXT(field) [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }, \
                         [](const RunConfig& c) { return c.field; }

const std::vector<Key>& keys() {
    static const std::vector<Key> table{
        {"J", AFOS_INT(ga.J)},
        {"N", AFOS_INT(ga.N)},
        {"K", AFOS_INT(ga.K)},
        {"n_psi", AFOS_INT(ga.n_psi)},
        {"max_n_x", AFOS_INT(ga.max_n_x)},
        {"max_n_m", AFOS_INT(ga.max_n_m)},
        {"x_prob", AFOS_REAL(ga.x_prob)},
        {"m_prob", AFOS_REAL(ga.m_prob)},
        {"seed", AFOS_U64(ga.master_seed)},
        {"mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.ga.mode = one_of(k, v, {"strict", "relaxed"}) == "strict" ? searchspace::GrammarMode::strict
                                                                         : searchspace::GrammarMode::relaxed;
         },
         [](const RunConfig& c) { return std::string(c.ga.mode == searchspace::GrammarMode::strict ? "strict" : "relaxed"); }},
        {"epochs", AFOS_INT(train.epochs)},
        {"batch_size", AFOS_INT(train.batch_size)},
        {"learning_rate", AFOS_REAL(train.learning_rate)},
        {"momentum", AFOS_REAL(train.momentum)},
        {"dropout", AFOS_REAL(train.dropout_rate)},
        {"abort_threshold", AFOS_REAL(train.abort_threshold)},
        {"evaluator",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.evaluator = one_of(k, v, {"train", "surrogate"}); },
         [](const RunConfig& c) { return c.evaluator; }},
        {"network",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.network = one_of(k, v, {"desk", "phi"}); },
         [](const RunConfig& c) { return c.network; }},
        {"hidden", AFOS_INT(hidden)},
        {"dataset",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.dataset = one_of(k, v, {"synth", "idx", "cifar10"}); },
         [](const RunConfig& c) { return c.dataset; }},
        {"synth_classes", AFOS_INT(synth_classes)},
        {"synth_per_class", AFOS_SIZE(synth_per_class)},
        {"synth_dims", AFOS_SIZE(synth_dims)},
        {"synth_separation", AFOS_REAL(synth_separation)},
        {"idx_images", AFOS_TEXT(idx_images)},
        {"idx_labels", AFOS_TEXT(idx_labels)},
        {"idx_test_images", AFOS_TEXT(idx_test_images)},
        {"idx_test_labels", AFOS_TEXT(idx_test_labels)},
        {"cifar_batches", AFOS_TEXT(cifar_batches)},
        {"cifar_test", AFOS_TEXT(cifar_test)},
        {"val_count", AFOS_SIZE(val_count)},
        {"test_count", AFOS_SIZE(test_count)},
        {"data_seed", AFOS_U64(data_seed)},
        {"workers", AFOS_INT(workers)},
        {"out", AFOS_TEXT(out)},
    };
    return table;
}

#undef AFOS_INT
#undef AFOS_SIZE
#undef AFOS_U64
#undef AFOS_REAL
#undef AFOS_TEXT

}  // namespace

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    if (name == "desk") {
        c.ga.J = 10;
        c.ga.N = 5;
        c.ga.n_psi = 3;
        c.ga.max_n_x = 3;
        c.ga.max_n_m = 1;
        c.train.epochs = 5;
        c.train.batch_size = 16;
        return c;
    }
    if (name == "paper") {
        c.ga = evolver::GAConfig{};
        c.train = tinynet::TrainConfig{};
        c.network = "phi";
        c.dataset = "cifar10";
        c.val_count = 5000;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") throw ConfigError("'preset' must come first and cannot be overridden by a key");
    for (const auto& k : keys())
        if (key == k.name) {
            k.set(cfg, key, value);
            return;
        }
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<ConfigEntry> read_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::vector<ConfigEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        ConfigEntry e{lineno, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
        if (e.key.empty()) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        out.push_back(std::move(e));
    }
    return out;
}

RunConfig load_config(const fs::path& path, const std::string& preset_override) {
    const auto entries = read_config_file(path);
    std::string name = preset_override;
    if (name.empty())
        for (const auto& e : entries)
            if (e.key == "preset") name = e.value;
    RunConfig cfg = preset(name.empty() ? "desk" : name);
    for (const auto& e : entries) {
        if (e.key == "preset") continue;
        try {
            apply(cfg, e.key, e.value);
        } catch (const ConfigError& ex) {
            throw ConfigError(path.string() + ":" + std::to_string(e.line) + ": " + ex.what());
        }
    }
    return cfg;
}

std::map<std::string, std::string> to_map(const RunConfig& cfg) {
    std::map<std::string, std::string> m{{"preset", cfg.preset}};
    for (const auto& k : keys()) m[k.name] = k.get(cfg);
    return m;
}

// ---------------------------------------------------------------------------

namespace {

struct Common {
    std::string config, preset, out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> J, N, K, workers, epochs;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key=value config file");
    sub->add_option("--preset", c.preset, "desk or paper");
    sub->add_option("--set", c.sets, "override a config key, key=value");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("-J", c.J, "population size");
    sub->add_option("-N", c.N, "generations");
    sub->add_option("-K", c.K, "repetitions");
    sub->add_option("--workers", c.workers, "concurrent evaluations");
    sub->add_option("--epochs", c.epochs, "training epochs");
    sub->add_option("--out", c.out, "run directory");
}

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? preset(c.preset.empty() ? "desk" : c.preset) : load_config(c.config, c.preset);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (c.seed) cfg.ga.master_seed = *c.seed;
    if (c.J) cfg.ga.J = *c.J;
    if (c.N) cfg.ga.N = *c.N;
    if (c.K) cfg.ga.K = *c.K;
    if (c.workers) cfg.workers = *c.workers;
    if (c.epochs) cfg.train.epochs = *c.epochs;
    if (!c.out.empty()) cfg.out = c.out;
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
    return cfg;
}

void write_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& args) {
    fs::create_directories(cfg.out);
    json m;
    m["tool"] = "afos";
    m["version"] = AFOS_VERSION;
    m["compiler"] = __VERSION__;
    m["command"] = command;
    m["args"] = args;
    m["seeds"] = {{"master_seed", cfg.ga.master_seed}, {"data_seed", cfg.data_seed}};
    m["config"] = to_map(cfg);
    std::ofstream os(fs::path(cfg.out) / "manifest.json");
    os << m.dump(2) << '\n';
    if (!os) throw DataError("cannot write manifest under " + cfg.out);
}

struct Data {
    std::shared_ptr<const LabeledSet> train, val, test;
    std::string label;
};

std::vector<fs::path> split_paths(const std::string& s) {
    std::vector<fs::path> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.emplace_back(trim(item));
    return out;
}

Data load_data(const RunConfig& c) {
    const SeededStream seeds(c.data_seed, "data");
    Data d;
    d.label = c.dataset;
    auto share = [](LabeledSet s) { return std::make_shared<const LabeledSet>(std::move(s)); };
    if (c.dataset == "synth") {
        auto all = datahub::synth_blobs(c.synth_classes, c.synth_per_class, c.synth_dims, c.synth_separation,
                                        seeds.child("blobs").seed());
        auto [rest, test] = datahub::split_train_val(all, c.test_count, seeds.child("test").seed());
        auto [train, val] = datahub::split_train_val(rest, c.val_count, seeds.child("val").seed());
        d.train = share(std::move(train));
        d.val = share(std::move(val));
        d.test = share(std::move(test));
        return d;
    }
    LabeledSet full, test;
    bool have_test = false;
    if (c.dataset == "idx") {
        if (c.idx_images.empty() || c.idx_labels.empty()) throw ConfigError("dataset=idx needs idx_images and idx_labels");
        full = datahub::load_idx(c.idx_images, c.idx_labels);
        if (!c.idx_test_images.empty()) {
            test = datahub::load_idx(c.idx_test_images, c.idx_test_labels);
            have_test = true;
        }
    } else {
        const auto batches = split_paths(c.cifar_batches);
        if (batches.empty()) throw ConfigError("dataset=cifar10 needs cifar_batches");
        full = datahub::load_cifar10(batches);
        if (!c.cifar_test.empty()) {
            test = datahub::load_cifar10({c.cifar_test});
            have_test = true;
        }
    }
    auto [train, val] = datahub::split_train_val(full, c.val_count, seeds.child("val").seed());
    d.train = share(std::move(train));
    d.val = share(std::move(val));
    d.test = have_test ? share(std::move(test)) : d.val;
    return d;
}

std::vector<tinynet::LayerSpec> network_for(const RunConfig& c, int classes, const funcdsl::Expr& f) {
    return c.network == "phi" ? tinynet::phi_network(classes, f, c.train.dropout_rate)
                              : tinynet::desk_network(classes, f, c.hidden);
}

std::string file_stem(const std::string& function) {
    const auto names = funcdsl::catalog_names();
    return std::find(names.begin(), names.end(), function) != names.end() ? function : "expr";
}

// ---------------------------------------------------------------------------

int cmd_search(const RunConfig& cfg, bool resume, std::optional<int> stop_after, const std::vector<std::string>& args,
               std::ostream& out) {
    cfg.ga.check();
    evolver::Evaluator evaluator;
    if (cfg.evaluator == "surrogate") {
        evaluator = evaluators::SurrogateEvaluator();
    } else {
        const Data d = load_data(cfg);
        evaluator = evaluators::TrainingEvaluator(d.train, d.val,
                                                  cfg.network == "phi" ? evaluators::Network::phi : evaluators::Network::desk,
                                                  cfg.train, cfg.hidden);
    }
    write_manifest(cfg, "search", args);
    const fs::path dir(cfg.out);
    evolver::Engine engine(cfg.ga, evaluator, cfg.workers);
    evolver::RunOptions opt;
    opt.log_path = dir / "run.jsonl";
    opt.checkpoint_path = dir / "checkpoint.json";
    opt.resume = resume;
    opt.workers = cfg.workers;
    opt.stop_after = stop_after;
    opt.on_generation = [&](const evolver::GenerationRecord& r) {
        const auto counts = r.provenance_counts();
        out << "rep " << r.repetition << " gen " << r.index << "  best " << fmt(r.best_fitness) << "  (selected "
            << counts[0] << ", crossover " << counts[1] << ", mutation " << counts[2] << ", random " << counts[3]
            << ")\n";
    };
    const auto result = engine.run(opt);

    std::ostringstream report;
    if (!result.completed) {
        out << "stopped early; continue with --resume\n";
        return kOk;
    }
    std::vector<evolver::ScoredChromosome> top;
    if (!result.records.empty()) top = evolver::select(result.records.back().members, std::min(5, cfg.ga.J));
    report << "best per repetition\n";
    for (std::size_t k = 0; k < result.best_per_rep.size(); ++k) {
        const auto& b = result.best_per_rep[k];
        report << "  rep " << k << ": " << b.text() << "  v_a=" << fmt(b.v_a) << " v_l=" << fmt(b.v_l)
               << " fitness=" << fmt(b.fitness) << '\n';
    }
    if (!top.empty()) {
        report << "top of final generation\n";
        for (const auto& m : top)
            report << "  " << m.text() << "  v_a=" << fmt(m.v_a) << " v_l=" << fmt(m.v_l) << " fitness=" << fmt(m.fitness)
                   << " [" << evolver::to_string(m.status) << "]\n";
    }
    std::ofstream(dir / "report.txt") << report.str();
    out << report.str();
    return kOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& function, int reps, const std::vector<std::string>& args,
             std::ostream& out) {
    if (reps < 1) throw ConfigError("--reps must be at least 1");
    const auto f = funcdsl::resolve(function);
    const Data d = load_data(cfg);
    write_manifest(cfg, "eval", args);
    std::vector<double> acc;
    const SeededStream seeds(cfg.ga.master_seed, "eval");
    for (int r = 0; r < reps; ++r) {
        const std::uint64_t seed = seeds.child("rep" + std::to_string(r)).seed();
        auto model = tinynet::Model::build(network_for(cfg, d.train->classes, f), d.train->images.sample_shape(), seed);
        tinynet::TrainConfig tc = cfg.train;
        tc.seed = seed;
        const auto outcome = tinynet::train(model, *d.train, *d.val, tc);
        const auto m = tinynet::evaluate(model, *d.test);
        acc.push_back(m.accuracy);
        out << "rep " << r << ": test accuracy " << fmt(m.accuracy) << ", val accuracy " << fmt(outcome.v_a);
        if (outcome.abort == tinynet::AbortReason::nan) out << " [aborted: nan]";
        if (outcome.abort == tinynet::AbortReason::threshold) out << " [aborted: threshold]";
        out << '\n';
    }
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    const double sd = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
    char line[128];
    std::snprintf(line, sizeof line, "%.2f +- %.2f", 100.0 * mean, 100.0 * sd);
    out << function << ": " << line << " (" << reps << " runs)\n";
    char row[64];
    std::snprintf(row, sizeof row, "%.4f", 100.0 * mean);
    std::ofstream csv(fs::path(cfg.out) / "eval.csv");
    csv << "function," << d.label << '\n' << function << ',' << row << '\n';
    out << "function," << d.label << '\n' << function << ',' << row << '\n';
    return kOk;
}

int cmd_analyze(const std::string& function, const std::vector<double>& range, std::ostream& out) {
    const auto f = funcdsl::resolve(function);
    const auto rep = profiler::probe_properties(f);
    out << profiler::checklist({{function, rep}});
    if (rep.lower_bound_value)
        out << "lower bound " << fmt(*rep.lower_bound_value) << " at x = " << fmt(*rep.lower_bound_location) << '\n';
    out << "bump side: " << profiler::to_string(rep.bump_side) << '\n';
    if (const auto m = profiler::global_min(f, range[0], range[1]))
        out << "global minimum on [" << fmt(range[0]) << ", " << fmt(range[1]) << "]: f(" << fmt(m->x)
            << ") = " << fmt(m->f) << '\n';
    else
        out << "global minimum: undefined (all samples NaN)\n";
    if (rep.indeterminate) out << "note: some probes hit NaN or saturated values\n";
    return kOk;
}

int cmd_friedman(const std::string& csv, const std::string& dof, bool as_json, std::ostream& out) {
    const auto table = ranktest::read_csv(fs::path(csv));
    const auto report =
        ranktest::compare_report(table, dof == "standard" ? ranktest::DofMode::standard : ranktest::DofMode::paper);
    out << (as_json ? ranktest::to_json(report) + "\n" : ranktest::to_text(report));
    return kOk;
}

int cmd_export(const RunConfig& cfg, const std::string& kind, const std::string& function,
               const std::vector<double>& range, std::size_t samples, std::size_t resolution, std::uint64_t seed,
               const std::vector<std::string>& args, std::ostream& out) {
    const auto f = funcdsl::resolve(function);
    write_manifest(cfg, "export", args);
    const fs::path dir(cfg.out);
    if (kind == "curve") {
        const fs::path file = dir / ("curve_" + file_stem(function) + ".csv");
        profiler::export_curve(f, range[0], range[1], samples, file);
        out << "wrote " << file.string() << " (" << samples << " rows)\n";
    } else {
        const auto m = profiler::output_landscape(f, resolution, seed);
        const fs::path file = dir / ("landscape_" + file_stem(function) + ".csv");
        std::ofstream os(file);
        profiler::write_matrix_csv(os, m);
        if (!os) throw DataError("failed writing " + file.string());
        out << "wrote " << file.string() << " (" << resolution << "x" << resolution << ")\n";
    }
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Activation-function search, analysis and rank tests", "afos"};
    app.require_subcommand(1);
    app.set_version_flag("--version", AFOS_VERSION);

    Common search_c, eval_c, export_c;
    bool resume = false;
    std::optional<int> stop_after;
    auto* search = app.add_subcommand("search", "run the genetic search");
    add_common(search, search_c);
    search->add_flag("--resume", resume, "continue from the run directory's checkpoint");
    search->add_option("--stop-after", stop_after, "stop after this many generations");

    std::string eval_fn;
    int reps = 3;
    auto* eval = app.add_subcommand("eval", "train with one activation and report test accuracy");
    add_common(eval, eval_c);
    eval->add_option("function", eval_fn, "catalog name or expression")->required();
    eval->add_option("--reps", reps, "repetitions");

    std::string analyze_fn;
    std::vector<double> analyze_range{-20.0, 20.0};
    auto* analyze = app.add_subcommand("analyze", "property checklist and global minimum");
    analyze->add_option("function", analyze_fn, "catalog name or expression")->required();
    analyze->add_option("--range", analyze_range, "minimum search interval")->expected(2);

    std::string csv, dof = "paper";
    bool as_json = false;
    auto* fried = app.add_subcommand("friedman", "Friedman test on an accuracy table");
    fried->add_option("csv", csv, "accuracy table")->required();
    fried->add_option("--dof", dof, "paper or standard")->check(CLI::IsMember({"paper", "standard"}));
    fried->add_flag("--json", as_json, "emit JSON");

    std::string kind, export_fn;
    std::vector<double> export_range{-5.0, 5.0};
    std::size_t samples = 1001, resolution = 64;
    std::uint64_t landscape_seed = 1;
    auto* exp = app.add_subcommand("export", "write curve or landscape CSV files");
    add_common(exp, export_c);
    exp->add_option("kind", kind, "curve or landscape")->required()->check(CLI::IsMember({"curve", "landscape"}));
    exp->add_option("function", export_fn, "catalog name or expression")->required();
    exp->add_option("--range", export_range, "curve interval")->expected(2);
    exp->add_option("--samples", samples, "curve samples");
    exp->add_option("--resolution", resolution, "landscape grid size");
    exp->add_option("--landscape-seed", landscape_seed, "landscape network seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (analyze_range.size() != 2 || export_range.size() != 2) throw ConfigError("--range takes two numbers");
        if (*search) return cmd_search(resolve_config(search_c), resume, stop_after, args, out);
        if (*eval) return cmd_eval(resolve_config(eval_c), eval_fn, reps, args, out);
        if (*analyze) return cmd_analyze(analyze_fn, analyze_range, out);
        if (*fried) return cmd_friedman(csv, dof, as_json, out);
        if (*exp)
            return cmd_export(resolve_config(export_c), kind, export_fn, export_range, samples, resolution,
                              landscape_seed, args, out);
        return kUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kUsage;
    } catch (const UnknownNameError& e) {
        err << "unknown name: " << e.what() << '\n';
        return kUsage;
    } catch (const DepthError& e) {
        err << "depth error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const CheckpointError& e) {
        err << "checkpoint error: " << e.what() << '\n';
        return kData;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace afos::cli
