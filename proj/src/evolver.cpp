#include "afos/evolver.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "afos/error.hpp"

namespace afos::evolver {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kStatusNames{"evaluated", "aborted_nan", "aborted_threshold"};
constexpr std::array<std::string_view, 4> kProvenanceNames{"selected", "crossover", "mutation", "random"};

using ExprSet = std::unordered_set<Expr, funcdsl::ExprHash>;

// Relaxed-mode trees outside the strict grammar count as two core units.
Chromosome chromosome_of(const Expr& e, GrammarMode) { return {e, searchspace::core_count(e).value_or(2)}; }

}  // namespace

void GAConfig::check() const {
    if (J <= 0 || N <= 0 || K <= 0) throw ConfigError("J, N and K must be positive");
    if (n_psi <= 0 || max_n_x < 0 || max_n_m < 0) throw ConfigError("n_psi must be positive, max_n_x and max_n_m non-negative");
    if (min_n_rand() < 0) throw ConfigError("n_psi + max_n_x + max_n_m exceeds J");
    if (!(x_prob >= 0.0 && x_prob <= 1.0) || !(m_prob >= 0.0 && m_prob <= 1.0))
        throw ConfigError("x_prob and m_prob must lie in [0, 1]");
}

std::string_view to_string(Status s) noexcept { return kStatusNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Provenance p) noexcept { return kProvenanceNames[static_cast<std::size_t>(p)]; }

Status status_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kStatusNames.size(); ++i)
        if (kStatusNames[i] == s) return static_cast<Status>(i);
    throw UnknownNameError("unknown status '" + std::string(s) + "'");
}

Provenance provenance_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kProvenanceNames.size(); ++i)
        if (kProvenanceNames[i] == s) return static_cast<Provenance>(i);
    throw UnknownNameError("unknown provenance '" + std::string(s) + "'");
}

std::array<int, 4> GenerationRecord::provenance_counts() const {
    std::array<int, 4> counts{};
    for (const auto& m : members) ++counts[static_cast<std::size_t>(m.provenance)];
    return counts;
}

double fitness(double v_a, double v_l) {
    if (std::isnan(v_a) || std::isnan(v_l) || v_l <= 0.0)
        throw DomainError("fitness needs a positive validation loss, got " + std::to_string(v_l));
    return v_a / v_l;
}

ScoredChromosome score(const Chromosome& c, const Evaluation& ev, Provenance p, int born) {
    ScoredChromosome s{c, ev.v_a, ev.v_l, 0.0, ev.status, p, born};
    if (ev.status != Status::evaluated) return s;
    if (!std::isfinite(ev.v_a) || !std::isfinite(ev.v_l) || ev.v_l < 0.0) {
        s.status = Status::aborted_nan;
        return s;
    }
    s.fitness = ev.v_l == 0.0 ? kFitnessCap : std::min(fitness(ev.v_a, ev.v_l), kFitnessCap);
    return s;
}

std::vector<ScoredChromosome> select(std::span<const ScoredChromosome> population, int n_psi) {
    if (n_psi < 0 || static_cast<std::size_t>(n_psi) > population.size())
        throw DomainError("mating pool of " + std::to_string(n_psi) + " from population of " +
                          std::to_string(population.size()));
    struct Keyed {
        const ScoredChromosome* member;
        std::string text;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(population.size());
    for (const auto& m : population) keyed.push_back({&m, m.text()});
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.member->fitness != b.member->fitness) return a.member->fitness > b.member->fitness;
        const bool ea = a.member->status == Status::evaluated, eb = b.member->status == Status::evaluated;
        if (ea != eb) return ea;
        if (a.member->born != b.member->born) return a.member->born < b.member->born;
        return a.text < b.text;
    });
    std::vector<ScoredChromosome> pool;
    pool.reserve(static_cast<std::size_t>(n_psi));
    for (int i = 0; i < n_psi; ++i) pool.push_back(*keyed[static_cast<std::size_t>(i)].member);
    return pool;
}

// ---------------------------------------------------------------------------
// Variation

namespace {

std::vector<std::size_t> sites_of(const Expr& e, funcdsl::NodeKind kind) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e.node(i).kind == kind) out.push_back(i);
    return out;
}

}  // namespace

CrossoverResult crossover(const Chromosome& p1, const Chromosome& p2, SeededStream& rng, double x_prob,
                          GrammarMode mode) {
    CrossoverResult copies{p1, p2, false};
    if (!rng.bernoulli(x_prob)) return copies;
    std::vector<std::size_t> first_sites;
    for (std::size_t i = 1; i < p1.expr.size(); ++i)
        if (p1.expr.node(i).kind != funcdsl::NodeKind::leaf) first_sites.push_back(i);
    if (first_sites.empty()) return copies;

    constexpr int kAttempts = 20;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::size_t i = first_sites[rng.below(first_sites.size())];
        const auto second_sites = sites_of(p2.expr, p1.expr.node(i).kind);
        if (second_sites.empty()) continue;
        const std::size_t j = second_sites[rng.below(second_sites.size())];
        Expr c1 = p1.expr.with_subtree(i, p2.expr.subtree(j));
        Expr c2 = p2.expr.with_subtree(j, p1.expr.subtree(i));
        if (searchspace::validate(c1, mode) && searchspace::validate(c2, mode))
            return {chromosome_of(c1, mode), chromosome_of(c2, mode), true};
    }
    return copies;
}

MutationResult mutate(const Chromosome& c, SeededStream& rng, double m_prob, GrammarMode mode) {
    if (!rng.bernoulli(m_prob)) return {c, false, 0};
    std::vector<std::size_t> internal;
    for (std::size_t i = 0; i < c.expr.size(); ++i)
        if (c.expr.node(i).kind != funcdsl::NodeKind::leaf) internal.push_back(i);
    if (internal.empty()) return {c, false, 0};
    const std::size_t site = internal[rng.below(internal.size())];
    const auto& n = c.expr.node(site);
    const std::uint64_t catalog = n.kind == funcdsl::NodeKind::unary ? funcdsl::kUnaryCount : funcdsl::kBinaryCount;
    auto op = static_cast<std::uint8_t>(rng.below(catalog - 1));
    if (op >= n.op) ++op;
    Expr mutated = c.expr.with_op(site, op);
    return {chromosome_of(mutated, mode), true, site};
}

namespace {

Chromosome unique_random(SeededStream& rng, const ExprSet& seen) {
    constexpr int kRetries = 50;
    Chromosome c = searchspace::random_chromosome(rng);
    for (int r = 0; r < kRetries && seen.contains(c.expr); ++r) c = searchspace::random_chromosome(rng);
    return c;
}

}  // namespace

std::vector<Slot> initial_population(const GAConfig& cfg, SeededStream& rng) {
    std::vector<Slot> slots;
    ExprSet seen;
    for (int j = 0; j < cfg.J; ++j) {
        Chromosome c = unique_random(rng, seen);
        seen.insert(c.expr);
        slots.push_back({std::move(c), Provenance::random});
    }
    return slots;
}

Brood breed(std::span<const ScoredChromosome> population, const GAConfig& cfg, SeededStream& rng) {
    Brood brood;
    brood.elites = select(population, cfg.n_psi);
    ExprSet seen;
    for (auto& e : brood.elites) {
        e.provenance = Provenance::selected;
        seen.insert(e.chromosome.expr);
    }

    SeededStream xrng = rng.child("crossover");
    int n_x = 0;
    const int pairs = (cfg.max_n_x + 1) / 2;
    for (int p = 0; p < pairs; ++p) {
        const auto& a = brood.elites[xrng.below(brood.elites.size())];
        const auto& b = brood.elites[xrng.below(brood.elites.size())];
        CrossoverResult r = crossover(a.chromosome, b.chromosome, xrng, cfg.x_prob, cfg.mode);
        if (!r.swapped) continue;
        for (Chromosome* child : {&r.first, &r.second}) {
            if (n_x >= cfg.max_n_x || seen.contains(child->expr)) continue;
            seen.insert(child->expr);
            brood.fresh.push_back({*child, Provenance::crossover});
            ++n_x;
        }
    }

    SeededStream mrng = rng.child("mutation");
    for (int m = 0; m < cfg.max_n_m; ++m) {
        const auto& source = population[mrng.below(population.size())];
        MutationResult r = mutate(source.chromosome, mrng, cfg.m_prob, cfg.mode);
        if (!r.mutated || seen.contains(r.chromosome.expr)) continue;
        seen.insert(r.chromosome.expr);
        brood.fresh.push_back({r.chromosome, Provenance::mutation});
    }

    SeededStream rrng = rng.child("random");
    while (static_cast<int>(brood.elites.size() + brood.fresh.size()) < cfg.J) {
        Chromosome c = unique_random(rrng, seen);
        seen.insert(c.expr);
        brood.fresh.push_back({std::move(c), Provenance::random});
    }
    return brood;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(GAConfig cfg, Evaluator evaluator, int workers)
    : cfg_(cfg), evaluator_(std::move(evaluator)), workers_(std::max(1, workers)) {
    cfg_.check();
}

SeededStream Engine::generation_stream(int repetition, int generation) const {
    return SeededStream(cfg_.master_seed, "afos")
        .child("rep" + std::to_string(repetition))
        .child("gen" + std::to_string(generation));
}

std::uint64_t Engine::evaluation_seed(int repetition, int generation, int slot) const {
    return generation_stream(repetition, generation).child("eval" + std::to_string(slot)).seed();
}

GenerationRecord Engine::evaluate(int repetition, int index, std::vector<ScoredChromosome> elites,
                                  const std::vector<Slot>& fresh) const {
    GenerationRecord rec;
    rec.repetition = repetition;
    rec.index = index;
    const std::size_t offset = elites.size();
    rec.members = std::move(elites);
    rec.members.resize(offset + fresh.size());

    const auto count = static_cast<std::ptrdiff_t>(fresh.size());
    std::exception_ptr failure;
    // Slots are written by index, so completion order cannot leak into results.
#pragma omp parallel for num_threads(workers_) schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        const auto& slot = fresh[static_cast<std::size_t>(k)];
        const int slot_index = static_cast<int>(offset) + static_cast<int>(k);
        Evaluation ev;
        try {
            ev = evaluator_(slot.chromosome.expr, evaluation_seed(repetition, index, slot_index));
        } catch (const DomainError&) {
            ev = {0.0, std::numeric_limits<double>::quiet_NaN(), Status::aborted_nan};
        } catch (...) {
#pragma omp critical(afos_eval_failure)
            if (!failure) failure = std::current_exception();
        }
        rec.members[offset + static_cast<std::size_t>(k)] = score(slot.chromosome, ev, slot.provenance, index);
    }

    if (failure) std::rethrow_exception(failure);

    rec.best_fitness = 0.0;
    for (const auto& m : rec.members) rec.best_fitness = std::max(rec.best_fitness, m.fitness);
    return rec;
}

GenerationRecord Engine::first_generation(int repetition) const {
    SeededStream rng = generation_stream(repetition, 0).child("init");
    return evaluate(repetition, 0, {}, initial_population(cfg_, rng));
}

GenerationRecord Engine::next_generation(const GenerationRecord& previous) const {
    const int index = previous.index + 1;
    SeededStream rng = generation_stream(previous.repetition, index);
    Brood brood = breed(previous.members, cfg_, rng);
    return evaluate(previous.repetition, index, std::move(brood.elites), brood.fresh);
}

namespace {

using Position = std::pair<int, int>;  // (repetition, generation)

void truncate_log(const std::filesystem::path& path, Position last) {
    std::ifstream in(path);
    std::vector<std::string> kept;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            break;  // a torn final line from the interruption
        }
        const Position pos{j.at("rep").get<int>(), j.at("generation").get<int>()};
        if (pos <= last) kept.push_back(line);
    }
    in.close();
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : kept) out << l << '\n';
}

}  // namespace

RunResult Engine::run(const RunOptions& options) const {
    RunResult result;
    int start_rep = 0;
    std::optional<GenerationRecord> previous;

    if (options.resume && !options.checkpoint_path.empty() && std::filesystem::exists(options.checkpoint_path)) {
        Checkpoint cp = read_checkpoint(options.checkpoint_path);
        if (!(cp.config == cfg_)) throw CheckpointError("checkpoint was written by a different configuration");
        result.best_per_rep = std::move(cp.best_per_rep);
        start_rep = cp.record.repetition;
        if (!options.log_path.empty()) truncate_log(options.log_path, {cp.record.repetition, cp.record.index});
        if (cp.record.index >= cfg_.N - 1)
            ++start_rep;
        else
            previous = std::move(cp.record);
    } else if (!options.log_path.empty()) {
        std::ofstream(options.log_path, std::ios::trunc);
    }

    int produced = 0;
    for (int rep = start_rep; rep < cfg_.K; ++rep) {
        const int first = previous ? previous->index + 1 : 0;
        for (int g = first; g < cfg_.N; ++g) {
            const auto t0 = std::chrono::steady_clock::now();
            GenerationRecord rec = g == 0 ? first_generation(rep) : next_generation(*previous);
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            if (g == cfg_.N - 1) result.best_per_rep.push_back(select(rec.members, 1).front());
            if (!options.log_path.empty()) {
                std::ofstream log(options.log_path, std::ios::app);
                log << log_line(rec) << '\n';
            }
            if (!options.checkpoint_path.empty())
                write_checkpoint(options.checkpoint_path, {cfg_, rec, result.best_per_rep});
            if (options.on_generation) options.on_generation(rec);

            previous = rec;
            result.records.push_back(std::move(rec));
            if (options.stop_after && ++produced >= *options.stop_after) return result;
        }
        previous.reset();
    }
    result.completed = true;
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json member_json(const ScoredChromosome& m) {
    return {{"expr", m.text()},
            {"v_a", number(m.v_a)},
            {"v_l", number(m.v_l)},
            {"fitness", number(m.fitness)},
            {"status", to_string(m.status)},
            {"provenance", to_string(m.provenance)},
            {"born", m.born}};
}

ScoredChromosome member_from(const json& j, GrammarMode mode) {
    ScoredChromosome m;
    m.chromosome = chromosome_of(funcdsl::parse(j.at("expr").get<std::string>()), mode);
    m.v_a = number_from(j.at("v_a"));
    m.v_l = number_from(j.at("v_l"));
    m.fitness = number_from(j.at("fitness"));
    m.status = status_from_string(j.at("status").get<std::string>());
    m.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    m.born = j.at("born").get<int>();
    return m;
}

json record_json(const GenerationRecord& r) {
    json members = json::array();
    for (const auto& m : r.members) members.push_back(member_json(m));
    return {{"rep", r.repetition},
            {"generation", r.index},
            {"best_fitness", number(r.best_fitness)},
            {"wall_time", r.wall_time},
            {"members", std::move(members)}};
}

GenerationRecord record_from(const json& j, GrammarMode mode) {
    GenerationRecord r;
    r.repetition = j.at("rep").get<int>();
    r.index = j.at("generation").get<int>();
    r.best_fitness = number_from(j.at("best_fitness"));
    r.wall_time = j.at("wall_time").get<double>();
    for (const auto& m : j.at("members")) r.members.push_back(member_from(m, mode));
    return r;
}

json config_json(const GAConfig& c) {
    return {{"J", c.J},
            {"N", c.N},
            {"K", c.K},
            {"n_psi", c.n_psi},
            {"max_n_x", c.max_n_x},
            {"max_n_m", c.max_n_m},
            {"x_prob", c.x_prob},
            {"m_prob", c.m_prob},
            {"master_seed", c.master_seed},
            {"mode", c.mode == GrammarMode::strict ? "strict" : "relaxed"}};
}

GAConfig config_from(const json& j) {
    GAConfig c;
    c.J = j.at("J").get<int>();
    c.N = j.at("N").get<int>();
    c.K = j.at("K").get<int>();
    c.n_psi = j.at("n_psi").get<int>();
    c.max_n_x = j.at("max_n_x").get<int>();
    c.max_n_m = j.at("max_n_m").get<int>();
    c.x_prob = j.at("x_prob").get<double>();
    c.m_prob = j.at("m_prob").get<double>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.mode = j.at("mode").get<std::string>() == "strict" ? GrammarMode::strict : GrammarMode::relaxed;
    return c;
}

constexpr std::string_view kCheckpointFormat = "afos-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

}  // namespace

std::string log_line(const GenerationRecord& r) { return record_json(r).dump(); }

GenerationRecord parse_log_line(const std::string& line, GrammarMode mode) {
    return record_from(json::parse(line), mode);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    json best = json::array();
    for (const auto& m : cp.best_per_rep) best.push_back(member_json(m));
    json payload = {{"config", config_json(cp.config)}, {"record", record_json(cp.record)}, {"best", std::move(best)}};
    const std::string body = payload.dump();
    json doc = {{"format", kCheckpointFormat},
                {"version", kCheckpointVersion},
                {"checksum", hex(fnv1a(body))},
                {"payload", std::move(payload)}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << doc.dump(1) << '\n';
        if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    try {
        const json doc = json::parse(in);
        if (doc.at("format").get<std::string>() != kCheckpointFormat)
            throw CheckpointError("not an afos checkpoint: " + path.string());
        if (doc.at("version").get<int>() != kCheckpointVersion)
            throw CheckpointError("unsupported checkpoint version in " + path.string());
        const json& payload = doc.at("payload");
        if (doc.at("checksum").get<std::string>() != hex(fnv1a(payload.dump())))
            throw CheckpointError("checkpoint checksum mismatch in " + path.string());
        Checkpoint cp;
        cp.config = config_from(payload.at("config"));
        cp.record = record_from(payload.at("record"), cp.config.mode);
        for (const auto& m : payload.at("best")) cp.best_per_rep.push_back(member_from(m, GrammarMode::relaxed));
        return cp;
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointError("corrupt checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace afos::evolver
