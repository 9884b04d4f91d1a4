#pragma once

// Genetic search over activation-function chromosomes.
//
// Each generation keeps the n_psi best members unchanged, adds up to
// max_n_x crossover children of random elite pairs and up to max_n_m
// mutants of random members, then fills the rest with fresh random draws.
// All randomness is derived from (master seed, repetition, generation,
// role) labels so evaluation order never affects the trajectory.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afos/rng.hpp"
#include "afos/searchspace.hpp"

namespace afos::evolver {

using funcdsl::Expr;
using searchspace::Chromosome;
using searchspace::GrammarMode;

struct GAConfig {
    int J = 30;        // population size
    int N = 40;        // generations per repetition
    int K = 1;         // repetitions
    int n_psi = 6;     // mating pool / elites
    int max_n_x = 6;   // crossover offspring
    int max_n_m = 1;   // mutation offspring
    double x_prob = 0.80;
    double m_prob = 0.20;
    std::uint64_t master_seed = 0;
    GrammarMode mode = GrammarMode::strict;

    int min_n_rand() const noexcept { return J - (n_psi + max_n_x + max_n_m); }
    // Throws ConfigError when the sizes cannot form a population.
    void check() const;
    bool operator==(const GAConfig&) const = default;
};

enum class Status : std::uint8_t { evaluated, aborted_nan, aborted_threshold };
enum class Provenance : std::uint8_t { selected, crossover, mutation, random };

std::string_view to_string(Status s) noexcept;
std::string_view to_string(Provenance p) noexcept;
Status status_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);

// What an evaluator reports for one chromosome.
struct Evaluation {
    double v_a = 0.0;
    double v_l = 0.0;
    Status status = Status::evaluated;
};

// Must be deterministic in (expr, seed) and safe to call concurrently.
using Evaluator = std::function<Evaluation(const Expr&, std::uint64_t seed)>;

struct ScoredChromosome {
    Chromosome chromosome;
    double v_a = 0.0;
    double v_l = 0.0;
    double fitness = 0.0;
    Status status = Status::evaluated;
    Provenance provenance = Provenance::random;
    int born = 0;  // generation index at which the chromosome was created

    std::string text() const { return funcdsl::format(chromosome.expr); }
    bool operator==(const ScoredChromosome&) const = default;
};

struct GenerationRecord {
    int repetition = 0;
    int index = 0;
    std::vector<ScoredChromosome> members;
    double best_fitness = 0.0;
    double wall_time = 0.0;

    // Indexed by Provenance.
    std::array<int, 4> provenance_counts() const;
};

inline constexpr double kFitnessCap = 1e9;

// v_a / v_l. Throws DomainError when v_l <= 0 or either input is NaN.
double fitness(double v_a, double v_l);

// Maps an evaluator report onto a scored member: aborted or non-finite
// results get fitness 0, a perfect loss of exactly 0 is capped at 1e9.
ScoredChromosome score(const Chromosome& c, const Evaluation& ev, Provenance p, int born);

// The n_psi fittest members in descending fitness; ties prefer the earlier
// birth generation, then the lexicographically smaller canonical text.
std::vector<ScoredChromosome> select(std::span<const ScoredChromosome> population, int n_psi);

struct CrossoverResult {
    Chromosome first;
    Chromosome second;
    bool swapped = false;
};

// Single-point subtree crossover between nodes of the same kind.
CrossoverResult crossover(const Chromosome& p1, const Chromosome& p2, SeededStream& rng, double x_prob,
                          GrammarMode mode = GrammarMode::strict);

struct MutationResult {
    Chromosome chromosome;
    bool mutated = false;
    std::size_t site = 0;
};

// Relabels one random internal node with a different primitive of the same arity.
MutationResult mutate(const Chromosome& c, SeededStream& rng, double m_prob, GrammarMode mode = GrammarMode::strict);

// An unscored slot of the next population.
struct Slot {
    Chromosome chromosome;
    Provenance provenance;
};

struct Brood {
    std::vector<ScoredChromosome> elites;
    std::vector<Slot> fresh;  // crossover, mutation, then random slots
};

Brood breed(std::span<const ScoredChromosome> population, const GAConfig& cfg, SeededStream& rng);

// Generation 0: J random chromosomes with duplicates redrawn.
std::vector<Slot> initial_population(const GAConfig& cfg, SeededStream& rng);

struct RunOptions {
    std::filesystem::path log_path;         // JSON lines, empty disables
    std::filesystem::path checkpoint_path;  // rewritten after every generation, empty disables
    bool resume = false;
    int workers = 1;
    // Stop (as if interrupted) after this many generations have been
    // completed in this call.
    std::optional<int> stop_after;
    std::function<void(const GenerationRecord&)> on_generation;
};

struct RunResult {
    std::vector<GenerationRecord> records;      // produced by this call
    std::vector<ScoredChromosome> best_per_rep;  // completed repetitions
    bool completed = false;
};

class Engine {
public:
    Engine(GAConfig cfg, Evaluator evaluator, int workers = 1);

    GenerationRecord first_generation(int repetition) const;
    GenerationRecord next_generation(const GenerationRecord& previous) const;

    RunResult run(const RunOptions& options = {}) const;

    const GAConfig& config() const noexcept { return cfg_; }
    std::uint64_t evaluation_seed(int repetition, int generation, int slot) const;

private:
    GenerationRecord evaluate(int repetition, int index, std::vector<ScoredChromosome> elites,
                              const std::vector<Slot>& fresh) const;
    SeededStream generation_stream(int repetition, int generation) const;

    GAConfig cfg_;
    Evaluator evaluator_;
    int workers_;
};

// JSON-lines run log.
std::string log_line(const GenerationRecord& r);
GenerationRecord parse_log_line(const std::string& line, GrammarMode mode = GrammarMode::relaxed);

struct Checkpoint {
    GAConfig config;
    GenerationRecord record;
    std::vector<ScoredChromosome> best_per_rep;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
// Throws CheckpointError for unreadable, truncated or tampered files.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace afos::evolver
