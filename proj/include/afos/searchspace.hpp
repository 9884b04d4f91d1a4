#pragma once

// Chromosome grammar, random generation and search-space counting.
//
// A core unit is b(u1(x), u2(x)) where each argument is a chain of one or
// two unary primitives ending at x (a bare x stands for identity(x)). A
// chromosome is either a single core unit, or a binary whose arguments are
// each a core unit or a unary chain.

#include <cstdint>
#include <optional>

#include "afos/funcdsl.hpp"
#include "afos/rng.hpp"

namespace afos::searchspace {

using funcdsl::Expr;

enum class GrammarMode : std::uint8_t {
    strict,
    // Any well-formed tree within the depth cap.
    relaxed,
};

struct Chromosome {
    Expr expr;
    int core_count = 1;

    bool operator==(const Chromosome&) const = default;
};

// Length of the unary chain rooted at node i (0 for a bare x), or nullopt
// when the subtree is not a pure chain or is longer than max_len.
std::optional<int> chain_length(const Expr& e, std::size_t i, int max_len = 2);
bool is_core_unit(const Expr& e, std::size_t i);

// Number of core units in a strict-grammar expression, nullopt otherwise.
std::optional<int> core_count(const Expr& e);

bool validate(const Expr& e, GrammarMode mode = GrammarMode::strict);

// Wraps a validated expression; throws DomainError when it fails the grammar.
Chromosome make_chromosome(const Expr& e, GrammarMode mode = GrammarMode::strict);

struct GenerationOptions {
    double two_core_probability = 0.5;
    double chain2_probability = 0.2;
};

Chromosome random_chromosome(SeededStream& rng, const GenerationOptions& opt = {});
Expr random_core_unit(SeededStream& rng, const GenerationOptions& opt = {});

struct CatalogSize {
    std::uint64_t unary = funcdsl::kUnaryCount;
    std::uint64_t binary = funcdsl::kBinaryCount;
};

// Single-core trees plus two-core compositions b(core, core), with unary
// chains of length one.
std::uint64_t count_single_core(CatalogSize sizes = {});
std::uint64_t count_search_space(CatalogSize sizes = {});

}  // namespace afos::searchspace
