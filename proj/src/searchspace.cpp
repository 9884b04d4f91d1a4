#include "afos/searchspace.hpp"

#include "afos/error.hpp"

namespace afos::searchspace {

using funcdsl::Binary;
using funcdsl::NodeKind;
using funcdsl::Unary;

std::optional<int> chain_length(const Expr& e, std::size_t i, int max_len) {
    int len = 0;
    while (e.node(i).kind == NodeKind::unary) {
        if (++len > max_len) return std::nullopt;
        ++i;
    }
    if (e.node(i).kind != NodeKind::leaf) return std::nullopt;
    return len;
}

bool is_core_unit(const Expr& e, std::size_t i) {
    if (e.node(i).kind != NodeKind::binary) return false;
    return chain_length(e, e.child(i, 0)).has_value() && chain_length(e, e.child(i, 1)).has_value();
}

std::optional<int> core_count(const Expr& e) {
    if (e.root().kind != NodeKind::binary) return std::nullopt;
    if (is_core_unit(e, 0)) return 1;
    for (int k = 0; k < 2; ++k) {
        const std::size_t c = e.child(0, k);
        if (!is_core_unit(e, c) && !chain_length(e, c).has_value()) return std::nullopt;
    }
    return 2;
}

bool validate(const Expr& e, GrammarMode mode) {
    if (e.depth() > funcdsl::kMaxDepth) return false;
    if (mode == GrammarMode::relaxed) return true;
    return core_count(e).has_value();
}

Chromosome make_chromosome(const Expr& e, GrammarMode mode) {
    if (!validate(e, mode)) throw DomainError("expression violates the chromosome grammar: " + funcdsl::format(e));
    return {e, core_count(e).value_or(2)};
}

namespace {

Expr random_chain(SeededStream& rng, const GenerationOptions& opt) {
    const int len = rng.bernoulli(opt.chain2_probability) ? 2 : 1;
    Expr e = Expr::leaf();
    for (int k = 0; k < len; ++k) e = Expr::unary(funcdsl::unary_at(rng.below(funcdsl::kUnaryCount)), e);
    return e;
}

Binary random_binary(SeededStream& rng) { return funcdsl::binary_at(rng.below(funcdsl::kBinaryCount)); }

}  // namespace

Expr random_core_unit(SeededStream& rng, const GenerationOptions& opt) {
    const Binary b = random_binary(rng);
    Expr left = random_chain(rng, opt);
    Expr right = random_chain(rng, opt);
    return Expr::binary(b, left, right);
}

Chromosome random_chromosome(SeededStream& rng, const GenerationOptions& opt) {
    if (rng.bernoulli(opt.two_core_probability)) {
        const Binary b = random_binary(rng);
        Expr left = random_core_unit(rng, opt);
        Expr right = random_core_unit(rng, opt);
        return {Expr::binary(b, left, right), 2};
    }
    return {random_core_unit(rng, opt), 1};
}

std::uint64_t count_single_core(CatalogSize sizes) { return sizes.binary * sizes.unary * sizes.unary; }

std::uint64_t count_search_space(CatalogSize sizes) {
    const std::uint64_t single = count_single_core(sizes);
    return single + sizes.binary * single * single;
}

}  // namespace afos::searchspace
