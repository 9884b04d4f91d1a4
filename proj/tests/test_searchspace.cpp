#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "afos/error.hpp"
#include "afos/searchspace.hpp"

using namespace afos;
using namespace afos::searchspace;
using funcdsl::Binary;
using funcdsl::NodeKind;
using funcdsl::Unary;

namespace {

Expr u(Unary op, Expr e = Expr::leaf()) { return Expr::unary(op, e); }

// All trees of depth <= d over the given primitives.
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

// The counted grammar: one core unit, or a binary over two core units,
// with every unary chain of length exactly one.
bool in_counted_grammar(const Expr& e) {
    if (!validate(e)) return false;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& n = e.node(i);
        if (n.kind == NodeKind::unary && e.node(i + 1).kind != NodeKind::leaf) return false;
        if (n.kind == NodeKind::leaf && (i == 0 || e.node(i - 1).kind != NodeKind::unary)) return false;
    }
    if (core_count(e) == 1) return true;
    return is_core_unit(e, e.child(0, 0)) && is_core_unit(e, e.child(0, 1));
}

}  // namespace

TEST_CASE("validate examples") {
    CHECK(validate(funcdsl::catalog("eelu4")));
    Expr deep = Expr::leaf();
    for (int i = 0; i < 9; ++i) deep = Expr::binary(Binary::add, deep, Expr::leaf());
    CHECK(deep.depth() == 10);
    CHECK_FALSE(validate(deep));
    CHECK_FALSE(validate(Expr::leaf()));
    CHECK_FALSE(validate(u(Unary::erf)));
    CHECK(validate(deep, GrammarMode::relaxed));
}

TEST_CASE("core units and chains") {
    const Expr e = funcdsl::parse("mul(erf(exp(x)), x)");
    CHECK(chain_length(e, 1) == 2);
    CHECK(chain_length(e, 4) == 0);
    CHECK(is_core_unit(e, 0));
    CHECK(core_count(e) == 1);
    CHECK_FALSE(chain_length(funcdsl::parse("erf(exp(sin(x)))"), 0).has_value());
    CHECK(core_count(funcdsl::parse("add(mul(x, x), erf(x))")) == 2);
    CHECK(core_count(funcdsl::parse("add(mul(x, x), mul(erf(x), x))")) == 2);
    CHECK_FALSE(core_count(funcdsl::parse("add(add(mul(x, x), x), x)")).has_value());
}

TEST_CASE("catalog entries under the strict grammar") {
    for (auto name : funcdsl::catalog_names()) {
        if (name.starts_with("afos_top") || name.starts_with("eelu") || name == "relu" || name == "swish" ||
            name == "serf") {
            INFO(name);
            // relu is max0(x): a single unary, not a chromosome.
            CHECK(validate(funcdsl::catalog(name)) == (name != "relu"));
        }
        CHECK(validate(funcdsl::catalog(name), GrammarMode::relaxed));
    }
    CHECK_FALSE(validate(funcdsl::catalog("gelu")));
    CHECK_THROWS_AS(make_chromosome(funcdsl::catalog("gelu")), DomainError);
    CHECK(make_chromosome(funcdsl::catalog("gelu"), GrammarMode::relaxed).core_count == 2);
    CHECK(make_chromosome(funcdsl::catalog("afos_top08")).core_count == 2);
    CHECK(make_chromosome(funcdsl::catalog("eelu1")).core_count == 1);
}

TEST_CASE("random chromosomes validate and are deterministic") {
    SeededStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const auto ca = random_chromosome(a), cb = random_chromosome(b);
        REQUIRE(ca == cb);
        REQUIRE(validate(ca.expr));
        REQUIRE(core_count(ca.expr) == ca.core_count);
    }
}

TEST_CASE("two-core fraction") {
    // n = 10,000, p = 0.5: sd = 0.005, so [0.48, 0.52] is a 4-sigma band.
    SeededStream rng(7, "fraction");
    int two = 0;
    for (int i = 0; i < 10000; ++i) two += random_chromosome(rng).core_count == 2;
    CHECK(two / 10000.0 >= 0.48);
    CHECK(two / 10000.0 <= 0.52);
}

TEST_CASE("chain length distribution") {
    // Each chain is length 2 with probability 0.2.
    SeededStream rng(8, "chains");
    int chains = 0, long_chains = 0;
    for (int i = 0; i < 10000; ++i) {
        const Expr e = random_core_unit(rng);
        for (int k = 0; k < 2; ++k) {
            ++chains;
            long_chains += chain_length(e, e.child(0, k)) == 2;
        }
    }
    const double p = static_cast<double>(long_chains) / chains, sd = std::sqrt(0.2 * 0.8 / chains);
    CHECK(std::abs(p - 0.2) < 4 * sd);
}

TEST_CASE("search space count") {
    CHECK(count_single_core() == 3971);
    CHECK(count_search_space() == 173461222ull);
    CHECK(count_search_space() > 170000000ull);
    CHECK(count_search_space() == 3971ull + 11ull * 3971ull * 3971ull);
}

TEST_CASE("single-core term by enumeration") {
    std::unordered_set<Expr, funcdsl::ExprHash> seen;
    for (std::size_t b = 0; b < funcdsl::kBinaryCount; ++b)
        for (std::size_t l = 0; l < funcdsl::kUnaryCount; ++l)
            for (std::size_t r = 0; r < funcdsl::kUnaryCount; ++r) {
                const Expr e = Expr::binary(funcdsl::binary_at(b), u(funcdsl::unary_at(l)), u(funcdsl::unary_at(r)));
                REQUIRE(validate(e));
                REQUIRE(core_count(e) == 1);
                seen.insert(e);
            }
    CHECK(seen.size() == count_single_core());
}

TEST_CASE("shrunk catalog matches brute force") {
    const auto trees = all_trees(4, {Unary::identity, Unary::erf}, {Binary::add, Binary::mul});
    CHECK(trees.size() == 7565);
    std::size_t counted = 0;
    for (const auto& e : trees) counted += in_counted_grammar(e);
    CHECK(counted == 136);
    CHECK(count_search_space({2, 2}) == counted);
    CHECK(count_single_core({2, 2}) == 8);
}
