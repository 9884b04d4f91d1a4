#pragma once

// Activation-function expression language.
//
// An Expr is an immutable tree over a fixed catalog of unary and binary
// primitives whose only leaf is the input variable x. Trees are stored in
// prefix order, which keeps copies cheap and makes structural equality a
// plain vector comparison.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afos::funcdsl {

enum class Unary : std::uint8_t {
    identity,
    negate,
    exp,
    abs,
    expneg,
    min0,
    max0,
    sin,
    cos,
    sinh,
    tanh,
    arcsin,
    arctan,
    arcsinh,
    arctanh,
    erf,
    sigmoid,
    xerf,
    softplus,
};

enum class Binary : std::uint8_t {
    add,
    mul,
    max,
    min,
    max_max0_left,
    max_min0_left,
    min_max0_left,
    min_min0_left,
    mul_exp_right,
    mul_sigmoid_right,
    mul_erf_right,
};

inline constexpr std::size_t kUnaryCount = 19;
inline constexpr std::size_t kBinaryCount = 11;
inline constexpr std::size_t kMaxDepth = 12;

std::string_view name(Unary u) noexcept;
std::string_view name(Binary b) noexcept;
std::optional<Unary> unary_from_name(std::string_view s) noexcept;
std::optional<Binary> binary_from_name(std::string_view s) noexcept;

inline Unary unary_at(std::size_t i) { return static_cast<Unary>(i); }
inline Binary binary_at(std::size_t i) { return static_cast<Binary>(i); }

// Value and d/dx carried together through the tree (forward mode).
struct Dual {
    double value;
    double deriv;
};

double apply_value(Unary u, double a) noexcept;
double apply_value(Binary b, double a, double c) noexcept;
Dual apply(Unary u, Dual a) noexcept;
Dual apply(Binary b, Dual a, Dual c) noexcept;

enum class NodeKind : std::uint8_t { leaf, unary, binary };

struct Node {
    NodeKind kind = NodeKind::leaf;
    std::uint8_t op = 0;  // Unary or Binary tag, 0 for leaves

    Unary unary() const noexcept { return static_cast<Unary>(op); }
    Binary binary() const noexcept { return static_cast<Binary>(op); }
    int arity() const noexcept { return static_cast<int>(kind); }
    bool operator==(const Node&) const = default;
};

class Expr {
public:
    // The bare input variable.
    Expr();

    static Expr leaf() { return Expr(); }
    static Expr unary(Unary u, const Expr& child);
    static Expr binary(Binary b, const Expr& left, const Expr& right);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_.at(i); }
    const Node& root() const noexcept { return nodes_.front(); }
    bool is_leaf() const noexcept { return nodes_.size() == 1; }

    // One past the last node of the subtree rooted at i.
    std::size_t subtree_end(std::size_t i) const;
    // Index of child `which` (0 = left/only, 1 = right) of node i.
    std::size_t child(std::size_t i, int which) const;
    Expr subtree(std::size_t i) const;
    Expr with_subtree(std::size_t i, const Expr& replacement) const;
    // Same shape, node i relabelled to another primitive of the same arity.
    Expr with_op(std::size_t i, std::uint8_t op) const;

    // Node count along the longest root-to-leaf path; a leaf has depth 1.
    std::size_t depth() const;
    std::size_t count(NodeKind kind) const;

    bool operator==(const Expr&) const = default;

private:
    explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
    std::vector<Node> nodes_;
};

enum class EvalStatus : std::uint8_t { finite, nan, saturated };

struct EvalResult {
    double value;
    double derivative;
    EvalStatus status;
};

// Value and analytic derivative at x. Overflow saturates at the largest
// finite double, domain violations produce NaN; neither throws.
EvalResult eval(const Expr& e, double x) noexcept;

// Value only, bit-identical to eval(e, x).value.
double value(const Expr& e, double x) noexcept;

// Analytic d/dx. Throws DomainError unless eval(e, x) is finite.
double derivative_at(const Expr& e, double x);

std::string format(const Expr& e);

// Parses the canonical prefix grammar:
//   expr := "x" | unary "(" expr ")" | binary "(" expr "," expr ")"
// Whitespace between tokens is ignored.
Expr parse(std::string_view text);

// Built-in reference functions: relu, swish, mish, gelu, serf, elu,
// eelu1..eelu4 and afos_top01..afos_top15.
Expr catalog(std::string_view name);
std::span<const std::string_view> catalog_names() noexcept;

// Resolves a catalog name first, otherwise parses the text.
Expr resolve(std::string_view name_or_text);

struct ExprHash {
    std::size_t operator()(const Expr& e) const noexcept;
};

}  // namespace afos::funcdsl
