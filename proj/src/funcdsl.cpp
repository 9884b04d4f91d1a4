#include "afos/funcdsl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "afos/error.hpp"

namespace afos::funcdsl {
namespace {

constexpr std::array<std::string_view, kUnaryCount> kUnaryNames{
    "identity", "negate", "exp",     "abs",     "expneg", "min0",  "max0",
    "sin",      "cos",    "sinh",    "tanh",    "arcsin", "arctan", "arcsinh",
    "arctanh",  "erf",    "sigmoid", "xerf",    "softplus",
};

constexpr std::array<std::string_view, kBinaryCount> kBinaryNames{
    "add",           "mul",           "max",           "min",
    "max_max0_left", "max_min0_left", "min_max0_left", "min_min0_left",
    "mul_exp_right", "mul_sigmoid_right", "mul_erf_right",
};

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160272981674833411;  // 2/sqrt(pi)
constexpr double kMaxFinite = std::numeric_limits<double>::max();

double sigmoid(double a) noexcept {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double softplus(double a) noexcept {
    return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

double erf_slope(double a) noexcept { return kTwoOverSqrtPi * std::exp(-a * a); }

// d/da of the unary primitive, evaluated at a.
double unary_slope(Unary u, double a) noexcept {
    switch (u) {
        case Unary::identity: return 1.0;
        case Unary::negate: return -1.0;
        case Unary::exp: return std::exp(a);
        case Unary::abs: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        case Unary::expneg: return -std::exp(-a);
        case Unary::min0: return a <= 0.0 ? 1.0 : 0.0;
        case Unary::max0: return a > 0.0 ? 1.0 : 0.0;
        case Unary::sin: return std::cos(a);
        case Unary::cos: return -std::sin(a);
        case Unary::sinh: return std::cosh(a);
        case Unary::tanh: {
            const double t = std::tanh(a);
            return 1.0 - t * t;
        }
        case Unary::arcsin: return 1.0 / std::sqrt(1.0 - a * a);
        case Unary::arctan: return 1.0 / (1.0 + a * a);
        case Unary::arcsinh: return 1.0 / std::sqrt(1.0 + a * a);
        case Unary::arctanh: return 1.0 / (1.0 - a * a);
        case Unary::erf: return erf_slope(a);
        case Unary::sigmoid: {
            const double s = sigmoid(a);
            return s * (1.0 - s);
        }
        case Unary::xerf: return std::erf(a) + a * erf_slope(a);
        case Unary::softplus: return sigmoid(a);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Kinked binaries: ties resolve to the left argument.
Dual pick_max(Dual a, Dual c) noexcept { return a.value >= c.value ? a : c; }
Dual pick_min(Dual a, Dual c) noexcept { return a.value <= c.value ? a : c; }

// Replaces +-inf with +-max finite; NaN passes through.
double saturate(double v, bool& hit) noexcept {
    if (std::isinf(v)) {
        hit = true;
        return std::copysign(kMaxFinite, v);
    }
    return v;
}

struct Walker {
    std::span<const Node> nodes;
    std::size_t pos = 0;
    double x = 0.0;
    bool saturated = false;

    Dual dual() {
        const Node n = nodes[pos++];
        Dual r{};
        switch (n.kind) {
            case NodeKind::leaf: r = {x, 1.0}; break;
            case NodeKind::unary: r = apply(n.unary(), dual()); break;
            case NodeKind::binary: {
                const Dual a = dual();
                const Dual c = dual();
                r = apply(n.binary(), a, c);
                break;
            }
        }
        r.value = saturate(r.value, saturated);
        r.deriv = saturate(r.deriv, saturated);
        return r;
    }

    double val() {
        const Node n = nodes[pos++];
        double r = 0.0;
        switch (n.kind) {
            case NodeKind::leaf: r = x; break;
            case NodeKind::unary: r = apply_value(n.unary(), val()); break;
            case NodeKind::binary: {
                const double a = val();
                const double c = val();
                r = apply_value(n.binary(), a, c);
                break;
            }
        }
        return saturate(r, saturated);
    }
};

}  // namespace

std::string_view name(Unary u) noexcept { return kUnaryNames[static_cast<std::size_t>(u)]; }
std::string_view name(Binary b) noexcept { return kBinaryNames[static_cast<std::size_t>(b)]; }

std::optional<Unary> unary_from_name(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kUnaryNames.size(); ++i)
        if (kUnaryNames[i] == s) return static_cast<Unary>(i);
    return std::nullopt;
}

std::optional<Binary> binary_from_name(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kBinaryNames.size(); ++i)
        if (kBinaryNames[i] == s) return static_cast<Binary>(i);
    return std::nullopt;
}

double apply_value(Unary u, double a) noexcept {
    switch (u) {
        case Unary::identity: return a;
        case Unary::negate: return -a;
        case Unary::exp: return std::exp(a);
        case Unary::abs: return std::abs(a);
        case Unary::expneg: return std::exp(-a);
        case Unary::min0: return std::min(a, 0.0);
        case Unary::max0: return std::max(a, 0.0);
        case Unary::sin: return std::sin(a);
        case Unary::cos: return std::cos(a);
        case Unary::sinh: return std::sinh(a);
        case Unary::tanh: return std::tanh(a);
        case Unary::arcsin: return std::asin(a);
        case Unary::arctan: return std::atan(a);
        case Unary::arcsinh: return std::asinh(a);
        case Unary::arctanh: return std::atanh(a);
        case Unary::erf: return std::erf(a);
        case Unary::sigmoid: return sigmoid(a);
        case Unary::xerf: return a * std::erf(a);
        case Unary::softplus: return softplus(a);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double apply_value(Binary b, double a, double c) noexcept {
    // NaN must propagate through the comparisons below, so the selection
    // mirrors pick_max/pick_min rather than using std::max.
    auto vmax = [](double p, double q) { return std::isnan(p) || std::isnan(q) ? p + q : (p >= q ? p : q); };
    auto vmin = [](double p, double q) { return std::isnan(p) || std::isnan(q) ? p + q : (p <= q ? p : q); };
    switch (b) {
        case Binary::add: return a + c;
        case Binary::mul: return a * c;
        case Binary::max: return vmax(a, c);
        case Binary::min: return vmin(a, c);
        case Binary::max_max0_left: return vmax(apply_value(Unary::max0, a), c);
        case Binary::max_min0_left: return vmax(apply_value(Unary::min0, a), c);
        case Binary::min_max0_left: return vmin(apply_value(Unary::max0, a), c);
        case Binary::min_min0_left: return vmin(apply_value(Unary::min0, a), c);
        case Binary::mul_exp_right: return a * std::exp(c);
        case Binary::mul_sigmoid_right: return a * sigmoid(c);
        case Binary::mul_erf_right: return a * std::erf(c);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Dual apply(Unary u, Dual a) noexcept {
    if (std::isnan(a.value)) return {a.value, a.value};
    const double v = apply_value(u, a.value);
    if (a.deriv == 0.0) return {v, std::isnan(v) ? v : 0.0};
    return {v, unary_slope(u, a.value) * a.deriv};
}

Dual apply(Binary b, Dual a, Dual c) noexcept {
    if (std::isnan(a.value) || std::isnan(c.value)) {
        const double n = a.value + c.value;
        return {n, n};
    }
    const double v = apply_value(b, a.value, c.value);
    switch (b) {
        case Binary::add: return {v, a.deriv + c.deriv};
        case Binary::mul: return {v, a.deriv * c.value + a.value * c.deriv};
        case Binary::max: return {v, pick_max(a, c).deriv};
        case Binary::min: return {v, pick_min(a, c).deriv};
        case Binary::max_max0_left: return {v, pick_max(apply(Unary::max0, a), c).deriv};
        case Binary::max_min0_left: return {v, pick_max(apply(Unary::min0, a), c).deriv};
        case Binary::min_max0_left: return {v, pick_min(apply(Unary::max0, a), c).deriv};
        case Binary::min_min0_left: return {v, pick_min(apply(Unary::min0, a), c).deriv};
        case Binary::mul_exp_right: {
            const double e = std::exp(c.value);
            return {v, a.deriv * e + a.value * e * c.deriv};
        }
        case Binary::mul_sigmoid_right: {
            const double s = sigmoid(c.value);
            return {v, a.deriv * s + a.value * s * (1.0 - s) * c.deriv};
        }
        case Binary::mul_erf_right:
            return {v, a.deriv * std::erf(c.value) + a.value * erf_slope(c.value) * c.deriv};
    }
    return {v, std::numeric_limits<double>::quiet_NaN()};
}

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : nodes_{Node{}} {}

Expr Expr::unary(Unary u, const Expr& child) {
    std::vector<Node> n;
    n.reserve(child.size() + 1);
    n.push_back({NodeKind::unary, static_cast<std::uint8_t>(u)});
    n.insert(n.end(), child.nodes_.begin(), child.nodes_.end());
    return Expr(std::move(n));
}

Expr Expr::binary(Binary b, const Expr& left, const Expr& right) {
    std::vector<Node> n;
    n.reserve(left.size() + right.size() + 1);
    n.push_back({NodeKind::binary, static_cast<std::uint8_t>(b)});
    n.insert(n.end(), left.nodes_.begin(), left.nodes_.end());
    n.insert(n.end(), right.nodes_.begin(), right.nodes_.end());
    return Expr(std::move(n));
}

std::size_t Expr::subtree_end(std::size_t i) const {
    std::size_t open = 1;
    while (open > 0) {
        open += static_cast<std::size_t>(nodes_.at(i).arity());
        --open;
        ++i;
    }
    return i;
}

std::size_t Expr::child(std::size_t i, int which) const {
    const Node& n = nodes_.at(i);
    if (which >= n.arity()) throw std::out_of_range("Expr::child: no such child");
    return which == 0 ? i + 1 : subtree_end(i + 1);
}

Expr Expr::subtree(std::size_t i) const {
    const auto end = subtree_end(i);
    return Expr(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(i),
                                  nodes_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Expr Expr::with_subtree(std::size_t i, const Expr& replacement) const {
    const auto end = subtree_end(i);
    std::vector<Node> n;
    n.reserve(nodes_.size() - (end - i) + replacement.size());
    n.insert(n.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(i));
    n.insert(n.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    n.insert(n.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
    return Expr(std::move(n));
}

Expr Expr::with_op(std::size_t i, std::uint8_t op) const {
    auto n = nodes_;
    auto& target = n.at(i);
    const std::size_t limit = target.kind == NodeKind::unary ? kUnaryCount : kBinaryCount;
    if (target.kind == NodeKind::leaf || op >= limit) throw std::invalid_argument("Expr::with_op: bad relabel");
    target.op = op;
    return Expr(std::move(n));
}

std::size_t Expr::depth() const {
    // Prefix order: track the depth of every pending child slot.
    std::vector<std::size_t> pending{1};
    std::size_t best = 0;
    for (const Node& n : nodes_) {
        const std::size_t d = pending.back();
        pending.pop_back();
        best = std::max(best, d);
        for (int k = 0; k < n.arity(); ++k) pending.push_back(d + 1);
    }
    return best;
}

std::size_t Expr::count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.kind == kind; }));
}

std::size_t ExprHash::operator()(const Expr& e) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const Node& n : e.nodes()) {
        h ^= (static_cast<std::size_t>(n.kind) << 8) | n.op;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalResult eval(const Expr& e, double x) noexcept {
    Walker w{e.nodes(), 0, x, false};
    const Dual d = w.dual();
    EvalStatus status = EvalStatus::finite;
    if (std::isnan(d.value) || std::isnan(d.deriv))
        status = EvalStatus::nan;
    else if (w.saturated)
        status = EvalStatus::saturated;
    return {d.value, d.deriv, status};
}

double value(const Expr& e, double x) noexcept {
    Walker w{e.nodes(), 0, x, false};
    return w.val();
}

double derivative_at(const Expr& e, double x) {
    const EvalResult r = eval(e, x);
    if (r.status != EvalStatus::finite)
        throw DomainError("derivative undefined at x=" + std::to_string(x) + " for " + format(e));
    return r.derivative;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

void format_into(const Expr& e, std::size_t i, std::string& out) {
    const Node& n = e.node(i);
    switch (n.kind) {
        case NodeKind::leaf: out += 'x'; return;
        case NodeKind::unary:
            out += name(n.unary());
            out += '(';
            format_into(e, i + 1, out);
            out += ')';
            return;
        case NodeKind::binary:
            out += name(n.binary());
            out += '(';
            format_into(e, e.child(i, 0), out);
            out += ", ";
            format_into(e, e.child(i, 1), out);
            out += ')';
            return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr parse_all() {
        Expr e = expr(1);
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("trailing input", pos_);
        return e;
    }

private:
    Expr expr(std::size_t depth) {
        if (depth > kMaxDepth)
            throw DepthError("expression deeper than " + std::to_string(kMaxDepth) + " at byte " +
                             std::to_string(pos_));
        skip_ws();
        const std::size_t start = pos_;
        const std::string_view ident = identifier();
        if (ident.empty()) throw ParseError("expected identifier", start);
        if (ident == "x") return Expr::leaf();
        if (auto u = unary_from_name(ident)) {
            expect('(');
            Expr child = expr(depth + 1);
            expect(')');
            return Expr::unary(*u, child);
        }
        if (auto b = binary_from_name(ident)) {
            expect('(');
            Expr left = expr(depth + 1);
            expect(',');
            Expr right = expr(depth + 1);
            expect(')');
            return Expr::binary(*b, left, right);
        }
        throw UnknownNameError("unknown primitive '" + std::string(ident) + "' at byte " + std::to_string(start));
    }

    std::string_view identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        return s_.substr(start, pos_ - start);
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string format(const Expr& e) {
    std::string out;
    format_into(e, 0, out);
    return out;
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Catalog

namespace {

// Constants are not part of the grammar, but 0, 1, 1/2 and 1/sqrt(2) can be
// composed exactly (up to rounding) from x: x + (-x), exp(0), sigmoid(0) and
// sin(arctan(1)).
const char* const kZero = "add(x, negate(x))";

std::string const_one() { return std::string("exp(") + kZero + ")"; }
std::string const_half() { return std::string("sigmoid(") + kZero + ")"; }
std::string const_inv_sqrt2() { return "sin(arctan(" + const_one() + "))"; }

struct Entry {
    std::string_view name;
    std::string text;
};

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t{
            {"relu", "max0(x)"},
            {"swish", "mul_sigmoid_right(x, x)"},
            {"mish", "mul(x, tanh(softplus(x)))"},
            {"gelu", "mul(mul(" + const_half() + ", x), add(" + const_one() + ", erf(mul(x, " + const_inv_sqrt2() +
                         "))))"},
            {"serf", "mul_erf_right(x, softplus(x))"},
            {"elu", "add(max0(x), min0(add(exp(x), negate(" + const_one() + "))))"},
            {"eelu1", "mul_erf_right(x, exp(x))"},
            {"eelu2", "mul_erf_right(negate(x), expneg(x))"},
            {"eelu3", "mul_erf_right(mul_erf_right(x, exp(x)), exp(x))"},
            {"eelu4", "mul(erf(x), softplus(x))"},
            {"afos_top01", "mul(erf(x), softplus(x))"},
            {"afos_top02", "mul_erf_right(negate(x), expneg(x))"},
            {"afos_top03", "mul_erf_right(x, exp(x))"},
            {"afos_top04", "mul_erf_right(mul_erf_right(x, exp(x)), exp(x))"},
            {"afos_top05", "mul_erf_right(max(x, min0(x)), min0(x))"},
            {"afos_top06", "add(mul_erf_right(max0(x), arctan(x)), negate(x))"},
            {"afos_top07", "mul_erf_right(softplus(x), erf(x))"},
            {"afos_top08", "mul_sigmoid_right(add(tanh(x), max0(x)), mul_erf_right(softplus(x), arctan(x)))"},
            {"afos_top09", "mul(softplus(x), tanh(x))"},
            {"afos_top10", "max(mul_sigmoid_right(sin(x), sin(x)), add(xerf(x), tanh(x)))"},
            {"afos_top11", "mul_sigmoid_right(add(tanh(x), max0(x)), mul_erf_right(softplus(x), sinh(x)))"},
            {"afos_top12", "add(xerf(x), sin(x))"},
            {"afos_top13", "max(x, erf(x))"},
            {"afos_top14", "add(mul(max0(x), arctan(x)), negate(x))"},
            {"afos_top15", "max(mul(softplus(x), tanh(x)), erf(x))"},
        };
        return t;
    }();
    return table;
}

const std::vector<std::string_view>& names() {
    static const std::vector<std::string_view> n = [] {
        std::vector<std::string_view> v;
        for (const auto& e : entries()) v.push_back(e.name);
        return v;
    }();
    return n;
}

}  // namespace

Expr catalog(std::string_view name) {
    for (const auto& e : entries())
        if (e.name == name) return parse(e.text);
    throw UnknownNameError("unknown catalog function '" + std::string(name) + "'");
}

std::span<const std::string_view> catalog_names() noexcept { return names(); }

Expr resolve(std::string_view name_or_text) {
    for (const auto& e : entries())
        if (e.name == name_or_text) return parse(e.text);
    return parse(name_or_text);
}

}  // namespace afos::funcdsl
