#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "afos/funcdsl.hpp"
#include "afos/rng.hpp"

namespace testsupport {

using afos::funcdsl::Binary;
using afos::funcdsl::Expr;
using afos::funcdsl::NodeKind;
using afos::funcdsl::Unary;

inline int sign(double v) { return v > 0 ? 1 : v < 0 ? -1 : 0; }

// True when some piecewise node of f switches branch within [x - r, x + r].
inline bool near_kink(const Expr& f, double x, double r = 1e-3) {
    const auto at = [](const Expr& e, double t) { return afos::funcdsl::value(e, t); };
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& n = f.node(i);
        std::vector<std::function<double(double)>> switches;
        if (n.kind == NodeKind::unary &&
            (n.unary() == Unary::abs || n.unary() == Unary::max0 || n.unary() == Unary::min0)) {
            const Expr a = f.subtree(f.child(i, 0));
            switches.push_back([=](double t) { return at(a, t); });
        } else if (n.kind == NodeKind::binary) {
            const Binary b = n.binary();
            if (b == Binary::add || b == Binary::mul || b == Binary::mul_exp_right ||
                b == Binary::mul_sigmoid_right || b == Binary::mul_erf_right)
                continue;
            const Expr a = f.subtree(f.child(i, 0)), c = f.subtree(f.child(i, 1));
            switches.push_back([=](double t) { return at(a, t); });
            switches.push_back([=](double t) { return at(a, t) - at(c, t); });
            switches.push_back([=](double t) { return std::max(at(a, t), 0.0) - at(c, t); });
            switches.push_back([=](double t) { return std::min(at(a, t), 0.0) - at(c, t); });
        }
        for (const auto& s : switches) {
            int prev = sign(s(x - r));
            for (int k = 1; k <= 20; ++k) {
                const int cur = sign(s(x - r + 2 * r * k / 20.0));
                if (cur != prev) return true;
                prev = cur;
            }
        }
    }
    return false;
}

// Five-point central difference.
inline double central_diff(const Expr& f, double x, double h) {
    const auto v = [&](double t) { return afos::funcdsl::value(f, t); };
    return (-v(x + 2 * h) + 8 * v(x + h) - 8 * v(x - h) + v(x - 2 * h)) / (12 * h);
}

// Every leaf replaced by x: any shape, any primitive, depth <= max_depth.
inline Expr random_tree(afos::SeededStream& rng, int max_depth) {
    if (max_depth <= 1 || rng.uniform() < 0.25) return Expr::leaf();
    if (rng.bernoulli(0.5))
        return Expr::unary(afos::funcdsl::unary_at(rng.below(afos::funcdsl::kUnaryCount)), random_tree(rng, max_depth - 1));
    return Expr::binary(afos::funcdsl::binary_at(rng.below(afos::funcdsl::kBinaryCount)), random_tree(rng, max_depth - 1),
                        random_tree(rng, max_depth - 1));
}

}  // namespace testsupport
