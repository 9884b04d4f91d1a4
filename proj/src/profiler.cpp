#include "afos/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "afos/error.hpp"
#include "afos/rng.hpp"
#include "afos/tinynet.hpp"

namespace afos::profiler {

namespace {

double at(const Expr& f, double x) { return funcdsl::value(f, x); }

double grid_point(double a, double b, std::size_t i, std::size_t n) {
    return i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::optional<Minimum> global_min(const Expr& f, double a, double b, std::size_t grid) {
    if (!(a < b)) throw DomainError("global_min needs a < b");
    if (grid < 2) throw DomainError("global_min needs at least 2 grid points");
    std::optional<std::size_t> best;
    double best_f = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double v = at(f, grid_point(a, b, i, grid));
        if (std::isnan(v)) continue;
        if (!best || v < best_f) {
            best = i;
            best_f = v;
        }
    }
    if (!best) return std::nullopt;

    Minimum m{grid_point(a, b, *best, grid), best_f};
    double lo = grid_point(a, b, *best == 0 ? 0 : *best - 1, grid);
    double hi = grid_point(a, b, std::min(*best + 1, grid - 1), grid);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = at(f, x1), f2 = at(f, x2);
    while (hi - lo > 1e-8) {
        // NaN compares false, so a NaN probe pushes the bracket away from itself.
        if (f1 < f2 || std::isnan(f2)) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = at(f, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = at(f, x2);
        }
    }
    for (double x : {x1, x2, (lo + hi) / 2.0}) {
        const double v = at(f, x);
        if (v < m.f) m = {x, v};
    }
    return m;
}

std::string_view to_string(BumpSide s) noexcept {
    switch (s) {
        case BumpSide::none: return "none";
        case BumpSide::negative: return "negative";
        case BumpSide::positive: return "positive";
        case BumpSide::both: return "both";
    }
    return "none";
}

namespace {

bool is_linear(const Expr& f, bool& indeterminate) {
    constexpr std::size_t n = 1001;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_point(-5.0, 5.0, i, n), y = at(f, x);
        if (std::isnan(y)) {
            indeterminate = true;
            continue;
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 3) return true;
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icept = (sy - slope * sx) / m;
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(ys[i] - (slope * xs[i] + icept)));
    return !(worst > 1e-6);
}

// Whether g grows without bound as x -> dir * infinity, judged from samples
// out to |x| = 50.
bool grows(const std::function<double(double)>& g, double dir, double inner_max) {
    const double g50 = g(50.0 * dir), g25 = g(25.0 * dir), g125 = g(12.5 * dir);
    if (std::isnan(g50)) return false;
    if (g50 >= std::numeric_limits<double>::max()) return true;
    if (g50 > inner_max && g50 > 10.0 * std::abs(inner_max)) return true;
    // Doubling increments that do not shrink suggest at least logarithmic
    // growth, provided the climb is steady (rules out oscillation).
    const double d1 = g25 - g125, d2 = g50 - g25;
    if (!(d1 > 0.0 && d2 > 1e-9 * std::max(1.0, std::abs(g50)) && d2 >= 0.9 * d1)) return false;
    double prev = g125;
    for (int k = 1; k <= 64; ++k) {
        const double v = g(12.5 * std::exp2(k / 32.0) * dir);
        if (!(v >= prev)) return false;
        prev = v;
    }
    return true;
}

}  // namespace

PropertyReport probe_properties(const Expr& f) {
    PropertyReport r;
    r.nonlinear = !is_linear(f, r.indeterminate);

    double fmax = -std::numeric_limits<double>::infinity(), fmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 1001; ++i) {
        const double v = at(f, grid_point(-5.0, 5.0, i, 1001));
        if (std::isnan(v)) continue;
        fmax = std::max(fmax, v);
        fmin = std::min(fmin, v);
    }
    if (!std::isfinite(fmax)) {
        r.indeterminate = true;
        return r;
    }
    const auto up = [&](double x) { return at(f, x); };
    const auto down = [&](double x) { return -at(f, x); };
    r.upper_bounded = !grows(up, 1.0, fmax) && !grows(up, -1.0, fmax);
    r.lower_bounded = !grows(down, 1.0, -fmin) && !grows(down, -1.0, -fmin);
    if (r.lower_bounded) {
        if (const auto m = global_min(f, -50.0, 50.0)) {
            r.lower_bound_value = m->f;
            r.lower_bound_location = m->x;
        } else {
            r.indeterminate = true;
        }
    }

    // Left and right difference quotients.
    constexpr double h = 1e-6;
    r.differentiable_everywhere = true;
    for (std::size_t i = 0; i < 10001; ++i) {
        const double x = grid_point(-5.0, 5.0, i, 10001);
        const double fl = at(f, x - h), f0 = at(f, x), fr = at(f, x + h);
        if (std::isnan(fl) || std::isnan(f0) || std::isnan(fr)) {
            r.indeterminate = true;
            continue;
        }
        const double left = (f0 - fl) / h, right = (fr - f0) / h;
        if (std::abs(left - right) > 1e-4 * std::max({1.0, std::abs(left), std::abs(right)})) {
            r.differentiable_everywhere = false;
            break;
        }
    }

    // Sign changes of the analytic derivative.
    constexpr std::size_t n = 20001;
    int prev_sign = 0;
    double prev_x = 0.0;
    bool neg = false, pos = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_point(-10.0, 10.0, i, n);
        const auto e = funcdsl::eval(f, x);
        if (e.status != funcdsl::EvalStatus::finite) {
            r.indeterminate = true;
            continue;
        }
        const int sign = e.derivative > 1e-12 ? 1 : e.derivative < -1e-12 ? -1 : 0;
        if (sign == 0) continue;
        if (prev_sign != 0 && sign != prev_sign) {
            const double mid = (x + prev_x) / 2.0;
            (mid < 0.0 ? neg : pos) = true;
        }
        prev_sign = sign;
        prev_x = x;
    }
    r.non_monotonic = neg || pos;
    r.bump_side = neg && pos ? BumpSide::both : neg ? BumpSide::negative : pos ? BumpSide::positive : BumpSide::none;
    return r;
}

std::string checklist(const std::vector<std::pair<std::string, PropertyReport>>& columns) {
    std::ostringstream os;
    const auto mark = [](bool b) { return b ? "yes" : "no"; };
    os << std::left << std::setw(16) << "property";
    for (const auto& [name, _] : columns) os << std::setw(std::max<int>(10, static_cast<int>(name.size()) + 2)) << name;
    os << '\n';
    const std::pair<const char*, bool PropertyReport::*> rows[] = {
        {"non-linear", &PropertyReport::nonlinear},
        {"upper-bounded", &PropertyReport::upper_bounded},
        {"lower-bounded", &PropertyReport::lower_bounded},
        {"differentiable", &PropertyReport::differentiable_everywhere},
        {"non-monotonic", &PropertyReport::non_monotonic},
    };
    for (const auto& [label, field] : rows) {
        os << std::setw(16) << label;
        for (const auto& [name, rep] : columns)
            os << std::setw(std::max<int>(10, static_cast<int>(name.size()) + 2)) << mark(rep.*field);
        os << '\n';
    }
    return os.str();
}

std::vector<CurvePoint> curve(const Expr& f, double a, double b, std::size_t samples) {
    if (samples < 2) throw DomainError("a curve needs at least 2 samples");
    if (!(a < b)) throw DomainError("curve range needs a < b");
    std::vector<CurvePoint> out;
    out.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = grid_point(a, b, i, samples);
        const auto e = funcdsl::eval(f, x);
        out.push_back({x, e.value, e.derivative});
    }
    return out;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts) {
    os << "x,f,df\n";
    for (const auto& p : pts) os << num(p.x) << ',' << num(p.f) << ',' << num(p.df) << '\n';
}

void export_curve(const Expr& f, double a, double b, std::size_t samples, const std::filesystem::path& out) {
    const auto pts = curve(f, a, b, samples);
    std::ofstream os(out);
    if (!os) throw DataError("cannot write " + out.string());
    write_curve_csv(os, pts);
    if (!os) throw DataError("failed writing " + out.string());
}

std::vector<std::vector<double>> output_landscape(const Expr& f, std::size_t resolution, std::uint64_t seed) {
    if (resolution < 2) throw DomainError("landscape resolution must be at least 2");
    using tinynet::LayerSpec;
    auto model = tinynet::Model::build(
        {LayerSpec::dense(64, f), LayerSpec::dense(64, f), LayerSpec::dense(64, f), LayerSpec::dense(1)}, Shape{2},
        seed);
    // one grid row per forward pass keeps the layer caches small
    std::vector<std::vector<double>> m(resolution);
    TensorBundle row(Shape{resolution, 2});
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            row.data[c * 2] = grid_point(-1.0, 1.0, c, resolution);
            row.data[c * 2 + 1] = grid_point(-1.0, 1.0, r, resolution);
        }
        m[r] = model.forward(row, false).data;
    }
    return m;
}

void write_matrix_csv(std::ostream& os, const std::vector<std::vector<double>>& m) {
    for (const auto& row : m) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << num(row[c]);
        os << '\n';
    }
}

double microbench_activation(const Expr& f, std::size_t array_len, std::size_t runs, std::uint64_t seed) {
    if (array_len == 0 || runs == 0) throw DomainError("microbench needs array_len and runs >= 1");
    SeededStream rng(seed, "bench");
    std::vector<double> xs(array_len), ys(array_len);
    for (double& x : xs) x = rng.uniform(-5.0, 5.0);
    volatile double sink = 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < array_len; ++i) ys[i] = funcdsl::value(f, xs[i]);
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + ys[r % array_len];
        total += std::chrono::duration<double>(t1 - t0).count();
    }
    return total / static_cast<double>(runs);
}

}  // namespace afos::profiler
