#pragma once

// Numeric probes of an activation function: global minimum, a property
// checklist, curve and output-landscape export, and a timing loop.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afos/funcdsl.hpp"

namespace afos::profiler {

using funcdsl::Expr;

struct Minimum {
    double x = 0.0;
    double f = 0.0;
};

// Grid of `grid` points, then golden-section refinement inside the best
// grid cell until the bracket is below 1e-8. Empty if every sample is NaN.
std::optional<Minimum> global_min(const Expr& f, double a, double b, std::size_t grid = 100001);

enum class BumpSide { none, negative, positive, both };
std::string_view to_string(BumpSide s) noexcept;

struct PropertyReport {
    bool nonlinear = false;
    bool upper_bounded = false;
    bool lower_bounded = false;
    std::optional<double> lower_bound_value;
    std::optional<double> lower_bound_location;
    bool differentiable_everywhere = false;
    bool non_monotonic = false;
    BumpSide bump_side = BumpSide::none;
    // Set when NaN or saturated samples made some probe unreliable.
    bool indeterminate = false;
};

PropertyReport probe_properties(const Expr& f);

// ReLU-vs-candidate style checklist with a tick or cross per property.
std::string checklist(const std::vector<std::pair<std::string, PropertyReport>>& columns);

struct CurvePoint {
    double x, f, df;
};

std::vector<CurvePoint> curve(const Expr& f, double a, double b, std::size_t samples);
// Header "x,f,df"; NaN becomes an empty field.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts);
void export_curve(const Expr& f, double a, double b, std::size_t samples, const std::filesystem::path& out);

// Output of a fixed random 2-64-64-64-1 dense network over [-1, 1]^2.
// Row r holds y = -1 + 2r/(n-1), column c holds x likewise.
std::vector<std::vector<double>> output_landscape(const Expr& f, std::size_t resolution, std::uint64_t seed);
void write_matrix_csv(std::ostream& os, const std::vector<std::vector<double>>& m);

// Mean wall seconds per run of evaluating f over `array_len` random inputs.
double microbench_activation(const Expr& f, std::size_t array_len, std::size_t runs, std::uint64_t seed = 0);

inline constexpr double kPaperErfSeconds = 1.17e-5;

}  // namespace afos::profiler
